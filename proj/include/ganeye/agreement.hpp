#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ganeye/error.hpp"

namespace ganeye {

/// Three-way triage judgment.
enum class Category : int { highly_likely_gan = 1, likely_gan = 2, not_gan = 3 };

inline std::optional<Category> category_from_int(long long v) {
  if (v < 1 || v > 3) return std::nullopt;
  return static_cast<Category>(v);
}

inline int to_int(Category c) { return static_cast<int>(c); }

/// Cohen's kappa over paired labels from two raters. When expected agreement
/// is 1 (every label in one agreeing cell) kappa is defined as 1.
template <typename Label>
double cohen_kappa(std::span<const std::pair<Label, Label>> pairs) {
  if (pairs.empty()) throw InvalidInput("cohen_kappa: no label pairs");
  std::map<Label, double> row, col;
  double agree = 0.0;
  for (const auto& [a, b] : pairs) {
    row[a] += 1.0;
    col[b] += 1.0;
    if (a == b) agree += 1.0;
  }
  const auto n = static_cast<double>(pairs.size());
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, count] : row) {
    auto it = col.find(label);
    if (it != col.end()) p_e += (count / n) * (it->second / n);
  }
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
double cohen_kappa(const std::vector<std::pair<Label, Label>>& pairs) {
  return cohen_kappa(std::span<const std::pair<Label, Label>>(pairs));
}

/// Current label per annotator, per image.
using CurrentLabels = std::map<std::string, std::map<std::string, Category>>;

struct ConsensusCounts {
  std::size_t n_candidates = 0;
  std::size_t n_doubly_labeled = 0;
  std::size_t strict = 0;
  std::size_t loose = 0;

  friend bool operator==(const ConsensusCounts&, const ConsensusCounts&) = default;
};

struct ConsensusSets {
  ConsensusCounts counts;
  std::vector<std::string> strict_ids;
  std::vector<std::string> loose_ids;
  // (first annotator's label, second annotator's label), candidate order;
  // annotators ordered by id.
  std::vector<std::pair<Category, Category>> pairs;
};

/// Strict consensus: both annotators chose category 1. Loose: both chose 1
/// or 2. Items missing a label from either annotator count only toward
/// n_candidates.
inline ConsensusSets consensus_sets(std::span<const std::string> candidates, const CurrentLabels& labels) {
  if (labels.size() > 2) {
    throw UnsupportedConfiguration("consensus is defined for exactly two annotators, found " +
                                   std::to_string(labels.size()));
  }
  ConsensusSets out;
  out.counts.n_candidates = candidates.size();
  if (labels.size() < 2) return out;
  const auto& first = labels.begin()->second;
  const auto& second = std::next(labels.begin())->second;
  for (const auto& id : candidates) {
    auto a = first.find(id);
    auto b = second.find(id);
    if (a == first.end() || b == second.end()) continue;
    ++out.counts.n_doubly_labeled;
    out.pairs.emplace_back(a->second, b->second);
    const bool a_pos = a->second != Category::not_gan;
    const bool b_pos = b->second != Category::not_gan;
    if (a->second == Category::highly_likely_gan && b->second == Category::highly_likely_gan) {
      ++out.counts.strict;
      out.strict_ids.push_back(id);
    }
    if (a_pos && b_pos) {
      ++out.counts.loose;
      out.loose_ids.push_back(id);
    }
  }
  return out;
}

inline ConsensusCounts consensus_counts(std::span<const std::string> candidates, const CurrentLabels& labels) {
  return consensus_sets(candidates, labels).counts;
}

/// Tweets posted by the strict and loose consensus accounts, and by the
/// whole sample.
struct TweetTallies {
  std::uint64_t strict_tweets = 0;
  std::uint64_t loose_tweets = 0;
  std::uint64_t total = 0;
};

struct PrevalenceReport {
  std::uint64_t n_sample = 0;
  std::uint64_t strict_count = 0;
  std::uint64_t loose_count = 0;
  double lower_rate = 0.0;
  double upper_rate = 0.0;
  std::string lower_percent;
  std::string upper_percent;
  std::optional<double> kappa;
  std::optional<std::uint64_t> extrapolation_base;
  std::optional<std::uint64_t> extrapolated_low;
  std::optional<std::uint64_t> extrapolated_high;
  std::optional<double> tweet_lower_rate;
  std::optional<double> tweet_upper_rate;

  friend bool operator==(const PrevalenceReport&, const PrevalenceReport&) = default;
};

/// Renders count/n as a percentage with three decimals, rounding half away
/// from zero. Integer arithmetic throughout.
inline std::string render_percent(std::uint64_t count, std::uint64_t n) {
  if (n == 0) throw InvalidInput("render_percent: zero denominator");
  const unsigned __int128 num = static_cast<unsigned __int128>(count) * 200000u + n;
  const auto milli = static_cast<std::uint64_t>(num / (static_cast<unsigned __int128>(n) * 2u));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%llu.%03llu%%", static_cast<unsigned long long>(milli / 1000),
                static_cast<unsigned long long>(milli % 1000));
  return buf;
}

/// floor(count * base / n), exactly.
inline std::uint64_t extrapolate(std::uint64_t count, std::uint64_t base, std::uint64_t n) {
  if (n == 0) throw InvalidInput("extrapolate: zero denominator");
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(count) * base / n);
}

inline PrevalenceReport prevalence_report(const ConsensusCounts& counts, std::uint64_t n_sample,
                                          std::optional<double> kappa = std::nullopt,
                                          std::optional<std::uint64_t> extrapolation_base = std::nullopt,
                                          std::optional<TweetTallies> tweets = std::nullopt) {
  if (n_sample == 0) throw InvalidInput("prevalence_report: sample size must be positive");
  if (counts.strict > counts.loose) throw InvalidInput("prevalence_report: strict count exceeds loose count");
  if (counts.loose > n_sample) throw InvalidInput("prevalence_report: loose count exceeds sample size");
  PrevalenceReport r;
  r.n_sample = n_sample;
  r.strict_count = counts.strict;
  r.loose_count = counts.loose;
  r.lower_rate = static_cast<double>(counts.strict) / static_cast<double>(n_sample);
  r.upper_rate = static_cast<double>(counts.loose) / static_cast<double>(n_sample);
  r.lower_percent = render_percent(counts.strict, n_sample);
  r.upper_percent = render_percent(counts.loose, n_sample);
  r.kappa = kappa;
  if (extrapolation_base) {
    r.extrapolation_base = extrapolation_base;
    r.extrapolated_low = extrapolate(counts.strict, *extrapolation_base, n_sample);
    r.extrapolated_high = extrapolate(counts.loose, *extrapolation_base, n_sample);
  }
  if (tweets) {
    if (tweets->total == 0) throw InvalidInput("prevalence_report: total tweet count must be positive");
    r.tweet_lower_rate = static_cast<double>(tweets->strict_tweets) / static_cast<double>(tweets->total);
    r.tweet_upper_rate = static_cast<double>(tweets->loose_tweets) / static_cast<double>(tweets->total);
  }
  return r;
}

}  // namespace ganeye
