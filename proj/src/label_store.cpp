#include "ganeye/label_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <mutex>
#include <random>

#include "cli/text_io.hpp"
#include "ganeye/agreement_io.hpp"
#include "ganeye/landmarks.hpp"
#include "ganeye/error.hpp"
#include "ganeye/log.hpp"

namespace ganeye {

std::string utc_now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto t = system_clock::to_time_t(now);
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

nlohmann::json to_json(const AnnotationLabel& l) {
  return {{"annotator", l.annotator}, {"image_id", l.image_id}, {"category", to_int(l.category)}, {"ts", l.ts}};
}

namespace {

AnnotationLabel label_from_json(const nlohmann::json& j) {
  AnnotationLabel l;
  l.annotator = j.at("annotator").get<std::string>();
  l.image_id = j.at("image_id").get<std::string>();
  const auto& c = j.at("category");
  if (!c.is_number_integer()) throw ParseError("category must be an integer");
  auto cat = category_from_int(c.get<long long>());
  if (!cat) throw ParseError("category out of range");
  l.category = *cat;
  l.ts = j.at("ts").get<std::string>();
  return l;
}

}  // namespace

nlohmann::json to_json(const AnnotationStats& s) {
  auto annotators = nlohmann::json::array();
  for (const auto& a : s.annotators) {
    annotators.push_back({{"annotator", a.annotator}, {"labeled", a.labeled}, {"remaining", a.remaining}});
  }
  nlohmann::json j = {{"revision", s.revision},
                      {"n_candidates", s.n_candidates},
                      {"annotators", annotators},
                      {"kappa", optional_json(s.kappa)},
                      {"kappa_available", s.kappa.has_value()},
                      {"consensus", s.consensus ? to_json(*s.consensus) : nlohmann::json(nullptr)},
                      {"prevalence", s.prevalence ? to_json(*s.prevalence) : nlohmann::json(nullptr)}};
  if (s.consensus_error) j["consensus_error"] = *s.consensus_error;
  return j;
}

AnnotationStats compute_annotation_stats(std::span<const std::string> candidate_ids, const CurrentLabels& labels,
                                         std::uint64_t revision, const StoreOptions& options) {
  AnnotationStats s;
  s.revision = revision;
  s.n_candidates = candidate_ids.size();
  for (const auto& [annotator, items] : labels) {
    s.annotators.push_back({annotator, items.size(), candidate_ids.size() - std::min(items.size(), candidate_ids.size())});
  }
  try {
    auto sets = consensus_sets(candidate_ids, labels);
    if (sets.pairs.size() >= 2) s.kappa = cohen_kappa(sets.pairs);
    s.consensus = sets.counts;
    const std::uint64_t n_sample = options.n_sample.value_or(candidate_ids.size());
    if (n_sample > 0) {
      s.prevalence = prevalence_report(sets.counts, n_sample, s.kappa, options.extrapolation_base);
    }
  } catch (const UnsupportedConfiguration& e) {
    s.consensus_error = e.what();
  }
  return s;
}

LabelStore::LabelStore(std::vector<Candidate> candidates, std::filesystem::path log_path, StoreOptions options)
    : order_(std::move(candidates)), log_path_(std::move(log_path)), options_(options) {
  std::ranges::sort(order_, [](const Candidate& a, const Candidate& b) {
    return a.g != b.g ? a.g < b.g : a.image_id < b.image_id;
  });
  if (options_.shuffle_seed) {
    std::mt19937_64 rng(*options_.shuffle_seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (!index_.emplace(order_[i].image_id, i).second) {
      throw InvalidInput("duplicate candidate image_id \"" + order_[i].image_id + "\"");
    }
    ids_.push_back(order_[i].image_id);
  }
  replay();
  if (options_.read_only) return;
  log_ = std::fopen(log_path_.c_str(), "ab");
  if (!log_) throw IoError("cannot open label log " + log_path_.string() + " for appending");
}

LabelStore::~LabelStore() {
  if (log_) std::fclose(log_);
}

void LabelStore::replay() {
  std::error_code ec;
  if (!std::filesystem::exists(log_path_, ec)) return;
  const std::string content = read_text_file(log_path_);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t skipped_unknown = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool complete = nl != std::string::npos;
    const std::string line = content.substr(pos, complete ? nl - pos : std::string::npos);
    ++line_no;
    if (!is_blank(line)) {
      AnnotationLabel label;
      try {
        label = label_from_json(nlohmann::json::parse(line));
      } catch (const std::exception& e) {
        if (!complete) {
          // Torn final write from a crash: drop it.
          log::warn("label log {}: discarding incomplete final line {}", log_path_.string(), line_no);
          if (!options_.read_only) std::filesystem::resize_file(log_path_, pos);
          break;
        }
        throw ParseError(log_path_.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
      history_.push_back(label);
      if (index_.contains(label.image_id)) {
        current_[label.annotator][label.image_id] = label.category;
      } else {
        ++skipped_unknown;
      }
      if (!complete && !options_.read_only) {
        std::FILE* f = std::fopen(log_path_.c_str(), "ab");
        if (!f || std::fputc('\n', f) == EOF || std::fclose(f) != 0) {
          throw IoError("cannot repair label log " + log_path_.string());
        }
      }
    }
    if (!complete) break;
    pos = nl + 1;
  }
  if (skipped_unknown > 0) {
    log::warn("label log {}: {} labels refer to images outside the candidate set", log_path_.string(),
              skipped_unknown);
  }
}

void LabelStore::append(const AnnotationLabel& label) {
  const std::string line = to_json(label).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0) {
    throw IoError("cannot append to label log " + log_path_.string());
  }
  if (options_.fsync && ::fsync(fileno(log_)) != 0) {
    throw IoError("fsync failed on label log " + log_path_.string());
  }
}

std::vector<Candidate> LabelStore::next_candidates(const std::string& annotator, std::size_t k) const {
  std::shared_lock lock(mu_);
  std::vector<Candidate> out;
  const auto it = current_.find(annotator);
  for (const auto& c : order_) {
    if (out.size() >= k) break;
    if (it != current_.end() && it->second.contains(c.image_id)) continue;
    out.push_back(c);
  }
  return out;
}

std::uint64_t LabelStore::submit_label(const std::string& annotator, const std::string& image_id, int category,
                                       std::optional<std::string> ts) {
  auto cat = category_from_int(category);
  if (!cat) throw InvalidInput("category must be 1, 2 or 3");
  if (annotator.empty()) throw InvalidInput("annotator id must be non-empty");
  std::unique_lock lock(mu_);
  if (!log_) throw IoError("label store is read-only");
  if (!index_.contains(image_id)) throw NotFound("unknown image \"" + image_id + "\"");
  AnnotationLabel label{annotator, image_id, *cat, ts ? *ts : utc_now_iso8601()};
  append(label);
  history_.push_back(label);
  current_[annotator][image_id] = *cat;
  return history_.size();
}

AnnotationStats LabelStore::stats() const {
  std::shared_lock lock(mu_);
  return compute_annotation_stats(ids_, current_, history_.size(), options_);
}

std::optional<Candidate> LabelStore::find(const std::string& image_id) const {
  auto it = index_.find(image_id);
  if (it == index_.end()) return std::nullopt;
  return order_[it->second];
}

std::uint64_t LabelStore::revision() const {
  std::shared_lock lock(mu_);
  return history_.size();
}

std::vector<AnnotationLabel> LabelStore::history() const {
  std::shared_lock lock(mu_);
  return history_;
}

CurrentLabels LabelStore::current_labels() const {
  std::shared_lock lock(mu_);
  return current_;
}

}  // namespace ganeye
