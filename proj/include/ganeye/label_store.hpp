#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ganeye/agreement.hpp"
#include "ganeye/metric.hpp"

namespace ganeye {

struct Candidate {
  std::string image_id;
  double g = 1.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct AnnotationLabel {
  std::string annotator;
  std::string image_id;
  Category category = Category::not_gan;
  std::string ts;  // UTC, ISO 8601

  friend bool operator==(const AnnotationLabel&, const AnnotationLabel&) = default;
};

nlohmann::json to_json(const AnnotationLabel& l);

struct StoreOptions {
  std::optional<std::uint64_t> n_sample;  // defaults to the candidate count
  std::optional<std::uint64_t> extrapolation_base;
  std::optional<std::uint64_t> shuffle_seed;  // seeded presentation order
  bool fsync = false;                         // fsync after every append
  bool read_only = false;                     // replay only; never touch the log
};

struct AnnotatorProgress {
  std::string annotator;
  std::size_t labeled = 0;
  std::size_t remaining = 0;
};

struct AnnotationStats {
  std::uint64_t revision = 0;
  std::size_t n_candidates = 0;
  std::vector<AnnotatorProgress> annotators;
  std::optional<double> kappa;
  std::optional<ConsensusCounts> consensus;
  std::optional<std::string> consensus_error;
  std::optional<PrevalenceReport> prevalence;
};

nlohmann::json to_json(const AnnotationStats& s);

/// Recomputes the stats payload from a set of current labels. The store
/// uses this, and tests use it as the composition oracle.
AnnotationStats compute_annotation_stats(std::span<const std::string> candidate_ids, const CurrentLabels& labels,
                                         std::uint64_t revision, const StoreOptions& options);

/// Candidate set plus an append-only label log. Every accepted label is
/// appended to the log before it is acknowledged; opening a store replays the
/// log, so a restarted process sees exactly the acknowledged state.
class LabelStore {
 public:
  LabelStore(std::vector<Candidate> candidates, std::filesystem::path log_path, StoreOptions options = {});
  ~LabelStore();

  LabelStore(const LabelStore&) = delete;
  LabelStore& operator=(const LabelStore&) = delete;

  /// Up to k candidates the annotator has not labeled yet, in presentation
  /// order (ascending g unless a shuffle seed is set).
  std::vector<Candidate> next_candidates(const std::string& annotator, std::size_t k) const;

  /// Appends a label; returns the new revision (number of labels in history).
  std::uint64_t submit_label(const std::string& annotator, const std::string& image_id, int category,
                             std::optional<std::string> ts = std::nullopt);

  AnnotationStats stats() const;

  std::optional<Candidate> find(const std::string& image_id) const;
  std::uint64_t revision() const;
  std::vector<AnnotationLabel> history() const;
  CurrentLabels current_labels() const;
  const std::vector<Candidate>& candidates() const { return order_; }

 private:
  void replay();
  void append(const AnnotationLabel& label);

  std::vector<Candidate> order_;
  std::vector<std::string> ids_;  // candidate ids in presentation order
  std::unordered_map<std::string, std::size_t> index_;
  std::filesystem::path log_path_;
  StoreOptions options_;
  std::FILE* log_ = nullptr;

  mutable std::shared_mutex mu_;
  std::vector<AnnotationLabel> history_;
  CurrentLabels current_;
};

std::string utc_now_iso8601();

}  // namespace ganeye
