#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ganeye/error.hpp"
#include "ganeye/geometry.hpp"

namespace ganeye {

inline constexpr double kDefaultThreshold = 0.02;
inline constexpr std::size_t kDefaultMinCalibrationCount = 10;

/// Expected eye locations of GAN-generated faces, averaged over a
/// reference corpus.
struct EyeCalibration {
  NormPoint left;
  NormPoint right;
  std::size_t n_images = 0;
  std::string source;

  friend bool operator==(const EyeCalibration&, const EyeCalibration&) = default;
};

/// What one image contributes to scoring: its face count and, when exactly
/// one face was found, the normalized eye centers of that face.
struct EyeObservation {
  std::size_t n_faces = 0;
  std::optional<EyePair> eyes;
};

struct ScoreRecord {
  std::string image_id;
  std::size_t n_faces = 0;
  std::optional<EyePair> eyes;  // present iff n_faces == 1
  double g = 1.0;

  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

/// GANEyeDistance. Mean Euclidean distance of the detected eyes from the
/// calibrated GAN eye locations, scaled into [0, 1] by the largest possible
/// sum of two distances in the unit square (2 * sqrt 2). Any face count other
/// than one scores 1.
inline double gan_eye_distance(std::size_t n_faces, const std::optional<EyePair>& eyes,
                               const EyeCalibration& cal) {
  if ((n_faces == 1) != eyes.has_value()) {
    throw ContractViolation(
        "gan_eye_distance: eyes must be present exactly when one face is detected");
  }
  if (n_faces != 1) {
    return 1.0;
  }
  if (!in_unit_square(eyes->left) || !in_unit_square(eyes->right) ||
      !in_unit_square(cal.left) || !in_unit_square(cal.right)) {
    throw InvalidInput("gan_eye_distance: coordinates must lie in the unit square");
  }
  const double sum = distance(eyes->left, cal.left) + distance(eyes->right, cal.right);
  return std::min(1.0, sum / (2.0 * std::numbers::sqrt2));
}

inline double gan_eye_distance(const EyeObservation& obs, const EyeCalibration& cal) {
  return gan_eye_distance(obs.n_faces, obs.eyes, cal);
}

struct CalibrationResult {
  EyeCalibration calibration;
  std::size_t skipped = 0;  // records with zero or several faces
};

/// Averages the normalized eye centers of every single-face observation.
/// Observations with any other face count are skipped and tallied.
inline CalibrationResult calibrate(std::span<const EyeObservation> records,
                                   std::size_t min_count = kDefaultMinCalibrationCount,
                                   std::string source = {}) {
  double lx = 0.0, ly = 0.0, rx = 0.0, ry = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  for (const auto& r : records) {
    if (r.n_faces != 1 || !r.eyes) {
      ++skipped;
      continue;
    }
    lx += r.eyes->left.x;
    ly += r.eyes->left.y;
    rx += r.eyes->right.x;
    ry += r.eyes->right.y;
    ++used;
  }
  if (used == 0 || used < min_count) {
    throw CalibrationError("calibrate: " + std::to_string(used) +
                           " usable single-face records, need at least " +
                           std::to_string(std::max<std::size_t>(min_count, 1)) + " (short by " +
                           std::to_string(std::max<std::size_t>(min_count, 1) - used) + ")");
  }
  const auto n = static_cast<double>(used);
  CalibrationResult out;
  out.calibration.left = {lx / n, ly / n};
  out.calibration.right = {rx / n, ry / n};
  out.calibration.n_images = used;
  out.calibration.source = std::move(source);
  out.skipped = skipped;
  return out;
}

inline void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidInput("threshold must lie in (0, 1]");
  }
}

/// Orders by ascending g, ties by image_id.
inline bool score_less(const ScoreRecord& a, const ScoreRecord& b) {
  if (a.g != b.g) return a.g < b.g;
  return a.image_id < b.image_id;
}

/// Records with g strictly below the threshold, ascending by g.
inline std::vector<ScoreRecord> filter_candidates(std::span<const ScoreRecord> scores,
                                                  double threshold = kDefaultThreshold) {
  check_threshold(threshold);
  std::vector<ScoreRecord> out;
  for (const auto& s : scores) {
    if (s.g < threshold) out.push_back(s);
  }
  std::ranges::sort(out, score_less);
  return out;
}

inline double recall_at(std::span<const ScoreRecord> scores, double threshold = kDefaultThreshold) {
  check_threshold(threshold);
  if (scores.empty()) {
    throw InvalidInput("recall_at: empty score list");
  }
  const auto hits = std::ranges::count_if(scores, [&](const auto& s) { return s.g < threshold; });
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace ganeye
