#pragma once

#include <algorithm>
#include <cmath>
#include <ranges>

#include "ganeye/error.hpp"

namespace ganeye {

/// Pixel coordinate, origin at the top-left corner, y growing downward.
/// Components may be fractional (centroids of landmark points).
struct PixelPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Coordinate divided by image width (x) and height (y); always inside the
/// closed unit square.
struct NormPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const NormPoint&, const NormPoint&) = default;
};

struct EyePair {
  NormPoint left;
  NormPoint right;

  friend bool operator==(const EyePair&, const EyePair&) = default;
};

inline bool in_unit_square(const NormPoint& p) {
  return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

inline double distance(const NormPoint& a, const NormPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Center of one eye: the arithmetic mean of its landmark points.
template <std::ranges::input_range R>
  requires std::same_as<std::ranges::range_value_t<R>, PixelPoint>
PixelPoint eye_center(const R& points) {
  double sx = 0.0;
  double sy = 0.0;
  std::size_t n = 0;
  for (const PixelPoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidInput("eye_center: non-finite landmark point");
    }
    sx += p.x;
    sy += p.y;
    ++n;
  }
  if (n == 0) {
    throw InvalidInput("eye_center: empty landmark list");
  }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

/// Divides by the image dimensions, then clamps each component to [0, 1]
/// (detectors occasionally report landmarks just outside the frame).
inline NormPoint normalize_point(const PixelPoint& p, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw InvalidInput("normalize_point: image dimensions must be positive");
  }
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw InvalidInput("normalize_point: non-finite point");
  }
  return {std::clamp(p.x / width, 0.0, 1.0), std::clamp(p.y / height, 0.0, 1.0)};
}

}  // namespace ganeye
