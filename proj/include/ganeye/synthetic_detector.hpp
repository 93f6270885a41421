#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ganeye/error.hpp"
#include "ganeye/geometry.hpp"
#include "ganeye/image.hpp"
#include "ganeye/landmarks.hpp"

namespace ganeye {

inline constexpr const char* kSyntheticDetectorTag = "synthetic";

/// Centroids of the 8-connected components whose pixels equal `color`
/// exactly, in raster order of each component's first pixel.
inline std::vector<PixelPoint> color_component_centroids(const RgbImage& img, Rgb color) {
  std::vector<PixelPoint> centroids;
  std::vector<bool> visited(static_cast<std::size_t>(img.width) * img.height, false);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto idx = static_cast<std::size_t>(y) * img.width + x;
      if (visited[idx] || img.at(x, y) != color) continue;
      double sx = 0.0, sy = 0.0;
      std::size_t n = 0;
      visited[idx] = true;
      stack.assign(1, {x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        sx += cx;
        sy += cy;
        ++n;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (nx < 0 || ny < 0 || nx >= img.width || ny >= img.height) continue;
            const auto nidx = static_cast<std::size_t>(ny) * img.width + nx;
            if (visited[nidx] || img.at(nx, ny) != color) continue;
            visited[nidx] = true;
            stack.emplace_back(nx, ny);
          }
        }
      }
      centroids.push_back({sx / static_cast<double>(n), sy / static_cast<double>(n)});
    }
  }
  return centroids;
}

/// Finds faces drawn as one pure-red and one pure-blue disk per face. Each
/// red marker is paired with its nearest blue marker; the member of the pair
/// with the smaller x becomes the left eye.
inline std::vector<FaceLandmarks> detect_synthetic(const RgbImage& img) {
  const auto reds = color_component_centroids(img, kMarkerRed);
  const auto blues = color_component_centroids(img, kMarkerBlue);
  if (reds.size() != blues.size()) {
    throw DetectionError("synthetic detector: " + std::to_string(reds.size()) + " red markers but " +
                         std::to_string(blues.size()) + " blue markers");
  }
  std::vector<bool> taken(blues.size(), false);
  std::vector<FaceLandmarks> faces;
  for (const auto& r : reds) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < blues.size(); ++b) {
      const double d = std::hypot(blues[b].x - r.x, blues[b].y - r.y);
      if (d < best_d) {
        best_d = d;
        best = b;
      }
    }
    if (taken[best]) throw DetectionError("synthetic detector: ambiguous marker pairing");
    taken[best] = true;
    const auto& b = blues[best];
    if (r.x <= b.x) {
      faces.push_back({{r}, {b}});
    } else {
      faces.push_back({{b}, {r}});
    }
  }
  return faces;
}

}  // namespace ganeye
