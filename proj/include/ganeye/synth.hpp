#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ganeye/error.hpp"
#include "ganeye/geometry.hpp"
#include "ganeye/image.hpp"

// Synthetic profile pictures: flat backgrounds with eyes drawn as a pure-red
// disk and a pure-blue disk per face. "gan_like" images put the eyes near
// fixed canonical points, "human_like" images scatter them.

namespace ganeye::synth {

enum class ImageClass { gan_like, human_like, no_face, multi_face };

inline constexpr std::array<ImageClass, 4> kAllClasses{ImageClass::gan_like, ImageClass::human_like,
                                                        ImageClass::no_face, ImageClass::multi_face};

inline std::string_view class_name(ImageClass c) {
  switch (c) {
    case ImageClass::gan_like: return "gan_like";
    case ImageClass::human_like: return "human_like";
    case ImageClass::no_face: return "no_face";
    case ImageClass::multi_face: return "multi_face";
  }
  return "?";
}

inline std::optional<ImageClass> class_from_name(std::string_view name) {
  for (auto c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

struct SyntheticSpec {
  int image_size = 256;
  NormPoint canonical_left{0.38, 0.45};
  NormPoint canonical_right{0.62, 0.45};
  double jitter_sigma = 0.002;
  std::map<ImageClass, std::size_t> counts;
  std::uint64_t seed = 0;
  int eye_radius = 5;

  std::size_t count(ImageClass c) const {
    auto it = counts.find(c);
    return it == counts.end() ? 0 : it->second;
  }
};

inline void validate(const SyntheticSpec& s) {
  if (s.image_size < 32) throw InvalidInput("synthetic spec: image_size must be at least 32");
  if (s.eye_radius < 3) throw InvalidInput("synthetic spec: eye_radius must be at least 3");
  if (!(s.jitter_sigma >= 0.0) || !std::isfinite(s.jitter_sigma)) {
    throw InvalidInput("synthetic spec: jitter_sigma must be non-negative");
  }
  if (!in_unit_square(s.canonical_left) || !in_unit_square(s.canonical_right)) {
    throw InvalidInput("synthetic spec: canonical eye points must lie in the unit square");
  }
}

inline nlohmann::json to_json(const SyntheticSpec& s) {
  nlohmann::json counts = nlohmann::json::object();
  for (auto c : kAllClasses) counts[std::string(class_name(c))] = s.count(c);
  return {{"image_size", s.image_size},
          {"canonical_left", {s.canonical_left.x, s.canonical_left.y}},
          {"canonical_right", {s.canonical_right.x, s.canonical_right.y}},
          {"jitter_sigma", s.jitter_sigma},
          {"counts", counts},
          {"seed", s.seed},
          {"eye_radius", s.eye_radius}};
}

/// Missing fields keep their defaults; unknown class names are rejected.
inline SyntheticSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("synthetic spec must be a JSON object");
  SyntheticSpec s;
  try {
    if (j.contains("image_size")) s.image_size = j.at("image_size").get<int>();
    if (j.contains("eye_radius")) s.eye_radius = j.at("eye_radius").get<int>();
    if (j.contains("jitter_sigma")) s.jitter_sigma = j.at("jitter_sigma").get<double>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    auto point = [](const nlohmann::json& p) {
      if (!p.is_array() || p.size() != 2) throw ParseError("canonical point must be an [x,y] pair");
      return NormPoint{p[0].get<double>(), p[1].get<double>()};
    };
    if (j.contains("canonical_left")) s.canonical_left = point(j.at("canonical_left"));
    if (j.contains("canonical_right")) s.canonical_right = point(j.at("canonical_right"));
    if (j.contains("counts")) {
      for (const auto& [name, value] : j.at("counts").items()) {
        auto c = class_from_name(name);
        if (!c) throw ParseError("unknown image class \"" + name + "\"");
        s.counts[*c] = value.get<std::size_t>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("synthetic spec: ") + e.what());
  }
  validate(s);
  return s;
}

struct SyntheticImage {
  RgbImage image;
  std::vector<PixelPoint> eyes;  // per planted face: red center, blue center
};

namespace detail {

inline void draw_disk(RgbImage& img, PixelPoint c, int r, Rgb color) {
  const int x0 = static_cast<int>(std::floor(c.x - r)), x1 = static_cast<int>(std::ceil(c.x + r));
  const int y0 = static_cast<int>(std::floor(c.y - r)), y1 = static_cast<int>(std::ceil(c.y + r));
  const double r2 = static_cast<double>(r) * r;
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) {
      const double dx = x - c.x, dy = y - c.y;
      if (dx * dx + dy * dy <= r2) img.set(x, y, color);
    }
  }
}

inline bool inside_frame(PixelPoint c, int r, int size) {
  return c.x - r >= 0.0 && c.y - r >= 0.0 && c.x + r <= size - 1.0 && c.y + r <= size - 1.0;
}

/// Markers fit, do not touch, and each red marker's nearest blue marker is
/// its own partner.
inline bool layout_ok(const std::vector<PixelPoint>& eyes, int r, int size) {
  for (const auto& e : eyes) {
    if (!inside_frame(e, r, size)) return false;
  }
  for (std::size_t i = 0; i < eyes.size(); ++i) {
    for (std::size_t j = i + 1; j < eyes.size(); ++j) {
      if (std::hypot(eyes[i].x - eyes[j].x, eyes[i].y - eyes[j].y) <= 2.0 * r + 2.0) return false;
    }
  }
  for (std::size_t f = 0; f < eyes.size(); f += 2) {
    const auto& red = eyes[f];
    const double own = std::hypot(red.x - eyes[f + 1].x, red.y - eyes[f + 1].y);
    for (std::size_t g = 1; g < eyes.size(); g += 2) {
      if (g == f + 1) continue;
      if (std::hypot(red.x - eyes[g].x, red.y - eyes[g].y) <= own) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Draws one image of class `cls`. Layouts that leave the frame, touch, or
/// pair ambiguously are re-sampled up to 100 times.
template <typename Rng>
SyntheticImage generate_image(ImageClass cls, const SyntheticSpec& spec, Rng& rng) {
  validate(spec);
  const double size = spec.image_size;
  std::uniform_int_distribution<int> channel(32, 223);
  const Rgb background{static_cast<std::uint8_t>(channel(rng)), static_cast<std::uint8_t>(channel(rng)),
                       static_cast<std::uint8_t>(channel(rng))};
  SyntheticImage out{RgbImage(spec.image_size, spec.image_size, background), {}};
  if (cls == ImageClass::no_face) return out;

  std::normal_distribution<double> jitter(0.0, spec.jitter_sigma > 0.0 ? spec.jitter_sigma : 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto to_px = [&](double nx, double ny) { return PixelPoint{nx * size, ny * size}; };
  auto scattered_pair = [&](double y_lo, double y_hi) {
    const double mx = 0.1 + 0.8 * unit(rng);
    const double my = y_lo + (y_hi - y_lo) * unit(rng);
    const double spacing = 0.15 + 0.30 * unit(rng);
    return std::array{to_px(mx - spacing / 2, my), to_px(mx + spacing / 2, my)};
  };

  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<PixelPoint> eyes;
    switch (cls) {
      case ImageClass::gan_like: {
        double dlx = 0, dly = 0, drx = 0, dry = 0;
        if (spec.jitter_sigma > 0.0) {
          dlx = jitter(rng);
          dly = jitter(rng);
          drx = jitter(rng);
          dry = jitter(rng);
        }
        eyes = {to_px(spec.canonical_left.x + dlx, spec.canonical_left.y + dly),
                to_px(spec.canonical_right.x + drx, spec.canonical_right.y + dry)};
        break;
      }
      case ImageClass::human_like: {
        auto p = scattered_pair(0.1, 0.9);
        eyes = {p[0], p[1]};
        break;
      }
      case ImageClass::multi_face: {
        auto top = scattered_pair(0.1, 0.4);
        auto bottom = scattered_pair(0.6, 0.9);
        eyes = {top[0], top[1], bottom[0], bottom[1]};
        break;
      }
      case ImageClass::no_face: break;
    }
    if (!detail::layout_ok(eyes, spec.eye_radius, spec.image_size)) continue;
    for (std::size_t i = 0; i < eyes.size(); ++i) {
      detail::draw_disk(out.image, eyes[i], spec.eye_radius, i % 2 == 0 ? kMarkerRed : kMarkerBlue);
    }
    out.eyes = std::move(eyes);
    return out;
  }
  throw InvalidInput("synthetic generator: no valid " + std::string(class_name(cls)) +
                     " marker layout after 100 attempts");
}

/// Per-image generator state, independent of generation order.
inline std::mt19937_64 image_rng(std::uint64_t seed, ImageClass cls, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cls), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
  return std::mt19937_64(seq);
}

inline std::string image_id(ImageClass cls, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", index);
  return std::string(class_name(cls)) + buf;
}

struct ManifestEntry {
  std::string image_id;
  ImageClass cls = ImageClass::no_face;
  std::string path;  // relative to the corpus directory
  std::vector<PixelPoint> eyes;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline nlohmann::json to_json(const ManifestEntry& e) {
  auto eyes = nlohmann::json::array();
  for (const auto& p : e.eyes) eyes.push_back({p.x, p.y});
  return {{"image_id", e.image_id}, {"class", class_name(e.cls)}, {"path", e.path}, {"eyes", eyes}};
}

inline ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  try {
    ManifestEntry e;
    e.image_id = j.at("image_id").get<std::string>();
    auto cls = class_from_name(j.at("class").get<std::string>());
    if (!cls) throw ParseError("unknown class in manifest");
    e.cls = *cls;
    e.path = j.at("path").get<std::string>();
    for (const auto& p : j.at("eyes")) e.eyes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("manifest entry: ") + ex.what());
  }
}

inline constexpr const char* kManifestName = "manifest.jsonl";

/// Writes counts[c] PNG images per class plus `manifest.jsonl` into out_dir.
/// Output depends only on the spec. `jobs` > 1 generates in parallel.
std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir,
                                           unsigned jobs = 1);

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

}  // namespace ganeye::synth
