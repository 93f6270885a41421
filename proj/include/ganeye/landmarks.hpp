#pragma once

#include <cstddef>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ganeye/error.hpp"
#include "ganeye/geometry.hpp"
#include "ganeye/metric.hpp"

namespace ganeye {

struct FaceLandmarks {
  std::vector<PixelPoint> left_eye;
  std::vector<PixelPoint> right_eye;

  friend bool operator==(const FaceLandmarks&, const FaceLandmarks&) = default;
};

/// Detector output for one image. An empty face list means no face found.
struct LandmarkRecord {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<FaceLandmarks> faces;
  std::string detector;

  friend bool operator==(const LandmarkRecord&, const LandmarkRecord&) = default;
};

namespace detail {

inline nlohmann::json points_to_json(const std::vector<PixelPoint>& pts) {
  auto arr = nlohmann::json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

inline std::vector<PixelPoint> points_from_json(const nlohmann::json& j, std::string_view what) {
  if (!j.is_array() || j.empty()) {
    throw ParseError(std::string(what) + " must be a non-empty array of [x,y] points");
  }
  std::vector<PixelPoint> out;
  out.reserve(j.size());
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw ParseError(std::string(what) + " contains a malformed point");
    }
    PixelPoint pt{p[0].get<double>(), p[1].get<double>()};
    if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) {
      throw ParseError(std::string(what) + " contains a non-finite point");
    }
    out.push_back(pt);
  }
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

inline int positive_int(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_number_integer() || v.get<long long>() <= 0 ||
      v.get<long long>() > std::numeric_limits<int>::max()) {
    throw ParseError(std::string("\"") + key + "\" must be a positive integer");
  }
  return v.get<int>();
}

}  // namespace detail

inline nlohmann::json to_json(const LandmarkRecord& rec) {
  auto faces = nlohmann::json::array();
  for (const auto& f : rec.faces) {
    faces.push_back({{"left_eye", detail::points_to_json(f.left_eye)},
                     {"right_eye", detail::points_to_json(f.right_eye)}});
  }
  return {{"image_id", rec.image_id},
          {"width", rec.width},
          {"height", rec.height},
          {"detector", rec.detector},
          {"faces", std::move(faces)}};
}

inline std::string serialize_landmark_record(const LandmarkRecord& rec) {
  return to_json(rec).dump();
}

inline LandmarkRecord landmark_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("landmark record must be a JSON object");
  LandmarkRecord rec;
  const auto& id = detail::require(j, "image_id");
  if (!id.is_string()) throw ParseError("\"image_id\" must be a string");
  rec.image_id = id.get<std::string>();
  rec.width = detail::positive_int(j, "width");
  rec.height = detail::positive_int(j, "height");
  const auto& det = detail::require(j, "detector");
  if (!det.is_string()) throw ParseError("\"detector\" must be a string");
  rec.detector = det.get<std::string>();
  const auto& faces = detail::require(j, "faces");
  if (!faces.is_array()) throw ParseError("\"faces\" must be an array");
  for (const auto& f : faces) {
    if (!f.is_object()) throw ParseError("face entry must be an object");
    rec.faces.push_back({detail::points_from_json(detail::require(f, "left_eye"), "left_eye"),
                         detail::points_from_json(detail::require(f, "right_eye"), "right_eye")});
  }
  return rec;
}

/// Parses one landmark-record line. `line_no` only decorates error messages.
inline LandmarkRecord parse_landmark_record(std::string_view line, std::size_t line_no = 1) {
  try {
    return landmark_record_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

/// Reads a line-delimited landmark file. Blank lines are ignored; duplicate
/// image ids are reported together with every line they occur on.
inline std::vector<LandmarkRecord> load_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark file " + path.string());
  std::vector<LandmarkRecord> out;
  std::map<std::string, std::vector<std::size_t>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(parse_landmark_record(line, line_no));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
    seen[out.back().image_id].push_back(line_no);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  std::string dups;
  for (const auto& [id, lines] : seen) {
    if (lines.size() < 2) continue;
    dups += (dups.empty() ? "" : "; ") + id + " on lines";
    for (auto l : lines) dups += " " + std::to_string(l);
  }
  if (!dups.empty()) {
    throw ParseError(path.string() + ": duplicate image_id: " + dups);
  }
  return out;
}

struct DetectionSummary {
  double frac_with_faces = 0.0;
  double frac_exactly_one_among_detected = 0.0;
};

/// Fraction of images with any face, and among those the fraction with
/// exactly one. The second fraction is 0 when no image has a face.
inline DetectionSummary detection_summary(std::span<const LandmarkRecord> records) {
  if (records.empty()) throw InvalidInput("detection_summary: empty record list");
  std::size_t with = 0, one = 0;
  for (const auto& r : records) {
    if (!r.faces.empty()) ++with;
    if (r.faces.size() == 1) ++one;
  }
  DetectionSummary s;
  s.frac_with_faces = static_cast<double>(with) / static_cast<double>(records.size());
  s.frac_exactly_one_among_detected =
      with == 0 ? 0.0 : static_cast<double>(one) / static_cast<double>(with);
  return s;
}

/// Normalized eye centers of a single-face record; face count otherwise.
inline EyeObservation observe(const LandmarkRecord& rec) {
  EyeObservation obs;
  obs.n_faces = rec.faces.size();
  if (obs.n_faces == 1) {
    const auto& f = rec.faces.front();
    obs.eyes = EyePair{normalize_point(eye_center(f.left_eye), rec.width, rec.height),
                       normalize_point(eye_center(f.right_eye), rec.width, rec.height)};
  }
  return obs;
}

inline ScoreRecord score_record(const LandmarkRecord& rec, const EyeCalibration& cal) {
  auto obs = observe(rec);
  ScoreRecord s;
  s.image_id = rec.image_id;
  s.n_faces = obs.n_faces;
  s.g = gan_eye_distance(obs, cal);
  s.eyes = obs.eyes;
  return s;
}

}  // namespace ganeye
