#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ganeye/error.hpp"
#include "ganeye/landmarks.hpp"
#include "ganeye/metric.hpp"

// JSON forms of calibration files and score-record lines. Doubles are
// emitted in shortest round-trip form, so parsing restores them bit-exactly.

namespace ganeye {

namespace detail {

inline nlohmann::json point_json(const NormPoint& p) { return nlohmann::json::array({p.x, p.y}); }

inline NormPoint norm_point_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(std::string("\"") + what + "\" must be an [x,y] pair");
  }
  NormPoint p{j[0].get<double>(), j[1].get<double>()};
  if (!in_unit_square(p)) {
    throw ParseError(std::string("\"") + what + "\" lies outside the unit square");
  }
  return p;
}

}  // namespace detail

inline nlohmann::json to_json(const EyeCalibration& c) {
  return {{"left", detail::point_json(c.left)},
          {"right", detail::point_json(c.right)},
          {"n_images", c.n_images},
          {"source", c.source}};
}

inline EyeCalibration calibration_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("calibration must be a JSON object");
  EyeCalibration c;
  c.left = detail::norm_point_from_json(detail::require(j, "left"), "left");
  c.right = detail::norm_point_from_json(detail::require(j, "right"), "right");
  const auto& n = detail::require(j, "n_images");
  if (!n.is_number_unsigned() && !(n.is_number_integer() && n.get<long long>() >= 0)) {
    throw ParseError("\"n_images\" must be a non-negative integer");
  }
  c.n_images = n.get<std::size_t>();
  const auto& src = detail::require(j, "source");
  if (!src.is_string()) throw ParseError("\"source\" must be a string");
  c.source = src.get<std::string>();
  return c;
}

inline EyeCalibration load_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file " + path.string());
  try {
    return calibration_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

inline nlohmann::json to_json(const ScoreRecord& s) {
  nlohmann::json j = {{"image_id", s.image_id}, {"n_faces", s.n_faces}, {"g", s.g}};
  j["left"] = s.eyes ? detail::point_json(s.eyes->left) : nlohmann::json(nullptr);
  j["right"] = s.eyes ? detail::point_json(s.eyes->right) : nlohmann::json(nullptr);
  return j;
}

inline std::string serialize_score_record(const ScoreRecord& s) { return to_json(s).dump(); }

inline ScoreRecord score_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("score record must be a JSON object");
  ScoreRecord s;
  const auto& id = detail::require(j, "image_id");
  if (!id.is_string()) throw ParseError("\"image_id\" must be a string");
  s.image_id = id.get<std::string>();
  const auto& n = detail::require(j, "n_faces");
  if (!n.is_number_integer() || n.get<long long>() < 0) {
    throw ParseError("\"n_faces\" must be a non-negative integer");
  }
  s.n_faces = n.get<std::size_t>();
  const auto& g = detail::require(j, "g");
  if (!g.is_number()) throw ParseError("\"g\" must be a number");
  s.g = g.get<double>();
  if (!(s.g >= 0.0 && s.g <= 1.0)) throw ParseError("\"g\" must lie in [0, 1]");
  const auto& l = detail::require(j, "left");
  const auto& r = detail::require(j, "right");
  if (l.is_null() != r.is_null()) throw ParseError("\"left\" and \"right\" must both be null or set");
  if (!l.is_null()) {
    s.eyes = EyePair{detail::norm_point_from_json(l, "left"), detail::norm_point_from_json(r, "right")};
  }
  if ((s.n_faces == 1) != s.eyes.has_value()) {
    throw ParseError("eyes must be present exactly when n_faces is 1");
  }
  if (s.n_faces != 1 && s.g != 1.0) throw ParseError("g must be 1 when n_faces is not 1");
  return s;
}

inline ScoreRecord parse_score_record(std::string_view line, std::size_t line_no = 1) {
  try {
    return score_record_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

inline std::vector<ScoreRecord> load_score_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score file " + path.string());
  std::vector<ScoreRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(parse_score_record(line, line_no));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

}  // namespace ganeye
