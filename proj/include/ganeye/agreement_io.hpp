#pragma once

#include <json.hpp>

#include "ganeye/agreement.hpp"

namespace ganeye {

inline nlohmann::json to_json(const ConsensusCounts& c) {
  return {{"n_candidates", c.n_candidates},
          {"n_doubly_labeled", c.n_doubly_labeled},
          {"strict", c.strict},
          {"loose", c.loose}};
}

inline ConsensusCounts consensus_counts_from_json(const nlohmann::json& j) {
  ConsensusCounts c;
  try {
    c.strict = j.at("strict").get<std::size_t>();
    c.loose = j.at("loose").get<std::size_t>();
    c.n_candidates = j.value("n_candidates", c.loose);
    c.n_doubly_labeled = j.value("n_doubly_labeled", c.loose);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("consensus counts: ") + e.what());
  }
  if (c.strict > c.loose || c.loose > c.n_doubly_labeled || c.n_doubly_labeled > c.n_candidates) {
    throw InvalidInput("consensus counts must satisfy strict <= loose <= n_doubly_labeled <= n_candidates");
  }
  return c;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const PrevalenceReport& r) {
  return {{"n_sample", r.n_sample},
          {"strict_count", r.strict_count},
          {"loose_count", r.loose_count},
          {"lower_rate", r.lower_rate},
          {"upper_rate", r.upper_rate},
          {"lower_percent", r.lower_percent},
          {"upper_percent", r.upper_percent},
          {"kappa", optional_json(r.kappa)},
          {"extrapolation_base", optional_json(r.extrapolation_base)},
          {"extrapolated_low", optional_json(r.extrapolated_low)},
          {"extrapolated_high", optional_json(r.extrapolated_high)},
          {"tweet_lower_rate", optional_json(r.tweet_lower_rate)},
          {"tweet_upper_rate", optional_json(r.tweet_upper_rate)}};
}

}  // namespace ganeye
