#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "ganeye/landmarks.hpp"

namespace ganeye {

inline constexpr const char* kTimeoutDetectorTag = "timeout";

struct ExternalDetectorOptions {
  std::vector<std::string> command;  // argv of the detector process
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};  // per image
};

struct ExternalDetection {
  std::vector<LandmarkRecord> records;  // one per input path, input order
  std::vector<std::string> warnings;
};

/// Drives a long-running detector process over a line protocol: one
/// absolute image path per line on its stdin, one landmark-record line per
/// path on its stdout, in order. An image that times out is recorded with no
/// faces (detector tag "timeout") and the process is restarted for the rest
/// of the batch. Malformed output, an image_id that does not echo the path,
/// or a nonzero exit status are hard errors (ProtocolError).
ExternalDetection run_external_detector(const ExternalDetectorOptions& options,
                                        const std::vector<std::filesystem::path>& image_paths);

}  // namespace ganeye
