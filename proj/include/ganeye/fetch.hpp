#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ganeye {

struct FetchManifestEntry {
  std::string image_id;
  std::string url;
};

/// Reads a CSV manifest with header `image_id,url`. Ids must be unique and
/// usable as file names.
std::vector<FetchManifestEntry> load_fetch_manifest(const std::filesystem::path& path);

enum class FetchStatus { ok, http_error, timeout, non_image };

std::string_view status_name(FetchStatus s);

struct FetchLogEntry {
  std::string image_id;
  FetchStatus status = FetchStatus::ok;
  std::optional<int> http_status;
  std::optional<std::string> path;
  std::optional<std::string> media_type;
  std::optional<std::string> error;  // transport failure detail
  unsigned attempts = 0;
};

nlohmann::json to_json(const FetchLogEntry& e);

struct FetchOptions {
  double rate_limit = 1.0;  // requests per second, across all workers
  unsigned retries = 2;
  unsigned concurrency = 4;
  std::chrono::milliseconds timeout{std::chrono::seconds(10)};
  std::chrono::milliseconds backoff_base{500};  // doubled after each failed attempt
};

/// Sliding-window limiter: at most max(1, floor(rate)) request starts in any
/// window of 1 s (or one start per 1/rate s when rate < 1).
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::size_t capacity_;
  std::chrono::steady_clock::duration window_;
  std::deque<std::chrono::steady_clock::time_point> starts_;
};

/// Downloads every manifest entry into out_dir/<image_id>. Network and HTTP
/// failures become log entries; only an unusable out_dir is fatal. The
/// returned log follows manifest order.
std::vector<FetchLogEntry> fetch_images(const std::vector<FetchManifestEntry>& manifest,
                                        const std::filesystem::path& out_dir, const FetchOptions& options);

}  // namespace ganeye
