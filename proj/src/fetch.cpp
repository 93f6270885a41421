#include "ganeye/fetch.hpp"

#include <httplib.h>

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <thread>

#include "ganeye/error.hpp"
#include "ganeye/log.hpp"
#include "ganeye/parallel.hpp"
#include "cli/text_io.hpp"

namespace ganeye {

std::string_view status_name(FetchStatus s) {
  switch (s) {
    case FetchStatus::ok: return "ok";
    case FetchStatus::http_error: return "http-error";
    case FetchStatus::timeout: return "timeout";
    case FetchStatus::non_image: return "non-image";
  }
  return "?";
}

nlohmann::json to_json(const FetchLogEntry& e) {
  nlohmann::json j = {{"image_id", e.image_id}, {"status", status_name(e.status)}};
  if (e.http_status) j["http_status"] = *e.http_status;
  if (e.path) j["path"] = *e.path;
  if (e.media_type) j["media_type"] = *e.media_type;
  if (e.error) j["error"] = *e.error;
  j["attempts"] = e.attempts;
  return j;
}

std::vector<FetchManifestEntry> load_fetch_manifest(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  const auto id_col = table.column("image_id");
  const auto url_col = table.column("url");
  std::vector<FetchManifestEntry> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    FetchManifestEntry e{row[id_col], row[url_col]};
    const auto where = path.string() + ": row " + std::to_string(r + 2);
    if (e.image_id.empty() || e.image_id == "." || e.image_id == ".." ||
        e.image_id.find_first_of("/\\") != std::string::npos) {
      throw ParseError(where + ": image_id \"" + e.image_id + "\" is not a valid file name");
    }
    if (!seen.insert(e.image_id).second) throw ParseError(where + ": duplicate image_id \"" + e.image_id + "\"");
    out.push_back(std::move(e));
  }
  return out;
}

RateLimiter::RateLimiter(double per_second) {
  if (!(per_second > 0.0) || !std::isfinite(per_second)) throw InvalidInput("rate limit must be positive");
  using namespace std::chrono;
  // Small guard so that server-side arrival jitter cannot squeeze an extra
  // request into a one-second window.
  constexpr auto guard = milliseconds(20);
  if (per_second >= 1.0) {
    capacity_ = static_cast<std::size_t>(std::floor(per_second));
    window_ = duration_cast<steady_clock::duration>(seconds(1)) + guard;
  } else {
    capacity_ = 1;
    window_ = duration_cast<steady_clock::duration>(duration<double>(1.0 / per_second)) + guard;
  }
}

void RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    while (!starts_.empty() && now - starts_.front() >= window_) starts_.pop_front();
    if (starts_.size() < capacity_) {
      starts_.push_back(now);
      return;
    }
    const auto wake = starts_.front() + window_;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

namespace {

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // path and query
};

std::optional<ParsedUrl> parse_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/?#]+)([^#]*))", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(url, m, re)) return std::nullopt;
  ParsedUrl p{m[1].str(), m[2].str()};
  if (p.target.empty()) p.target = "/";
  return p;
}

bool retryable(int status) { return status == 429 || status >= 500; }

void store_bytes(const std::filesystem::path& dest, const std::string& body) {
  auto tmp = dest;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out.flush()) throw IoError("write failure on " + tmp.string());
  }
  std::filesystem::rename(tmp, dest);
}

FetchLogEntry fetch_one(const FetchManifestEntry& entry, const std::filesystem::path& out_dir,
                        const FetchOptions& options, RateLimiter& limiter) {
  FetchLogEntry log_entry;
  log_entry.image_id = entry.image_id;
  const auto url = parse_url(entry.url);
  if (!url) {
    log_entry.status = FetchStatus::http_error;
    log_entry.error = "unsupported URL";
    return log_entry;
  }
  const auto secs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout).count();
  for (unsigned attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options.backoff_base * (1u << std::min(attempt - 1, 16u)));
    limiter.acquire();
    ++log_entry.attempts;

    httplib::Client client(url->origin);
    client.set_follow_location(true);
    client.set_connection_timeout(secs / 1000000, secs % 1000000);
    client.set_read_timeout(secs / 1000000, secs % 1000000);
    auto res = client.Get(url->target);
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      log_entry.status = timed_out ? FetchStatus::timeout : FetchStatus::http_error;
      log_entry.error = httplib::to_string(err);
      log::debug("fetch {} attempt {}: {}", entry.image_id, attempt + 1, *log_entry.error);
      continue;
    }
    log_entry.error.reset();
    log_entry.http_status = res->status;
    if (res->status < 200 || res->status >= 300) {
      log_entry.status = FetchStatus::http_error;
      if (retryable(res->status)) continue;
      return log_entry;
    }
    const auto media = res->get_header_value("Content-Type");
    log_entry.media_type = media;
    if (media.rfind("image/", 0) != 0) {
      log_entry.status = FetchStatus::non_image;
      return log_entry;
    }
    store_bytes(out_dir / entry.image_id, res->body);
    log_entry.status = FetchStatus::ok;
    log_entry.path = (out_dir / entry.image_id).string();
    return log_entry;
  }
  return log_entry;
}

}  // namespace

std::vector<FetchLogEntry> fetch_images(const std::vector<FetchManifestEntry>& manifest,
                                        const std::filesystem::path& out_dir, const FetchOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  {
    const auto probe = out_dir / ".write-probe";
    std::ofstream p(probe);
    if (!p) throw IoError("output directory " + out_dir.string() + " is not writable");
    p.close();
    std::filesystem::remove(probe, ec);
  }
  RateLimiter limiter(options.rate_limit);
  std::vector<FetchLogEntry> log_entries(manifest.size());
  parallel_for(manifest.size(), std::max(1u, options.concurrency),
               [&](std::size_t i) { log_entries[i] = fetch_one(manifest[i], out_dir, options, limiter); });
  return log_entries;
}

}  // namespace ganeye
