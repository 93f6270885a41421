#include "ganeye/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <charconv>

#include "ganeye/error.hpp"
#include "ganeye/image.hpp"
#include "ganeye/log.hpp"

namespace ganeye {

std::string url_encode_component(const std::string& s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

}  // namespace

AnnotationService::AnnotationService(LabelStore& store, ServiceOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  std::error_code ec;
  if (!std::filesystem::is_directory(options_.images_dir, ec)) {
    throw IoError("image directory " + options_.images_dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(options_.images_dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::ranges::sort(files);
  for (const auto& f : files) {
    files_by_name_.emplace(f.filename().string(), f);
    files_by_stem_.emplace(f.stem().string(), f);
  }
  if (options_.ui_dir && !server_->set_mount_point("/", options_.ui_dir->string())) {
    throw IoError("UI directory " + options_.ui_dir->string() + " does not exist");
  }
  install_routes();
}

AnnotationService::~AnnotationService() { stop(); }

std::optional<std::filesystem::path> AnnotationService::image_path(const std::string& image_id) const {
  if (auto it = files_by_name_.find(image_id); it != files_by_name_.end()) return it->second;
  if (auto it = files_by_stem_.find(image_id); it != files_by_stem_.end()) return it->second;
  return std::nullopt;
}

void AnnotationService::install_routes() {
  auto& srv = *server_;

  srv.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  srv.Get("/api/queue", [this](const httplib::Request& req, httplib::Response& res) {
    const auto annotator = req.get_param_value("annotator");
    if (annotator.empty()) return send_error(res, 400, "missing annotator parameter");
    std::size_t k = options_.default_batch;
    if (req.has_param("k")) {
      const auto s = req.get_param_value("k");
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
      if (ec != std::errc{} || ptr != s.data() + s.size()) return send_error(res, 400, "k must be a non-negative integer");
    }
    auto items = nlohmann::json::array();
    for (const auto& c : store_.next_candidates(annotator, k)) {
      items.push_back({{"image_id", c.image_id}, {"g", c.g}, {"image_url", "/api/image/" + url_encode_component(c.image_id)}});
    }
    send_json(res, 200, {{"candidates", items}});
  });

  srv.Post("/api/labels", [this](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    try {
      body = nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return send_error(res, 400, "body is not valid JSON");
    }
    if (!body.is_object() || !body.contains("annotator") || !body["annotator"].is_string() ||
        !body.contains("image_id") || !body["image_id"].is_string() || !body.contains("category")) {
      return send_error(res, 400, "expected {\"annotator\",\"image_id\",\"category\"}");
    }
    const auto& cat = body["category"];
    if (!cat.is_number_integer()) return send_error(res, 400, "category must be 1, 2 or 3");
    try {
      const auto revision = store_.submit_label(body["annotator"].get<std::string>(), body["image_id"].get<std::string>(),
                                                static_cast<int>(std::clamp<long long>(cat.get<long long>(), -1, 4)));
      send_json(res, 200, {{"revision", revision}});
    } catch (const NotFound& e) {
      send_error(res, 404, e.what());
    } catch (const InvalidInput& e) {
      send_error(res, 400, e.what());
    } catch (const IoError& e) {
      log::error("{}", e.what());
      send_error(res, 500, "label could not be stored");
    }
  });

  srv.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, to_json(store_.stats()));
  });

  srv.Get(R"(/api/image/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!store_.find(id)) return send_error(res, 404, "unknown image");
    const auto path = image_path(id);
    if (!path) return send_error(res, 404, "image file not found");
    std::vector<std::uint8_t> bytes;
    try {
      bytes = read_file_bytes(*path);
    } catch (const IoError& e) {
      return send_error(res, 404, e.what());
    }
    const auto type = sniff_media_type(std::span(bytes).first(std::min<std::size_t>(bytes.size(), 16)), *path);
    res.status = 200;
    res.set_content(std::string(bytes.begin(), bytes.end()), type);
  });

  srv.set_logger([](const httplib::Request& req, const httplib::Response& res) {
    log::debug("{} {} -> {}", req.method, req.path, res.status);
  });
}

int AnnotationService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p < 0) throw IoError("cannot bind " + host);
    return p;
  }
  if (!server_->bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationService::listen() { server_->listen_after_bind(); }

void AnnotationService::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

bool AnnotationService::running() const { return server_->is_running(); }

}  // namespace ganeye
