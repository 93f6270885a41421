#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "ganeye/label_store.hpp"

namespace httplib {
class Server;
}

namespace ganeye {

struct ServiceOptions {
  std::filesystem::path images_dir;
  std::optional<std::filesystem::path> ui_dir;
  std::size_t default_batch = 10;
};

/// HTTP front end of a LabelStore.
///
///   GET  /api/health                 {"status":"ok"}
///   GET  /api/queue?annotator=ID&k=N {"candidates":[{"image_id","g","image_url"}]}
///   POST /api/labels                 {"annotator","image_id","category"} -> {"revision":n}
///   GET  /api/stats                  annotation stats payload
///   GET  /api/image/{image_id}       image bytes with a sniffed media type
///
/// 400 for malformed requests or invalid categories, 404 for unknown images.
/// UI assets are served from ui_dir when one is configured.
class AnnotationService {
 public:
  AnnotationService(LabelStore& store, ServiceOptions options);
  ~AnnotationService();

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called. Requires a prior bind().
  void listen();
  void stop();
  bool running() const;

 private:
  void install_routes();
  std::optional<std::filesystem::path> image_path(const std::string& image_id) const;

  LabelStore& store_;
  ServiceOptions options_;
  std::map<std::string, std::filesystem::path> files_by_name_;
  std::map<std::string, std::filesystem::path> files_by_stem_;
  std::unique_ptr<httplib::Server> server_;
};

std::string url_encode_component(const std::string& s);

}  // namespace ganeye
