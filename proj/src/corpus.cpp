#include <algorithm>
#include <fstream>
#include <system_error>

#include "ganeye/parallel.hpp"
#include "ganeye/synth.hpp"

namespace ganeye::synth {

std::vector<ManifestEntry> generate_corpus(const SyntheticSpec& spec, const std::filesystem::path& out_dir,
                                           unsigned jobs) {
  validate(spec);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir.string() + ": " + ec.message());

  struct Job {
    ImageClass cls;
    std::size_t index;
    std::string id;
  };
  std::vector<Job> work;
  for (auto cls : kAllClasses) {
    for (std::size_t i = 0; i < spec.count(cls); ++i) work.push_back({cls, i, image_id(cls, i)});
  }
  std::ranges::sort(work, {}, &Job::id);

  std::vector<ManifestEntry> manifest(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t k) {
    const auto& job = work[k];
    try {
      auto rng = image_rng(spec.seed, job.cls, job.index);
      auto img = generate_image(job.cls, spec, rng);
      const std::string file = job.id + ".png";
      write_png(out_dir / file, img.image);
      manifest[k] = {job.id, job.cls, file, std::move(img.eyes)};
    } catch (const IoError& e) {
      throw IoError("image " + job.id + ": " + e.what());
    } catch (const Error& e) {
      throw InvalidInput("image " + job.id + ": " + e.what());
    }
  });

  const auto manifest_path = out_dir / kManifestName;
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + manifest_path.string());
  for (const auto& e : manifest) out << to_json(e).dump() << '\n';
  if (!out.flush()) throw IoError("write failure on " + manifest_path.string());
  return manifest;
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(manifest_entry_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ganeye::synth
