#include "cli/commands.hpp"

#include <signal.h>

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "cli/text_io.hpp"
#include "ganeye/agreement.hpp"
#include "ganeye/agreement_io.hpp"
#include "ganeye/error.hpp"
#include "ganeye/external_detector.hpp"
#include "ganeye/fetch.hpp"
#include "ganeye/image.hpp"
#include "ganeye/label_store.hpp"
#include "ganeye/landmarks.hpp"
#include "ganeye/log.hpp"
#include "ganeye/metric.hpp"
#include "ganeye/metric_io.hpp"
#include "ganeye/parallel.hpp"
#include "ganeye/service.hpp"
#include "ganeye/stats.hpp"
#include "ganeye/synth.hpp"
#include "ganeye/synthetic_detector.hpp"

namespace fs = std::filesystem;

namespace ganeye::cli {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ProtocolError*>(&e) ||
      dynamic_cast<const SpawnError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return 2;
  }
  return 1;
}

namespace {

/// Destination of a data stream: a file written via temp-and-rename, or
/// stdout in streaming mode.
class Output {
 public:
  Output(const std::string& path, bool to_stdout) : to_stdout_(to_stdout) {
    if (to_stdout_) return;
    path_ = path;
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    tmp_ = path_;
    tmp_ += ".tmp";
    file_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!file_) throw IoError("cannot write " + tmp_.string());
  }

  ~Output() {
    if (!committed_ && !to_stdout_) {
      file_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return to_stdout_ ? std::cout : static_cast<std::ostream&>(file_); }

  void commit() {
    if (to_stdout_) {
      std::cout.flush();
      return;
    }
    file_.flush();
    if (!file_) throw IoError("write failure on " + tmp_.string());
    file_.close();
    fs::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  bool to_stdout_;
  fs::path path_, tmp_;
  std::ofstream file_;
  bool committed_ = false;
};

void require_destination(const std::string& out, bool to_stdout) {
  if (out.empty() == !to_stdout) throw InvalidInput("give exactly one of --out or --stdout");
}

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".gif" || ext == ".webp" || ext == ".bmp";
}

/// Image id of a file: its stem for common image extensions, else its name.
std::string image_id_for(const fs::path& p) {
  return has_image_extension(p) ? p.stem().string() : p.filename().string();
}

std::vector<fs::path> list_images(const fs::path& dir) {
  static const std::unordered_set<std::string> skip{".jsonl", ".json", ".csv", ".log", ".part", ".tmp", ".txt"};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.empty() || name[0] == '.' || skip.contains(entry.path().extension().string())) continue;
    out.push_back(entry.path());
  }
  std::ranges::sort(out);
  std::unordered_set<std::string> ids;
  for (const auto& p : out) {
    if (!ids.insert(image_id_for(p)).second) {
      throw InvalidInput("two files in " + dir.string() + " map to image id \"" + image_id_for(p) + "\"");
    }
  }
  return out;
}

void write_json_file(const std::string& path, const nlohmann::json& j) { write_text_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec, out;
  unsigned jobs = 1;
};

void cmd_synth(const SynthArgs& a) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(a.spec));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(a.spec + ": " + e.what());
  }
  const auto spec = synth::spec_from_json(j);
  const auto manifest = synth::generate_corpus(spec, a.out, a.jobs);
  log::info("synth: wrote {} images and {} to {}", manifest.size(), synth::kManifestName, a.out);
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  std::string provider, command, images, landmarks, out;
  double timeout = 30.0;
  unsigned jobs = 1;
};

LandmarkRecord detect_synthetic_file(const fs::path& path) {
  const auto id = image_id_for(path);
  try {
    const auto img = read_png(path);
    return {id, img.width, img.height, detect_synthetic(img), kSyntheticDetectorTag};
  } catch (const DecodeError& e) {
    log::warn("detect: {}: undecodable image, recorded as no face ({})", path.string(), e.what());
    return {id, 1, 1, {}, "decode-error"};
  } catch (const DetectionError& e) {
    log::warn("detect: {}: {}; recorded as no face", path.string(), e.what());
    return {id, 1, 1, {}, "detection-error"};
  }
}

void cmd_detect(const DetectArgs& a) {
  std::vector<LandmarkRecord> records;
  if (a.provider == "file") {
    if (a.landmarks.empty()) throw InvalidInput("detect --provider file needs --landmarks");
    records = load_landmark_file(a.landmarks);
  } else {
    if (a.images.empty()) throw InvalidInput("detect --provider " + a.provider + " needs --images");
    const auto paths = list_images(a.images);
    if (a.provider == "synthetic") {
      records.resize(paths.size());
      parallel_for(paths.size(), a.jobs, [&](std::size_t i) { records[i] = detect_synthetic_file(paths[i]); });
    } else {
      if (a.command.empty()) throw InvalidInput("detect --provider exec needs --command");
      ExternalDetectorOptions opts;
      opts.command = {"/bin/sh", "-c", a.command};
      opts.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000.0));
      auto result = run_external_detector(opts, paths);
      records = std::move(result.records);
      for (std::size_t i = 0; i < records.size(); ++i) records[i].image_id = image_id_for(paths[i]);
    }
  }
  Output out(a.out, false);
  for (const auto& r : records) out.stream() << serialize_landmark_record(r) << '\n';
  out.commit();
  if (!records.empty()) {
    const auto s = detection_summary(records);
    log::info("detect: {} images, {:.4f} with faces, {:.4f} of those with exactly one", records.size(),
              s.frac_with_faces, s.frac_exactly_one_among_detected);
  }
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string landmarks, out, source;
  std::size_t min_count = kDefaultMinCalibrationCount;
};

void cmd_calibrate(const CalibrateArgs& a) {
  const auto records = load_landmark_file(a.landmarks);
  std::vector<EyeObservation> obs;
  obs.reserve(records.size());
  for (const auto& r : records) obs.push_back(observe(r));
  const auto source = a.source.empty() ? fs::path(a.landmarks).filename().string() : a.source;
  const auto result = calibrate(obs, a.min_count, source);
  if (result.skipped > 0) {
    log::warn("calibrate: skipped {} records without exactly one face", result.skipped);
  }
  write_json_file(a.out, to_json(result.calibration));
  log::info("calibrate: {} images, left ({:.6f}, {:.6f}), right ({:.6f}, {:.6f})", result.calibration.n_images,
            result.calibration.left.x, result.calibration.left.y, result.calibration.right.x,
            result.calibration.right.y);
}

// ---------------------------------------------------------------- score / filter

struct ScoreArgs {
  std::string landmarks, calibration, out;
  bool to_stdout = false;
  bool filter = false;
  double threshold = kDefaultThreshold;
  unsigned jobs = 1;
};

/// Calls fn(line_no, line) for each non-blank line.
template <typename Fn>
void for_each_line(const fs::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!is_blank(line)) fn(line_no, line);
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
}

void write_candidates(std::ostream& os, std::vector<ScoreRecord>& candidates) {
  std::ranges::sort(candidates, score_less);
  for (const auto& c : candidates) os << serialize_score_record(c) << '\n';
}

void cmd_score(const ScoreArgs& a) {
  require_destination(a.out, a.to_stdout);
  check_threshold(a.threshold);
  const auto cal = load_calibration(a.calibration);
  Output out(a.out, a.to_stdout);
  std::vector<ScoreRecord> candidates;
  std::unordered_set<std::string> ids;

  // Fixed-size chunks keep memory bounded while scoring in parallel; output
  // keeps input order.
  constexpr std::size_t kChunk = 4096;
  std::vector<std::pair<std::size_t, std::string>> chunk;
  std::vector<ScoreRecord> scored;
  std::size_t total = 0;
  auto flush = [&] {
    scored.assign(chunk.size(), {});
    parallel_for(chunk.size(), a.jobs, [&](std::size_t i) {
      const auto& [line_no, line] = chunk[i];
      LandmarkRecord rec;
      try {
        rec = parse_landmark_record(line, line_no);
      } catch (const ParseError& e) {
        throw ParseError(a.landmarks + ": " + e.what());
      }
      scored[i] = score_record(rec, cal);
    });
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (!ids.insert(scored[i].image_id).second) {
        throw ParseError(a.landmarks + ": line " + std::to_string(chunk[i].first) + ": duplicate image_id \"" +
                         scored[i].image_id + "\"");
      }
      if (a.filter) {
        if (scored[i].g < a.threshold) candidates.push_back(std::move(scored[i]));
      } else {
        out.stream() << serialize_score_record(scored[i]) << '\n';
      }
    }
    total += chunk.size();
    chunk.clear();
  };
  for_each_line(a.landmarks, [&](std::size_t line_no, const std::string& line) {
    chunk.emplace_back(line_no, line);
    if (chunk.size() == kChunk) flush();
  });
  flush();
  if (a.filter) write_candidates(out.stream(), candidates);
  out.commit();
  log::info("score: {} records scored{}", total,
            a.filter ? ", " + std::to_string(candidates.size()) + " below threshold" : std::string{});
}

struct FilterArgs {
  std::string scores, out;
  bool to_stdout = false;
  double threshold = kDefaultThreshold;
};

void cmd_filter(const FilterArgs& a) {
  require_destination(a.out, a.to_stdout);
  check_threshold(a.threshold);
  Output out(a.out, a.to_stdout);
  std::vector<ScoreRecord> candidates;
  std::size_t total = 0;
  for_each_line(a.scores, [&](std::size_t line_no, const std::string& line) {
    ScoreRecord s;
    try {
      s = parse_score_record(line, line_no);
    } catch (const ParseError& e) {
      throw ParseError(a.scores + ": " + e.what());
    }
    ++total;
    if (s.g < a.threshold) candidates.push_back(std::move(s));
  });
  write_candidates(out.stream(), candidates);
  out.commit();
  log::info("filter: {} of {} records below {}", candidates.size(), total, a.threshold);
}

// ---------------------------------------------------------------- fetch

struct FetchArgs {
  std::string manifest, out, log_path;
  double rate = 1.0;
  unsigned retries = 2;
  unsigned jobs = 4;
  double timeout = 10.0;
};

void cmd_fetch(const FetchArgs& a) {
  const auto manifest = load_fetch_manifest(a.manifest);
  FetchOptions opts;
  opts.rate_limit = a.rate;
  opts.retries = a.retries;
  opts.concurrency = a.jobs;
  opts.timeout = std::chrono::milliseconds(static_cast<long long>(a.timeout * 1000.0));
  const auto entries = fetch_images(manifest, a.out, opts);
  const auto log_path = a.log_path.empty() ? (fs::path(a.out) / "fetch_log.jsonl").string() : a.log_path;
  std::string text;
  std::size_t ok = 0;
  for (const auto& e : entries) {
    text += to_json(e).dump() + "\n";
    if (e.status == FetchStatus::ok) ++ok;
  }
  write_text_file(log_path, text);
  log::info("fetch: {} of {} entries stored; log at {}", ok, entries.size(), log_path);
}

// ---------------------------------------------------------------- stats

struct ValueSource {
  std::string values, column, scores;
};

std::vector<double> load_values(const ValueSource& src) {
  if (src.values.empty() == src.scores.empty()) throw InvalidInput("give exactly one of --values or --scores");
  if (!src.values.empty()) return read_values(src.values, src.column);
  std::vector<double> out;
  for (const auto& s : load_score_file(src.scores)) out.push_back(s.g);
  return out;
}

struct StatsArgs {
  ValueSource src;
  std::string out;
  // ks
  std::string a, b, column_b;
  // hist
  std::string edges;
  std::size_t bins = 0;
  std::optional<double> lo, hi;
  // kde
  std::optional<double> bandwidth, bandwidth_x, bandwidth_y;
  std::optional<double> grid_min, grid_max;
  std::size_t grid_n = 0;
  std::string points, landmarks, eye = "left";
};

void cmd_describe(const StatsArgs& a) {
  const auto v = load_values(a.src);
  const auto d = stats::describe(v);
  write_json_file(a.out, {{"n", d.n}, {"mean", d.mean}, {"sd", optional_json(d.sd)}});
}

void cmd_ks(const StatsArgs& a) {
  const auto va = read_values(a.a, a.src.column);
  const auto vb = read_values(a.b, a.column_b.empty() ? a.src.column : a.column_b);
  const double d = stats::ks_two_sample(va, vb);
  const double p = stats::ks_pvalue(d, va.size(), vb.size());
  write_json_file(a.out, {{"D", d}, {"p_value", p}, {"n", va.size()}, {"m", vb.size()}});
}

std::vector<double> parse_edge_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : split_csv_line(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(f, &used));
      if (used != f.size()) throw std::invalid_argument(f);
    } catch (const std::exception&) {
      throw InvalidInput("--edges: \"" + f + "\" is not a number");
    }
  }
  return out;
}

void cmd_hist(const StatsArgs& a) {
  const auto v = load_values(a.src);
  std::vector<double> edges;
  if (!a.edges.empty()) {
    edges = parse_edge_list(a.edges);
  } else {
    if (a.bins == 0 || !a.lo || !a.hi) throw InvalidInput("hist needs --edges or --bins with --min and --max");
    edges = stats::linspace(*a.lo, *a.hi, a.bins + 1);
  }
  const auto h = stats::histogram(v, edges);
  std::ostringstream csv;
  csv << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    csv << format_double(h.edges[i]) << ',' << format_double(h.edges[i + 1]) << ',' << h.counts[i] << '\n';
  }
  write_text_file(a.out, csv.str());
  write_json_file(a.out + ".json", {{"n", v.size()}, {"overflow", h.overflow}});
}

void cmd_kde1d(const StatsArgs& a) {
  const auto v = load_values(a.src);
  if (v.empty()) throw InvalidInput("kde1d: no values");
  const double h = a.bandwidth ? *a.bandwidth : stats::silverman_bandwidth(v);
  const auto [mn, mx] = std::ranges::minmax(v);
  const double lo = a.grid_min.value_or(mn - 3.0 * h);
  const double hi = a.grid_max.value_or(mx + 3.0 * h);
  const auto grid = stats::linspace(lo, hi, a.grid_n == 0 ? 512 : a.grid_n);
  const auto dens = stats::kde_1d(v, grid, h);
  std::ostringstream csv;
  csv << "x,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) csv << format_double(grid[i]) << ',' << format_double(dens.values[i]) << '\n';
  write_text_file(a.out, csv.str());
  write_json_file(a.out + ".json", {{"bandwidth", dens.bandwidth}, {"n", dens.n}});
}

std::vector<NormPoint> load_points(const StatsArgs& a) {
  const int sources = !a.points.empty() + !a.src.scores.empty() + !a.landmarks.empty();
  if (sources != 1) throw InvalidInput("kde2d needs exactly one of --points, --scores or --landmarks");
  if (a.eye != "left" && a.eye != "right") throw InvalidInput("--eye must be left or right");
  const bool left = a.eye == "left";
  std::vector<NormPoint> pts;
  if (!a.points.empty()) {
    const auto xs = read_values(a.points, "x");
    const auto ys = read_values(a.points, "y");
    for (std::size_t i = 0; i < xs.size(); ++i) pts.push_back({xs[i], ys[i]});
  } else if (!a.src.scores.empty()) {
    for (const auto& s : load_score_file(a.src.scores)) {
      if (s.eyes) pts.push_back(left ? s.eyes->left : s.eyes->right);
    }
  } else {
    for (const auto& r : load_landmark_file(a.landmarks)) {
      const auto obs = observe(r);
      if (obs.eyes) pts.push_back(left ? obs.eyes->left : obs.eyes->right);
    }
  }
  return pts;
}

void cmd_kde2d(const StatsArgs& a) {
  const auto pts = load_points(a);
  if (pts.empty()) throw InvalidInput("kde2d: no points");
  const auto axis = stats::linspace(0.0, 1.0, a.grid_n == 0 ? 101 : a.grid_n);
  std::optional<std::pair<double, double>> bw;
  if (a.bandwidth_x || a.bandwidth_y) {
    if (!a.bandwidth_x || !a.bandwidth_y) throw InvalidInput("give both --bandwidth-x and --bandwidth-y");
    bw = std::pair{*a.bandwidth_x, *a.bandwidth_y};
  }
  const auto dens = stats::kde_2d(pts, axis, axis, bw);
  std::ostringstream csv;
  csv << "x,y,density\n";
  for (std::size_t iy = 0; iy < axis.size(); ++iy) {
    for (std::size_t ix = 0; ix < axis.size(); ++ix) {
      csv << format_double(axis[ix]) << ',' << format_double(axis[iy]) << ',' << format_double(dens.at(ix, iy)) << '\n';
    }
  }
  write_text_file(a.out, csv.str());
  write_json_file(a.out + ".json", {{"bandwidth", {dens.bandwidth_x, dens.bandwidth_y}}, {"n", dens.n}});
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::string counts, labels, candidates, tweets, out;
  std::uint64_t n_sample = 0;
  std::optional<std::uint64_t> base, tweet_total;
  std::optional<double> kappa;
};

std::vector<Candidate> load_candidates(const std::string& path) {
  std::vector<Candidate> out;
  for (const auto& s : load_score_file(path)) out.push_back({s.image_id, s.g});
  return out;
}

void cmd_report(const ReportArgs& a) {
  if (a.counts.empty() == a.labels.empty()) throw InvalidInput("give exactly one of --counts or --labels");
  ConsensusCounts counts;
  std::optional<double> kappa = a.kappa;
  std::optional<TweetTallies> tweets;
  if (!a.counts.empty()) {
    if (!a.tweets.empty()) throw InvalidInput("--tweets needs --labels to know which accounts to sum");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_text_file(a.counts));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(a.counts + ": " + e.what());
    }
    counts = consensus_counts_from_json(j);
    if (!kappa && j.contains("kappa") && j["kappa"].is_number()) kappa = j["kappa"].get<double>();
  } else {
    if (a.candidates.empty()) throw InvalidInput("--labels needs --candidates");
    StoreOptions so;
    so.read_only = true;
    LabelStore store(load_candidates(a.candidates), a.labels, so);
    std::vector<std::string> ids;
    for (const auto& c : store.candidates()) ids.push_back(c.image_id);
    const auto sets = consensus_sets(ids, store.current_labels());
    counts = sets.counts;
    if (!kappa && sets.pairs.size() >= 2) kappa = cohen_kappa(sets.pairs);
    if (!a.tweets.empty()) {
      const auto table = read_csv(a.tweets);
      const auto id_col = table.column("image_id");
      const auto n_col = table.column("tweets");
      std::unordered_map<std::string, std::uint64_t> per_account;
      std::uint64_t sum = 0;
      for (const auto& row : table.rows) {
        std::uint64_t n = 0;
        try {
          std::size_t used = 0;
          n = std::stoull(row[n_col], &used);
          if (used != row[n_col].size()) throw std::invalid_argument(row[n_col]);
        } catch (const std::exception&) {
          throw ParseError(a.tweets + ": \"" + row[n_col] + "\" is not a tweet count");
        }
        per_account[row[id_col]] += n;
        sum += n;
      }
      TweetTallies t;
      t.total = a.tweet_total.value_or(sum);
      for (const auto& id : sets.strict_ids) t.strict_tweets += per_account[id];
      for (const auto& id : sets.loose_ids) t.loose_tweets += per_account[id];
      tweets = t;
    }
  }
  const auto report = prevalence_report(counts, a.n_sample, kappa, a.base, tweets);
  auto j = to_json(report);
  j["consensus"] = to_json(counts);
  write_json_file(a.out, j);
  log::info("report: prevalence {} to {}", report.lower_percent, report.upper_percent);
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string candidates, images, store, ui_dir, host = "127.0.0.1";
  int port = 8080;
  std::optional<std::uint64_t> n_sample, base, shuffle_seed;
  bool fsync = false;
};

void cmd_serve(const ServeArgs& a) {
  StoreOptions so;
  so.n_sample = a.n_sample;
  so.extrapolation_base = a.base;
  so.shuffle_seed = a.shuffle_seed;
  so.fsync = a.fsync;
  LabelStore store(load_candidates(a.candidates), a.store, so);
  ServiceOptions svc_opts;
  svc_opts.images_dir = a.images;
  if (!a.ui_dir.empty()) svc_opts.ui_dir = a.ui_dir;
  AnnotationService service(store, svc_opts);

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  const int port = service.bind(a.host, a.port);
  log::info("serve: {} candidates, revision {}, listening on http://{}:{}", store.candidates().size(),
            store.revision(), a.host, port);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    log::info("serve: signal {}, shutting down", sig);
    service.stop();
  });
  service.listen();
  if (waiter.joinable()) {
    // listen() can only return after stop(); the waiter has finished.
    waiter.join();
  }
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"GAN profile-picture triage: eye-placement scoring, statistics and annotation"};
  app.require_subcommand(1);
  app.fallthrough(false);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic image corpus");
  synth->add_option("--spec", synth_args.spec, "Corpus spec (JSON)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", synth_args.out, "Output directory")->required();
  synth->add_option("--jobs", synth_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "Produce landmark records from images");
  detect->add_option("--provider", detect_args.provider, "file | exec | synthetic")
      ->required()
      ->check(CLI::IsMember({"file", "exec", "synthetic"}));
  detect->add_option("--command", detect_args.command, "Detector command line (exec provider)");
  detect->add_option("--images", detect_args.images, "Image directory")->check(CLI::ExistingDirectory);
  detect->add_option("--landmarks", detect_args.landmarks, "Precomputed landmark file (file provider)")
      ->check(CLI::ExistingFile);
  detect->add_option("--out", detect_args.out, "Output landmark file")->required();
  detect->add_option("--timeout", detect_args.timeout, "Per-image detector timeout, seconds")->check(CLI::PositiveNumber);
  detect->add_option("--jobs", detect_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  CalibrateArgs cal_args;
  auto* cal = app.add_subcommand("calibrate", "Average GAN eye locations over a reference corpus");
  cal->add_option("--landmarks", cal_args.landmarks, "Reference landmark file")->required()->check(CLI::ExistingFile);
  cal->add_option("--min-count", cal_args.min_count, "Minimum usable single-face images");
  cal->add_option("--source", cal_args.source, "Provenance label");
  cal->add_option("--out", cal_args.out, "Output calibration file")->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Compute GANEyeDistance for every landmark record");
  score->add_option("--landmarks", score_args.landmarks, "Landmark file")->required()->check(CLI::ExistingFile);
  score->add_option("--calibration", score_args.calibration, "Calibration file")->required()->check(CLI::ExistingFile);
  score->add_option("--out", score_args.out, "Output score file");
  score->add_flag("--stdout", score_args.to_stdout, "Stream records to standard output");
  score->add_flag("--filter", score_args.filter, "Emit only candidates below --threshold, sorted");
  score->add_option("--threshold", score_args.threshold, "Candidate threshold (with --filter)");
  score->add_option("--jobs", score_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  FilterArgs filter_args;
  auto* filter = app.add_subcommand("filter", "Keep records with g below a threshold, sorted by g");
  filter->add_option("--scores", filter_args.scores, "Score file")->required()->check(CLI::ExistingFile);
  filter->add_option("--threshold", filter_args.threshold, "Threshold in (0, 1]");
  filter->add_option("--out", filter_args.out, "Output candidate file");
  filter->add_flag("--stdout", filter_args.to_stdout, "Stream candidates to standard output");

  FetchArgs fetch_args;
  auto* fetch = app.add_subcommand("fetch", "Download profile images listed in a CSV manifest");
  fetch->add_option("--manifest", fetch_args.manifest, "CSV with header image_id,url")->required()->check(CLI::ExistingFile);
  fetch->add_option("--out", fetch_args.out, "Output directory")->required();
  fetch->add_option("--rate", fetch_args.rate, "Requests per second")->check(CLI::PositiveNumber);
  fetch->add_option("--retries", fetch_args.retries, "Retries per entry");
  fetch->add_option("--jobs", fetch_args.jobs, "Concurrent requests")->check(CLI::PositiveNumber);
  fetch->add_option("--timeout", fetch_args.timeout, "Per-request timeout, seconds")->check(CLI::PositiveNumber);
  fetch->add_option("--log", fetch_args.log_path, "Fetch log path (default OUT/fetch_log.jsonl)");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Descriptive statistics, KS tests, histograms, densities");
  stats_cmd->require_subcommand(1);
  auto add_values = [&](CLI::App* c) {
    c->add_option("--values", stats_args.src.values, "Numbers, one per line, or a CSV with --column")
        ->check(CLI::ExistingFile);
    c->add_option("--column", stats_args.src.column, "CSV column to read");
    c->add_option("--scores", stats_args.src.scores, "Score file; uses g values")->check(CLI::ExistingFile);
    c->add_option("--out", stats_args.out, "Output file")->required();
  };
  auto* describe = stats_cmd->add_subcommand("describe", "n, mean and sample standard deviation");
  add_values(describe);
  auto* ks = stats_cmd->add_subcommand("ks", "Two-sample Kolmogorov-Smirnov test");
  ks->add_option("--a", stats_args.a, "First sample")->required()->check(CLI::ExistingFile);
  ks->add_option("--b", stats_args.b, "Second sample")->required()->check(CLI::ExistingFile);
  ks->add_option("--column", stats_args.src.column, "CSV column (both samples)");
  ks->add_option("--column-b", stats_args.column_b, "CSV column of the second sample");
  ks->add_option("--out", stats_args.out, "Output JSON")->required();
  auto* hist = stats_cmd->add_subcommand("hist", "Histogram counts");
  add_values(hist);
  hist->add_option("--edges", stats_args.edges, "Comma-separated bin edges");
  hist->add_option("--bins", stats_args.bins, "Number of equal-width bins");
  hist->add_option("--min", stats_args.lo, "Lowest edge (with --bins)");
  hist->add_option("--max", stats_args.hi, "Highest edge (with --bins)");
  auto* kde1 = stats_cmd->add_subcommand("kde1d", "Gaussian KDE on a 1-D grid");
  add_values(kde1);
  kde1->add_option("--bandwidth", stats_args.bandwidth, "Bandwidth (default: Silverman)")->check(CLI::PositiveNumber);
  kde1->add_option("--grid-min", stats_args.grid_min, "Grid start");
  kde1->add_option("--grid-max", stats_args.grid_max, "Grid end");
  kde1->add_option("--grid-n", stats_args.grid_n, "Grid size");
  auto* kde2 = stats_cmd->add_subcommand("kde2d", "Gaussian KDE of eye locations over the unit square");
  kde2->add_option("--points", stats_args.points, "CSV with x,y columns")->check(CLI::ExistingFile);
  kde2->add_option("--scores", stats_args.src.scores, "Score file (single-face eyes)")->check(CLI::ExistingFile);
  kde2->add_option("--landmarks", stats_args.landmarks, "Landmark file (single-face eyes)")->check(CLI::ExistingFile);
  kde2->add_option("--eye", stats_args.eye, "left | right")->check(CLI::IsMember({"left", "right"}));
  kde2->add_option("--bandwidth-x", stats_args.bandwidth_x, "x bandwidth (default: Scott)")->check(CLI::PositiveNumber);
  kde2->add_option("--bandwidth-y", stats_args.bandwidth_y, "y bandwidth (default: Scott)")->check(CLI::PositiveNumber);
  kde2->add_option("--grid-n", stats_args.grid_n, "Nodes per axis");
  kde2->add_option("--out", stats_args.out, "Output CSV")->required();

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Prevalence bounds and extrapolations");
  report->add_option("--counts", report_args.counts, "JSON with strict/loose consensus counts")->check(CLI::ExistingFile);
  report->add_option("--labels", report_args.labels, "Label log (alternative to --counts)")->check(CLI::ExistingFile);
  report->add_option("--candidates", report_args.candidates, "Candidate file (with --labels)")->check(CLI::ExistingFile);
  report->add_option("--n-sample", report_args.n_sample, "Size of the random sample")->required()->check(CLI::PositiveNumber);
  report->add_option("--base", report_args.base, "Population to extrapolate to");
  report->add_option("--kappa", report_args.kappa, "Override the reported kappa");
  report->add_option("--tweets", report_args.tweets, "CSV image_id,tweets (with --labels)")->check(CLI::ExistingFile);
  report->add_option("--tweet-total", report_args.tweet_total, "Total tweets of the sample (default: CSV sum)");
  report->add_option("--out", report_args.out, "Output JSON")->required();

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  serve->add_option("--candidates", serve_args.candidates, "Candidate file")->required()->check(CLI::ExistingFile);
  serve->add_option("--images", serve_args.images, "Image directory")->required()->check(CLI::ExistingDirectory);
  serve->add_option("--store", serve_args.store, "Append-only label log")->required();
  serve->add_option("--ui-dir", serve_args.ui_dir, "Static UI assets")->check(CLI::ExistingDirectory);
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--n-sample", serve_args.n_sample, "Sample size for live prevalence");
  serve->add_option("--base", serve_args.base, "Population for live extrapolation");
  serve->add_option("--shuffle-seed", serve_args.shuffle_seed, "Seeded presentation order");
  serve->add_flag("--fsync", serve_args.fsync, "fsync the label log after every write");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*synth) {
      cmd_synth(synth_args);
    } else if (*detect) {
      cmd_detect(detect_args);
    } else if (*cal) {
      cmd_calibrate(cal_args);
    } else if (*score) {
      cmd_score(score_args);
    } else if (*filter) {
      if (!(filter_args.threshold > 0.0 && filter_args.threshold <= 1.0)) {
        std::cerr << "--threshold must lie in (0, 1]\n\n" << filter->help();
        return 1;
      }
      cmd_filter(filter_args);
    } else if (*fetch) {
      cmd_fetch(fetch_args);
    } else if (*stats_cmd) {
      if (*describe) cmd_describe(stats_args);
      else if (*ks) cmd_ks(stats_args);
      else if (*hist) cmd_hist(stats_args);
      else if (*kde1) cmd_kde1d(stats_args);
      else if (*kde2) cmd_kde2d(stats_args);
    } else if (*report) {
      cmd_report(report_args);
    } else if (*serve) {
      cmd_serve(serve_args);
    }
  } catch (const std::exception& e) {
    log::error("{}", e.what());
    return exit_code_for(e);
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ganeye::cli
