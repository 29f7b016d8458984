#include "msr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "msr/dataset_io.hpp"
#include "msr/error.hpp"
#include "msr/evaluation.hpp"
#include "msr/fit_io.hpp"
#include "msr/models.hpp"
#include "msr/searchlight.hpp"
#include "msr/simd/kernels.hpp"
#include "msr/synth.hpp"

namespace msr::cli {

namespace {


class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  const std::string s = trim(text);
  T value{};
  if constexpr (std::is_floating_point_v<T>) {
    if (s == "inf" || s == "+inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw UsageError(std::string("bad number for ") + what + ": " + s);
  } else {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
      throw UsageError(std::string("bad integer for ") + what + ": " + s);
  }
  return value;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const char* what) {
  std::vector<std::size_t> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number<std::size_t>(part, what));
  return out;
}

Coord parse_coord(const std::string& text, const char* what) {
  const auto v = parse_size_list(text, what);
  if (v.size() != 3) throw UsageError(std::string(what) + " needs x,y,z");
  return {static_cast<std::uint32_t>(v[0]), static_cast<std::uint32_t>(v[1]), static_cast<std::uint32_t>(v[2])};
}

struct Box {
  Coord lo, hi;
};

Box parse_box(const std::string& text, const char* what) {
  const auto v = parse_size_list(text, what);
  if (v.size() != 6) throw UsageError(std::string(what) + " needs x0,y0,z0,x1,y1,z1");
  auto u = [](std::size_t x) { return static_cast<std::uint32_t>(x); };
  return {{u(v[0]), u(v[1]), u(v[2])}, {u(v[3]), u(v[4]), u(v[5])}};
}

// x0,y0,z0,x1,y1,z1[,k[,snr_db[,kind]]]
PlantedRegion parse_region(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() < 6 || parts.size() > 9) throw UsageError("--region needs x0,y0,z0,x1,y1,z1[,k[,snr[,kind]]]");
  std::string box;
  for (int i = 0; i < 6; ++i) box += (i ? "," : "") + parts[i];
  const Box b = parse_box(box, "--region");
  PlantedRegion r;
  r.lo = b.lo;
  r.hi = b.hi;
  if (parts.size() > 6) r.k_true = parse_number<std::size_t>(parts[6], "region k");
  if (parts.size() > 7) r.snr_db = parse_number<double>(parts[7], "region snr");
  if (parts.size() > 8) r.kind = parse_source_kind(trim(parts[8]));
  return r;
}

Contrast parse_contrast(std::string_view name) {
  if (name == "logcosh") return Contrast::LogCosh;
  if (name == "cube") return Contrast::Cube;
  throw InvalidInput("unknown contrast: " + std::string(name));
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    out[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return out;
}

// Appends config entries whose keys were not given on the command line.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  std::set<std::string> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const auto eq = a.find('=');
    const std::string key = a.substr(2, eq == std::string::npos ? std::string::npos : eq - 2);
    given.insert(key);
    if (key == "config") {
      if (eq != std::string::npos) {
        config_path = a.substr(eq + 1);
      } else if (i + 1 < args.size()) {
        config_path = args[i + 1];
      }
    }
  }
  std::vector<std::string> out = args;
  if (config_path.empty()) return out;
  for (const auto& [key, value] : read_config(config_path)) {
    if (given.count(key) || key == "config") continue;
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

std::size_t resolve_threads(std::size_t flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MSR_THREADS"); env && *env) {
    const auto n = parse_number<std::size_t>(env, "MSR_THREADS");
    return n == 0 ? 1 : n;
  }
  return 1;
}

SubjectDataset load_working(const std::string& path, bool downsample) {
  SubjectDataset d = load_dataset(path);
  return downsample ? downsample_by_2(d) : d;
}

struct FileRecord {
  std::string path;
  std::string sha256;
};

class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  void input(const std::string& path) { inputs_.push_back({path, sha256_file(path)}); }
  void output(const std::string& path) { outputs_.push_back({path, sha256_file(path)}); }
  void set(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  void write(const CLI::App& sub, const std::string& path) const {
    nlohmann::json j;
    j["command"] = command_;
    nlohmann::json params = nlohmann::json::object();
    for (const CLI::Option* opt : sub.get_options()) {
      const std::string name = opt->get_single_name();
      if (name == "help" || name.empty()) continue;
      if (opt->count() > 0) {
        const auto& res = opt->results();
        std::string joined;
        for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? ";" : "") + res[i];
        params[name] = joined.empty() ? "true" : joined;
      } else {
        params[name] = opt->get_default_str();
      }
    }
    j["parameters"] = params;
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    auto records = [](const std::vector<FileRecord>& files) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& f : files) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
      return arr;
    };
    j["inputs"] = records(inputs_);
    j["outputs"] = records(outputs_);
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write manifest: " + path);
    os << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::vector<FileRecord> inputs_, outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
};

// Options shared by the model-fitting subcommands.
struct ModelOptions {
  std::string model = "srm";
  std::size_t k = 10;
  int max_iter = 100;
  double tol = 1e-6;
  std::string contrast = "logcosh";
  std::size_t k1 = 0;
  std::uint64_t seed = 0;
  bool no_downsample = false;
  std::string config;

  void add(CLI::App& app, bool with_k) {
    app.add_option("--model", model, "pca, srm, ica, srica or srgica")->capture_default_str();
    if (with_k) app.add_option("--k", k, "Number of factors")->capture_default_str();
    app.add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
    app.add_option("--tol", tol, "Convergence tolerance")->capture_default_str();
    app.add_option("--contrast", contrast, "ICA contrast: logcosh or cube")->capture_default_str();
    app.add_option("--k1", k1, "SR-GICA first-stage width (0 = automatic)")->capture_default_str();
    app.add_option("--seed", seed, "Random seed")->capture_default_str();
    app.add_flag("--no-downsample", no_downsample, "Skip 2x2x2 downsampling of the input")->default_str("false");
    app.add_option("--config", config, "key=value file; flags override it");
  }

  FitConfig fit_config() const {
    FitConfig cfg;
    cfg.k = k;
    cfg.max_iter = max_iter;
    cfg.tol = tol;
    cfg.contrast = parse_contrast(contrast);
    cfg.k1 = k1;
    cfg.seed = seed;
    return cfg;
  }
};

// Voxel selection for fit/evaluate: box, cube around a center, or everything.
struct Selection {
  std::string roi;
  std::string center;
  int radius = 2;

  void add(CLI::App& app) {
    app.add_option("--roi", roi, "Box x0,y0,z0,x1,y1,z1 (half-open, working grid)");
    app.add_option("--center", center, "Searchlight center x,y,z (working grid)");
    app.add_option("--radius", radius, "Searchlight radius")->capture_default_str();
  }

  std::vector<std::size_t> rows(const SubjectDataset& d) const {
    const GridDims& dims = d.grid.dims();
    std::vector<std::size_t> out;
    if (!roi.empty() && !center.empty()) throw UsageError("--roi and --center are exclusive");
    if (!roi.empty()) {
      const Box b = parse_box(roi, "--roi");
      if (b.hi.x > dims.nx || b.hi.y > dims.ny || b.hi.z > dims.nz) throw IndexError("--roi exceeds the grid");
      for (std::uint32_t z = b.lo.z; z < b.hi.z; ++z)
        for (std::uint32_t y = b.lo.y; y < b.hi.y; ++y)
          for (std::uint32_t x = b.lo.x; x < b.hi.x; ++x)
            if (const long r = d.grid.row_of_flat(dims.flat(x, y, z)); r >= 0) out.push_back(static_cast<std::size_t>(r));
      if (out.empty()) throw InvalidInput("--roi selects no in-mask voxel");
      return out;
    }
    if (!center.empty()) {
      const Coord c = parse_coord(center, "--center");
      const SearchlightIndex index = build_searchlights(d.grid, d.mask, radius);
      const auto it = std::find(index.centers.begin(), index.centers.end(), c);
      if (it == index.centers.end()) throw IndexError("--center is not a valid searchlight center");
      const auto nb = index.neighborhood(static_cast<std::size_t>(it - index.centers.begin()));
      return {nb.begin(), nb.end()};
    }
    out.resize(d.voxel_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
  }
};

std::vector<Matrix> gather(const SubjectDataset& d, const std::vector<std::size_t>& rows) {
  std::vector<Matrix> xs;
  for (const Matrix& x : d.subjects) xs.push_back(gather_rows(x, rows));
  return xs;
}

std::string default_path(const std::string& explicit_path, const std::string& base, const std::string& suffix) {
  return explicit_path.empty() ? base + suffix : explicit_path;
}

// ---- generate ----

struct GenerateCmd {
  std::string preset;
  std::string dims = "12,12,12";
  std::size_t subjects = 5;
  std::size_t trs = 120;
  std::vector<std::string> regions;
  std::size_t scenes = 0;
  std::size_t scene_trs = 4;
  double scene_snr = 10.0;
  double tr_seconds = 2.0;
  std::uint64_t seed = 0;
  std::string out, truth, recall_out, config;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("generate", "Write a synthetic dataset with planted shared responses");
    app->add_option("--preset", preset, "planted-small, noise-small, recall-small or ica-small");
    app->add_option("--dims", dims, "Grid nx,ny,nz")->capture_default_str();
    app->add_option("--subjects", subjects, "Number of subjects")->capture_default_str();
    app->add_option("--trs", trs, "TRs per subject")->capture_default_str();
    app->add_option("--region", regions, "x0,y0,z0,x1,y1,z1[,k[,snr_db[,kind]]] (repeatable)");
    app->add_option("--scenes", scenes, "Number of recall scenes (0 = no recall run)")->capture_default_str();
    app->add_option("--scene-trs", scene_trs, "TRs per recall scene")->capture_default_str();
    app->add_option("--scene-snr", scene_snr, "Recall SNR in dB")->capture_default_str();
    app->add_option("--tr-seconds", tr_seconds, "Repetition time")->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_option("--out", out, "Dataset output path")->required();
    app->add_option("--truth", truth, "Ground-truth output path (default <out>.truth)");
    app->add_option("--recall-out", recall_out, "Recall dataset path (default <out>.recall)");
    app->add_option("--config", config, "key=value file; flags override it");
  }

  SynthSpec spec() const {
    SynthSpec s = preset.empty() ? SynthSpec{} : preset_spec(preset, seed);
    s.seed = seed;
    if (preset.empty() || app->count("--dims")) {
      const Coord d = parse_coord(dims, "--dims");
      s.dims = {d.x, d.y, d.z};
    }
    if (preset.empty() || app->count("--subjects")) s.m = subjects;
    if (preset.empty() || app->count("--trs")) s.t = trs;
    if (app->count("--tr-seconds")) s.tr_seconds = tr_seconds;
    if (!regions.empty()) {
      s.regions.clear();
      for (const auto& r : regions) s.regions.push_back(parse_region(r));
    }
    if (app->count("--scenes")) {
      if (scenes == 0) {
        s.scenes.reset();
      } else {
        s.scenes = SceneSpec{scenes, scene_trs, scene_snr};
      }
    } else if (s.scenes) {
      if (app->count("--scene-trs")) s.scenes->trs_per_scene = scene_trs;
      if (app->count("--scene-snr")) s.scenes->snr_db = scene_snr;
    }
    return s;
  }

  int run(std::ostream& os) const {
    const SynthSpec s = spec();
    const SynthOutput data = generate(s);
    Manifest manifest("generate");
    save_dataset(out, data.movie);
    manifest.output(out);
    const std::string truth_path = default_path(truth, out, ".truth");
    save_truth(truth_path, data.truth);
    manifest.output(truth_path);
    if (data.recall) {
      const std::string recall_path = default_path(recall_out, out, ".recall");
      save_dataset(recall_path, *data.recall);
      manifest.output(recall_path);
    }
    manifest.set("seed", s.seed);
    manifest.write(*app, out + ".manifest.json");
    os << "wrote " << out << ": " << s.m << " subjects, " << data.movie.voxel_count() << " voxels, " << s.t
       << " TRs, " << s.regions.size() << " planted regions\n";
    return 0;
  }
};

// ---- fit ----

struct FitCmd {
  ModelOptions model;
  Selection selection;
  std::string data, out;
  bool no_zscore = false;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("fit", "Fit one factor model to a region or the whole volume");
    app->add_option("--data", data, "Dataset path")->required();
    app->add_option("--out", out, "Fit output path")->required();
    model.add(*app, true);
    selection.add(*app);
    app->add_flag("--no-zscore", no_zscore, "Fit raw voxel time courses")->default_str("false");
  }

  int run(std::ostream& os) const {
    const SubjectDataset d = load_working(data, !model.no_downsample);
    std::vector<Matrix> xs = gather(d, selection.rows(d));
    if (!no_zscore) xs = zscore_all(xs);
    const FactorFit fit = fit_model(parse_model(model.model), xs, model.fit_config());
    save_fit(out, fit);
    Manifest manifest("fit");
    manifest.input(data);
    manifest.output(out);
    manifest.set("seed", model.seed);
    manifest.write(*app, out + ".manifest.json");
    os << "model=" << model_name(fit.model) << " k=" << fit.k() << " voxels=" << fit.voxel_count()
       << " iterations=" << fit.iterations << " converged=" << (fit.converged ? "yes" : "no");
    if (!fit.objective_trace.empty()) os << " objective=" << format_double(fit.objective_trace.back());
    os << '\n';
    return 0;
  }
};

// ---- sweep / evaluate shared ----

struct ProtocolOptions {
  std::string protocol = "time-segment";
  std::size_t segment_len = 9;
  std::string recall;
  std::size_t threads = 0;

  void add(CLI::App& app) {
    app.add_option("--protocol", protocol, "time-segment or scene-recall")->capture_default_str();
    app.add_option("--segment-len", segment_len, "Segment length in TRs")->capture_default_str();
    app.add_option("--recall", recall, "Labelled recall dataset (scene-recall)");
    app.add_option("--threads", threads, "Worker threads (default MSR_THREADS or 1)");
  }

  EvalSpec eval() const {
    EvalSpec spec;
    spec.protocol = parse_protocol(protocol);
    spec.segment_len = segment_len;
    return spec;
  }
};

struct RecallInputs {
  SubjectDataset dataset;
  RecallData data;
  bool present = false;
};

RecallInputs load_recall(const ProtocolOptions& p, const SubjectDataset& movie, bool downsample, Manifest& manifest) {
  RecallInputs r;
  if (parse_protocol(p.protocol) != Protocol::SceneRecall) return r;
  if (p.recall.empty()) throw UsageError("scene-recall needs --recall");
  r.dataset = load_working(p.recall, downsample);
  if (!(r.dataset.grid == movie.grid) || r.dataset.subject_count() != movie.subject_count())
    throw ShapeMismatch("recall dataset does not match the movie dataset");
  if (r.dataset.labels.empty()) throw ProtocolError("recall dataset has no scene labels");
  manifest.input(p.recall);
  r.data.table = scene_table_from_labels(r.dataset.labels, r.dataset.tr_count(), r.dataset.subject_count());
  r.present = true;
  return r;
}

// ---- sweep ----

struct SweepCmd {
  ModelOptions model;
  ProtocolOptions protocol;
  std::string data, out, csv, k_grid = "10,25,50,75,100,125";
  int radius = 2;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("sweep", "Searchlight sweep producing accuracy and k maps");
    app->add_option("--data", data, "Dataset path")->required();
    app->add_option("--out", out, "Maps output path")->required();
    app->add_option("--csv", csv, "CSV output path (default <out>.csv)");
    app->add_option("--k-grid", k_grid, "Comma-separated factor counts")->capture_default_str();
    app->add_option("--radius", radius, "Searchlight radius")->capture_default_str();
    model.add(*app, false);
    protocol.add(*app);
  }

  int run(std::ostream& os) const {
    Manifest manifest("sweep");
    const bool ds = !model.no_downsample;
    const SubjectDataset d = load_working(data, ds);
    manifest.input(data);
    RecallInputs recall = load_recall(protocol, d, ds, manifest);
    if (recall.present) recall.data.dataset = &recall.dataset;

    SweepConfig cfg;
    cfg.model = parse_model(model.model);
    cfg.k_grid = parse_size_list(k_grid, "--k-grid");
    cfg.eval = protocol.eval();
    cfg.seed = model.seed;
    cfg.threads = resolve_threads(protocol.threads);
    cfg.max_iter = model.max_iter;
    cfg.tol = model.tol;
    cfg.contrast = parse_contrast(model.contrast);
    cfg.k1 = model.k1;

    const SearchlightIndex index = build_searchlights(d.grid, d.mask, radius);
    const ResultMaps maps = sweep(d, index, cfg, recall.present ? &recall.data : nullptr);
    save_maps(out, maps);
    const std::string csv_path = default_path(csv, out, ".csv");
    {
      std::ofstream cs(csv_path);
      if (!cs) throw FormatError("cannot write " + csv_path);
      write_maps_csv(cs, maps);
    }
    manifest.output(out);
    manifest.output(csv_path);
    manifest.set("seed", cfg.seed);
    manifest.set("threads", cfg.threads);
    manifest.set("simd", simd::active().name);
    manifest.write(*app, out + ".manifest.json");
    os << "centers=" << index.size() << " defined=" << maps.defined_count() << " wrote " << out << " and "
       << csv_path << '\n';
    return 0;
  }
};

// ---- evaluate ----

struct EvaluateCmd {
  ModelOptions model;
  ProtocolOptions protocol;
  Selection selection;
  std::string data, fit_path, maps_path, out;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("evaluate", "Run an evaluation protocol and write a report CSV");
    app->add_option("--data", data, "Dataset path")->required();
    app->add_option("--out", out, "Report CSV path")->required();
    auto* f = app->add_option("--fit", fit_path, "Evaluate a saved fit on --data (held-out data)");
    auto* m = app->add_option("--maps", maps_path, "Aggregate accuracy from sweep maps");
    f->excludes(m);
    model.add(*app, true);
    protocol.add(*app);
    selection.add(*app);
  }

  int run(std::ostream& os) const {
    Manifest manifest("evaluate");
    const bool ds = !model.no_downsample;
    const SubjectDataset d = load_working(data, ds);
    manifest.input(data);
    RecallInputs recall = load_recall(protocol, d, ds, manifest);
    if (recall.present) recall.data.dataset = &recall.dataset;
    const RecallData* rd = recall.present ? &recall.data : nullptr;
    const EvalSpec spec = protocol.eval();

    ReportRow row;
    row.protocol = spec.protocol;
    row.seed = model.seed;
    TrialCount counts;
    if (!fit_path.empty()) {
      const FactorFit fit = load_fit(fit_path);
      manifest.input(fit_path);
      row.model = std::string(model_name(fit.model));
      row.k = std::to_string(fit.k());
      const auto rows = selection.rows(d);
      if (spec.protocol == Protocol::TimeSegment) {
        counts = time_segment_match(fit, zscore_all(gather(d, rows)), spec);
      } else {
        counts = scene_recall_match(fit, zscore_all(gather(recall.dataset, rows)), recall.data.table, spec);
      }
    } else if (!maps_path.empty()) {
      const ResultMaps maps = load_maps(maps_path);
      manifest.input(maps_path);
      if (!(maps.dims == d.grid.dims())) throw ShapeMismatch("maps grid differs from the working dataset grid");
      SweepConfig cfg;
      cfg.model = parse_model(model.model);
      cfg.eval = spec;
      cfg.seed = model.seed;
      cfg.threads = resolve_threads(protocol.threads);
      cfg.max_iter = model.max_iter;
      cfg.tol = model.tol;
      cfg.contrast = parse_contrast(model.contrast);
      cfg.k1 = model.k1;
      const SearchlightIndex index = build_searchlights(d.grid, d.mask, selection.radius);
      counts = aggregate_accuracy(d, index, maps, cfg, rd);
      row.model = std::string(model_name(cfg.model));
      row.k = "best";
    } else {
      const ModelId id = parse_model(model.model);
      counts = whole_volume_accuracy(d, id, model.fit_config(), spec, rd).counts;
      row.model = std::string(model_name(id));
      row.k = std::to_string(model.k);
    }
    row.accuracy = counts.accuracy();
    row.chance = counts.chance();
    row.n_trials = counts.trials;
    {
      std::ofstream rs(out);
      if (!rs) throw FormatError("cannot write " + out);
      write_report_csv(rs, {row});
    }
    manifest.output(out);
    manifest.set("seed", model.seed);
    manifest.write(*app, out + ".manifest.json");
    os << protocol_name(row.protocol) << ' ' << row.model << " k=" << row.k << " accuracy=" << format_double(row.accuracy)
       << " chance=" << format_double(row.chance) << " trials=" << row.n_trials << '\n';
    return 0;
  }
};

// ---- report ----

struct ReportCmd {
  std::string maps_path, csv, summary;
  double threshold = 0.0;
  std::size_t top = 10;
  std::string config;
  CLI::App* app = nullptr;

  void add(CLI::App& root) {
    app = root.add_subcommand("report", "Threshold a map and summarise it");
    app->add_option("--maps", maps_path, "Maps path")->required();
    app->add_option("--threshold", threshold, "Accuracy floor in [0, 1]")->capture_default_str();
    app->add_option("--top", top, "Number of top centers listed")->capture_default_str();
    app->add_option("--csv", csv, "Thresholded CSV path (default <maps>.thresholded.csv)");
    app->add_option("--summary", summary, "Summary text path (default <maps>.summary.txt)");
    app->add_option("--config", config, "key=value file; flags override it");
  }

  std::string render(const ResultMaps& all, const ResultMaps& kept) const {
    std::ostringstream os;
    os << std::setprecision(6);
    const GridDims& g = kept.dims;
    os << "grid " << g.nx << 'x' << g.ny << 'x' << g.nz << '\n';
    os << "defined centers: " << all.defined_count() << '\n';
    os << "above threshold " << threshold << ": " << kept.defined_count() << '\n';
    std::vector<std::size_t> ids;
    double sum = 0;
    std::map<std::uint16_t, std::size_t> k_hist;
    std::size_t not_converged = 0, skipped = 0;
    for (std::size_t f = 0; f < g.count(); ++f) {
      if (!kept.defined(f)) continue;
      ids.push_back(f);
      sum += kept.accuracy[f];
      ++k_hist[kept.best_k[f]];
      not_converged += (kept.flags[f] & kNotConverged) != 0;
      skipped += (kept.flags[f] & kSkippedK) != 0;
    }
    if (!ids.empty()) os << "mean accuracy: " << sum / static_cast<double>(ids.size()) << '\n';
    os << "not converged: " << not_converged << ", skipped k: " << skipped << '\n';
    os << "best k histogram:";
    for (const auto& [k, n] : k_hist) os << ' ' << k << ':' << n;
    os << '\n';
    std::stable_sort(ids.begin(), ids.end(),
                     [&](std::size_t a, std::size_t b) { return kept.accuracy[a] > kept.accuracy[b]; });
    const std::size_t n = std::min(top, ids.size());
    os << "top " << n << " centers (x,y,z accuracy k):\n";
    for (std::size_t i = 0; i < n; ++i) {
      const Coord c = unflatten(g, ids[i]);
      os << "  " << c.x << ',' << c.y << ',' << c.z << ' ' << kept.accuracy[ids[i]] << ' ' << kept.best_k[ids[i]]
         << '\n';
    }
    return os.str();
  }

  int run(std::ostream& os) const {
    const ResultMaps maps = load_maps(maps_path);
    const ResultMaps kept = threshold_map(maps, threshold);
    const std::string csv_path = default_path(csv, maps_path, ".thresholded.csv");
    const std::string summary_path = default_path(summary, maps_path, ".summary.txt");
    {
      std::ofstream cs(csv_path);
      if (!cs) throw FormatError("cannot write " + csv_path);
      write_maps_csv(cs, kept);
    }
    const std::string text = render(maps, kept);
    {
      std::ofstream ss(summary_path);
      if (!ss) throw FormatError("cannot write " + summary_path);
      ss << text;
    }
    Manifest manifest("report");
    manifest.input(maps_path);
    manifest.output(csv_path);
    manifest.output(summary_path);
    manifest.write(*app, csv_path + ".manifest.json");
    os << text;
    return 0;
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Searchlight shared-response factor models"};
  app.name("msr");
  app.require_subcommand(1);

  GenerateCmd generate_cmd;
  FitCmd fit_cmd;
  SweepCmd sweep_cmd;
  EvaluateCmd evaluate_cmd;
  ReportCmd report_cmd;
  generate_cmd.add(app);
  fit_cmd.add(app);
  sweep_cmd.add(app);
  evaluate_cmd.add(app);
  report_cmd.add(app);

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(args);
    // CLI11 consumes arguments in reverse order.
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "msr: usage error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "msr: usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (generate_cmd.app->parsed()) return generate_cmd.run(out);
    if (fit_cmd.app->parsed()) return fit_cmd.run(out);
    if (sweep_cmd.app->parsed()) return sweep_cmd.run(out);
    if (evaluate_cmd.app->parsed()) return evaluate_cmd.run(out);
    if (report_cmd.app->parsed()) return report_cmd.run(out);
  } catch (const UsageError& e) {
    err << "msr: usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "msr: " << e.kind() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "msr: error: " << e.what() << '\n';
    return 1;
  }
  err << "msr: usage error: no subcommand\n";
  return 2;
}

}  // namespace msr::cli
