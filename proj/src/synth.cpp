#include "msr/synth.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>

#include "msr/binio.hpp"
#include "msr/error.hpp"
#include "msr/rng.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

enum StreamTag : std::uint64_t { kNoise = 1, kSources = 2, kMaps = 3, kScenes = 4, kRecallNoise = 5 };

Matrix make_sources(SourceKind kind, std::size_t k, std::size_t t, Rng& rng) {
  Matrix s(k, t);
  for (std::size_t r = 0; r < k; ++r) {
    auto row = s.row(r);
    switch (kind) {
      case SourceKind::Laplacian:
        for (double& v : row) v = rng.laplace();
        break;
      case SourceKind::Gaussian:
        for (double& v : row) v = rng.normal();
        break;
      case SourceKind::SinusoidMix: {
        for (int h = 0; h < 3; ++h) {
          const double freq = 0.02 + 0.2 * rng.uniform();  // cycles per TR
          const double phase = 2.0 * std::numbers::pi * rng.uniform();
          const double amp = 0.5 + rng.uniform();
          for (std::size_t c = 0; c < t; ++c)
            row[c] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(c) + phase);
        }
        break;
      }
    }
    double mean = 0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(t);
    double ss = 0;
    for (double& v : row) {
      v -= mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(t));
    if (sd > 0)
      for (double& v : row) v /= sd;
  }
  return s;
}

std::vector<std::size_t> box_rows(const VolumeGrid& grid, const PlantedRegion& r) {
  std::vector<std::size_t> rows;
  for (std::uint32_t z = r.lo.z; z < r.hi.z; ++z)
    for (std::uint32_t y = r.lo.y; y < r.hi.y; ++y)
      for (std::uint32_t x = r.lo.x; x < r.hi.x; ++x)
        rows.push_back(static_cast<std::size_t>(grid.row_of_flat(grid.dims().flat(x, y, z))));
  return rows;
}

// Adds a * signal to the rows of x listed in `rows`, with a chosen so that
// signal power over noise power (the current contents) equals snr_db.
// snr = +inf replaces the noise by the signal scaled to unit power.
void plant(Matrix& x, const std::vector<std::size_t>& rows, const Matrix& signal, double snr_db) {
  if (snr_db == -INFINITY) return;
  const auto& k = simd::active();
  double noise_power = 0;
  for (std::size_t r : rows) noise_power += k.sum_sq(x.row(r).data(), x.cols());
  const double signal_power = frobenius_sq(signal);
  double scale;
  if (snr_db == INFINITY) {
    for (std::size_t r : rows) std::fill_n(x.row(r).data(), x.cols(), 0.0);
    scale = signal_power > 0 ? std::sqrt(static_cast<double>(signal.size()) / signal_power) : 0.0;
  } else {
    scale = signal_power > 0 ? std::sqrt(std::pow(10.0, snr_db / 10.0) * noise_power / signal_power) : 0.0;
  }
  for (std::size_t j = 0; j < rows.size(); ++j) k.axpy(scale, signal.row(j).data(), x.row(rows[j]).data(), x.cols());
}

Matrix noise_matrix(std::size_t v, std::size_t t, Rng& rng) { return random_normal(v, t, rng); }

}  // namespace

std::string_view source_kind_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::Laplacian: return "laplacian";
    case SourceKind::Gaussian: return "gaussian";
    case SourceKind::SinusoidMix: return "sinusoid-mix";
  }
  return "unknown";
}

SourceKind parse_source_kind(std::string_view name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "laplacian") return SourceKind::Laplacian;
  if (s == "gaussian") return SourceKind::Gaussian;
  if (s == "sinusoidmix") return SourceKind::SinusoidMix;
  throw SpecError("unknown source kind: " + std::string(name));
}

void SynthSpec::validate() const {
  if (m < 1) throw SpecError("need at least one subject");
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw SpecError("grid dims must be positive");
  if (t < 2) throw SpecError("need at least two TRs");
  if (!(tr_seconds > 0)) throw SpecError("tr_seconds must be positive");
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const auto& r = regions[i];
    if (r.lo.x >= r.hi.x || r.lo.y >= r.hi.y || r.lo.z >= r.hi.z) throw SpecError("planted box is empty");
    if (r.hi.x > dims.nx || r.hi.y > dims.ny || r.hi.z > dims.nz) throw SpecError("planted box exceeds the grid");
    if (r.k_true == 0 || r.k_true > 125 || r.k_true > r.voxel_count() || r.k_true > t)
      throw SpecError("k_true must lie in [1, min(125, box voxels, t)]");
    if (std::isnan(r.snr_db)) throw SpecError("snr must not be NaN");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = regions[j];
      const bool overlap = r.lo.x < o.hi.x && o.lo.x < r.hi.x && r.lo.y < o.hi.y && o.lo.y < r.hi.y &&
                           r.lo.z < o.hi.z && o.lo.z < r.hi.z;
      if (overlap) throw SpecError("planted boxes overlap");
    }
  }
  if (scenes) {
    if (scenes->n_scenes == 0 || scenes->trs_per_scene == 0) throw SpecError("scene structure needs scenes and TRs");
    if (std::isnan(scenes->snr_db)) throw SpecError("scene snr must not be NaN");
  }
}

SynthSpec preset_spec(std::string_view name, std::uint64_t seed) {
  SynthSpec spec;
  spec.seed = seed;
  if (name == "planted-small" || name == "recall-small") {
    // 16^3 grid; the box maps onto a 5^3 block after downsampling by 2.
    spec.dims = {16, 16, 16};
    spec.t = 120;
    spec.regions.push_back({{4, 4, 4}, {14, 14, 14}, 5, 10.0, SourceKind::Laplacian});
    if (name == "recall-small") spec.scenes = SceneSpec{50, 4, 10.0};
    return spec;
  }
  if (name == "noise-small") {
    spec.dims = {16, 16, 16};
    spec.t = 120;
    return spec;
  }
  if (name == "ica-small") {
    spec.m = 3;
    spec.dims = {5, 5, 5};
    spec.t = 1000;
    spec.regions.push_back({{0, 0, 0}, {5, 5, 5}, 4, 20.0, SourceKind::Laplacian});
    return spec;
  }
  throw SpecError("unknown preset: " + std::string(name));
}

SynthOutput generate(const SynthSpec& spec) {
  spec.validate();
  Mask mask = Mask::full(spec.dims);
  VolumeGrid grid(mask);
  const std::size_t v = grid.voxel_count();

  SynthOutput out;
  out.truth.dims = spec.dims;
  out.truth.m = spec.m;
  out.truth.region_label.assign(spec.dims.count(), 0);

  std::vector<Matrix> subjects;
  for (std::size_t i = 0; i < spec.m; ++i) {
    Rng rng = Rng::stream(spec.seed, {kNoise, i});
    subjects.push_back(noise_matrix(v, spec.t, rng));
  }

  for (std::size_t r = 0; r < spec.regions.size(); ++r) {
    const PlantedRegion& region = spec.regions[r];
    RegionTruth rt;
    rt.region = region;
    rt.rows = box_rows(grid, region);
    for (std::size_t row : rt.rows) out.truth.region_label[grid.flat_of_row(row)] = static_cast<std::uint8_t>(r + 1);
    Rng src_rng = Rng::stream(spec.seed, {kSources, r});
    rt.s0 = make_sources(region.kind, region.k_true, spec.t, src_rng);
    for (std::size_t i = 0; i < spec.m; ++i) {
      Rng map_rng = Rng::stream(spec.seed, {kMaps, r, i});
      rt.q.push_back(random_orthonormal(rt.rows.size(), region.k_true, map_rng));
      plant(subjects[i], rt.rows, matmul(rt.q[i], rt.s0), region.snr_db);
    }
    if (spec.scenes) {
      Rng scene_rng = Rng::stream(spec.seed, {kScenes, r});
      rt.scene_patterns = random_normal(region.k_true, spec.scenes->n_scenes, scene_rng);
    }
    out.truth.regions.push_back(std::move(rt));
  }
  out.movie = make_dataset(std::move(subjects), mask, spec.tr_seconds);

  if (spec.scenes) {
    const SceneSpec& sc = *spec.scenes;
    const std::size_t t_rec = sc.n_scenes * sc.trs_per_scene;
    std::vector<SceneInterval> labels;
    for (std::size_t c = 0; c < sc.n_scenes; ++c)
      labels.push_back({static_cast<std::uint32_t>(c * sc.trs_per_scene), static_cast<std::uint32_t>(c)});
    std::vector<Matrix> recall;
    for (std::size_t i = 0; i < spec.m; ++i) {
      Rng rng = Rng::stream(spec.seed, {kRecallNoise, i});
      recall.push_back(noise_matrix(v, t_rec, rng));
    }
    for (const RegionTruth& rt : out.truth.regions) {
      // Each scene's TRs share that scene's pattern in the shared space.
      Matrix expanded(rt.region.k_true, t_rec);
      for (std::size_t j = 0; j < rt.region.k_true; ++j)
        for (std::size_t c = 0; c < t_rec; ++c) expanded(j, c) = rt.scene_patterns(j, c / sc.trs_per_scene);
      const double snr = rt.region.snr_db == -INFINITY ? -INFINITY : sc.snr_db;
      for (std::size_t i = 0; i < spec.m; ++i) plant(recall[i], rt.rows, matmul(rt.q[i], expanded), snr);
    }
    out.recall = make_dataset(std::move(recall), mask, spec.tr_seconds, std::move(labels));
  }
  return out;
}

void write_truth(std::ostream& os, const GroundTruth& truth) {
  binio::put_magic(os, kTruthMagic);
  binio::put<std::uint32_t>(os, truth.dims.nx);
  binio::put<std::uint32_t>(os, truth.dims.ny);
  binio::put<std::uint32_t>(os, truth.dims.nz);
  binio::put_span<std::uint8_t>(os, truth.region_label);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(truth.m));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(truth.regions.size()));
  for (const RegionTruth& rt : truth.regions) {
    const PlantedRegion& r = rt.region;
    for (std::uint32_t c : {r.lo.x, r.lo.y, r.lo.z, r.hi.x, r.hi.y, r.hi.z}) binio::put<std::uint32_t>(os, c);
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(r.k_true));
    binio::put<double>(os, r.snr_db);
    binio::put<std::uint8_t>(os, static_cast<std::uint8_t>(r.kind));
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(rt.s0.cols()));
    binio::put_span(os, rt.s0.values());
    for (const Matrix& q : rt.q) binio::put_span(os, q.values());
    binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(rt.scene_patterns.cols()));
    binio::put_span(os, rt.scene_patterns.values());
  }
  if (!os) throw FormatError("write_truth: stream error");
}

GroundTruth read_truth(std::istream& is) {
  binio::expect_magic(is, kTruthMagic);
  GroundTruth truth;
  truth.dims.nx = binio::get<std::uint32_t>(is, "nx");
  truth.dims.ny = binio::get<std::uint32_t>(is, "ny");
  truth.dims.nz = binio::get<std::uint32_t>(is, "nz");
  truth.region_label.resize(truth.dims.count());
  binio::get_span<std::uint8_t>(is, truth.region_label, "region labels");
  truth.m = binio::get<std::uint32_t>(is, "subject count");
  const auto n = binio::get<std::uint32_t>(is, "region count");
  const VolumeGrid grid(Mask::full(truth.dims));
  for (std::uint32_t r = 0; r < n; ++r) {
    RegionTruth rt;
    auto& reg = rt.region;
    reg.lo.x = binio::get<std::uint32_t>(is, "box");
    reg.lo.y = binio::get<std::uint32_t>(is, "box");
    reg.lo.z = binio::get<std::uint32_t>(is, "box");
    reg.hi.x = binio::get<std::uint32_t>(is, "box");
    reg.hi.y = binio::get<std::uint32_t>(is, "box");
    reg.hi.z = binio::get<std::uint32_t>(is, "box");
    if (reg.hi.x > truth.dims.nx || reg.hi.y > truth.dims.ny || reg.hi.z > truth.dims.nz || reg.lo.x >= reg.hi.x ||
        reg.lo.y >= reg.hi.y || reg.lo.z >= reg.hi.z)
      throw FormatError("truth: invalid region box");
    reg.k_true = binio::get<std::uint32_t>(is, "k_true");
    reg.snr_db = binio::get<double>(is, "snr");
    const auto kind = binio::get<std::uint8_t>(is, "source kind");
    if (kind > 2) throw FormatError("truth: unknown source kind");
    reg.kind = static_cast<SourceKind>(kind);
    const auto t = binio::get<std::uint32_t>(is, "t");
    rt.rows = box_rows(grid, reg);
    std::vector<double> s0(reg.k_true * t);
    binio::get_span<double>(is, s0, "sources");
    rt.s0 = Matrix(reg.k_true, t, std::move(s0));
    for (std::size_t i = 0; i < truth.m; ++i) {
      std::vector<double> q(rt.rows.size() * reg.k_true);
      binio::get_span<double>(is, q, "maps");
      rt.q.emplace_back(rt.rows.size(), reg.k_true, std::move(q));
    }
    const auto ns = binio::get<std::uint32_t>(is, "scene count");
    std::vector<double> sp(reg.k_true * ns);
    binio::get_span<double>(is, sp, "scene patterns");
    rt.scene_patterns = Matrix(ns ? reg.k_true : 0, ns, std::move(sp));
    truth.regions.push_back(std::move(rt));
  }
  if (!binio::at_end(is)) throw FormatError("trailing bytes in truth file");
  return truth;
}

void save_truth(const std::filesystem::path& path, const GroundTruth& truth) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  write_truth(os, truth);
}

GroundTruth load_truth(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open: " + path.string());
  return read_truth(is);
}

}  // namespace msr
