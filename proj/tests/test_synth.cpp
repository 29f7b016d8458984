#include <doctest.h>

#include <cmath>
#include <sstream>

#include "msr/dataset_io.hpp"
#include "msr/error.hpp"
#include "msr/evaluation.hpp"
#include "msr/linalg.hpp"
#include "msr/models.hpp"
#include "msr/searchlight.hpp"
#include "msr/synth.hpp"

using namespace msr;

namespace {

std::string bytes_of(const SubjectDataset& d) {
  std::ostringstream os(std::ios::binary);
  write_dataset(os, d);
  return os.str();
}

std::vector<Matrix> region_data(const SynthOutput& out, std::size_t r) {
  std::vector<Matrix> xs;
  for (const Matrix& x : out.movie.subjects) xs.push_back(gather_rows(x, out.truth.regions[r].rows));
  return xs;
}

}  // namespace

TEST_CASE("empirical snr matches the request") {
  for (double snr : {-5.0, 0.0, 10.0, 20.0}) {
    SynthSpec spec;
    spec.m = 3;
    spec.dims = {8, 8, 8};
    spec.t = 150;
    spec.seed = 21;
    spec.regions.push_back({{1, 1, 1}, {6, 6, 6}, 5, snr, SourceKind::Laplacian});
    const SynthOutput out = generate(spec);
    const RegionTruth& rt = out.truth.regions[0];
    const auto xs = region_data(out, 0);
    for (std::size_t i = 0; i < spec.m; ++i) {
      // Recover the signal amplitude by least squares against the truth.
      const Matrix pattern = matmul(rt.q[i], rt.s0);
      double num = 0, den = 0;
      for (std::size_t j = 0; j < pattern.size(); ++j) {
        num += pattern.data()[j] * xs[i].data()[j];
        den += pattern.data()[j] * pattern.data()[j];
      }
      const Matrix signal = (num / den) * pattern;
      const double measured = 10 * std::log10(frobenius_sq(signal) / distance_sq(xs[i], signal));
      CHECK(std::fabs(measured - snr) < 0.5);
    }
  }
}

TEST_CASE("generation is deterministic for a seed") {
  const SynthSpec spec = preset_spec("recall-small", 7);
  const SynthOutput a = generate(spec), b = generate(spec);
  CHECK(bytes_of(a.movie) == bytes_of(b.movie));
  CHECK(bytes_of(*a.recall) == bytes_of(*b.recall));
  std::ostringstream ta(std::ios::binary), tb(std::ios::binary);
  write_truth(ta, a.truth);
  write_truth(tb, b.truth);
  CHECK(ta.str() == tb.str());
  const SynthOutput c = generate(preset_spec("recall-small", 8));
  CHECK(bytes_of(a.movie) != bytes_of(c.movie));
}

TEST_CASE("truth sidecar round trip") {
  const SynthOutput out = generate(preset_spec("recall-small", 3));
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_truth(ss, out.truth);
  const GroundTruth back = read_truth(ss);
  CHECK(back.dims == out.truth.dims);
  CHECK(back.region_label == out.truth.region_label);
  REQUIRE(back.regions.size() == 1);
  CHECK(back.regions[0].s0 == out.truth.regions[0].s0);
  CHECK(back.regions[0].q == out.truth.regions[0].q);
  CHECK(back.regions[0].rows == out.truth.regions[0].rows);
  CHECK(back.regions[0].scene_patterns == out.truth.regions[0].scene_patterns);
  CHECK(back.regions[0].region.snr_db == 10.0);

  std::istringstream bad(ss.str().substr(0, 40), std::ios::binary);
  CHECK_THROWS_AS(read_truth(bad), FormatError);
}

TEST_CASE("noise-free regions are fitted exactly by srm") {
  SynthSpec spec;
  spec.m = 4;
  spec.dims = {6, 6, 6};
  spec.t = 80;
  spec.regions.push_back({{0, 0, 0}, {5, 5, 5}, 6, INFINITY, SourceKind::Gaussian});
  const SynthOutput out = generate(spec);
  const auto xs = region_data(out, 0);
  FitConfig cfg;
  cfg.k = 6;
  cfg.max_iter = 300;
  const FactorFit fit = fit_srm(xs, cfg);
  CHECK(srm_objective(xs, fit.w, fit.s) < 1e-8);
  // Outside the region the data stays pure unit noise.
  double ss = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < out.movie.voxel_count(); ++r) {
    if (out.truth.region_label[out.movie.grid.flat_of_row(r)] != 0) continue;
    for (double v : out.movie.subjects[0].row(r)) ss += v * v;
    n += spec.t;
  }
  CHECK(ss / static_cast<double>(n) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("a signal-free region stays near chance") {
  SynthSpec spec;
  spec.m = 5;
  spec.dims = {5, 5, 5};
  spec.t = 120;
  spec.seed = 4;
  spec.regions.push_back({{0, 0, 0}, {5, 5, 5}, 5, -INFINITY, SourceKind::Laplacian});
  const SynthOutput out = generate(spec);
  FitConfig cfg;
  cfg.k = 5;
  const FoldReport r = evaluate_time_segment(ModelId::SRM, region_data(out, 0), cfg, EvalSpec{});
  CHECK(r.counts.accuracy() <= 3 * r.counts.chance());
}

TEST_CASE("sweep accuracy separates an informative region from a noise region") {
  SynthSpec spec;
  spec.m = 5;
  spec.dims = {16, 7, 7};
  spec.t = 60;
  spec.seed = 9;
  spec.regions.push_back({{0, 0, 0}, {7, 7, 7}, 4, 0.0, SourceKind::SinusoidMix});
  spec.regions.push_back({{9, 0, 0}, {16, 7, 7}, 4, -INFINITY, SourceKind::Laplacian});
  const SynthOutput out = generate(spec);
  const SearchlightIndex index = build_searchlights(out.movie.grid, out.movie.mask);
  SweepConfig cfg;
  cfg.k_grid = {4};
  cfg.eval.segment_len = 5;
  const ResultMaps maps = sweep(out.movie, index, cfg);
  std::vector<double> pos, neg;
  for (const Coord& c : index.centers) {
    const std::size_t f = index.dims.flat(c.x, c.y, c.z);
    const auto label = out.truth.region_label[f];
    if (label == 1) pos.push_back(maps.accuracy[f]);
    if (label == 2) neg.push_back(maps.accuracy[f]);
  }
  REQUIRE(!pos.empty());
  REQUIRE(!neg.empty());
  double wins = 0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  CHECK(wins / static_cast<double>(pos.size() * neg.size()) > 0.95);
}

TEST_CASE("recall runs carry scene labels") {
  const SynthOutput out = generate(preset_spec("recall-small", 1));
  REQUIRE(out.recall);
  CHECK(out.recall->tr_count() == 200);
  CHECK(out.recall->labels.size() == 50);
  CHECK(out.recall->labels[3].start_tr == 12);
  CHECK(out.recall->labels[3].scene_id == 3);
  CHECK_FALSE(generate(preset_spec("planted-small", 1)).recall);
}

TEST_CASE("infeasible specs") {
  SynthSpec spec;
  spec.dims = {6, 6, 6};
  spec.regions.push_back({{0, 0, 0}, {7, 6, 6}, 3, 10, SourceKind::Laplacian});
  CHECK_THROWS_AS(generate(spec), SpecError);
  spec.regions[0] = {{0, 0, 0}, {6, 6, 6}, 126, 10, SourceKind::Laplacian};
  CHECK_THROWS_AS(generate(spec), SpecError);
  spec.regions[0] = {{0, 0, 0}, {2, 2, 2}, 9, 10, SourceKind::Laplacian};
  CHECK_THROWS_AS(generate(spec), SpecError);
  spec.regions[0] = {{0, 0, 0}, {3, 3, 3}, 2, NAN, SourceKind::Laplacian};
  CHECK_THROWS_AS(generate(spec), SpecError);
  spec.regions[0] = {{0, 0, 0}, {3, 3, 3}, 2, 10, SourceKind::Laplacian};
  spec.regions.push_back({{2, 2, 2}, {4, 4, 4}, 2, 10, SourceKind::Laplacian});
  CHECK_THROWS_AS(generate(spec), SpecError);
  spec.regions.pop_back();
  spec.m = 0;
  CHECK_THROWS_AS(generate(spec), SpecError);
  CHECK_THROWS_AS(preset_spec("huge", 1), SpecError);
  CHECK_THROWS_AS(parse_source_kind("uniform"), SpecError);
  CHECK(parse_source_kind("Sinusoid-Mix") == SourceKind::SinusoidMix);
}
