#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "msr/error.hpp"
#include "msr/searchlight.hpp"
#include "msr/synth.hpp"

using namespace msr;

namespace {

SynthOutput small_volume(std::uint64_t seed, bool scenes = false) {
  SynthSpec spec;
  spec.m = 4;
  spec.dims = {7, 6, 6};
  spec.t = 40;
  spec.seed = seed;
  spec.regions.push_back({{0, 0, 0}, {4, 6, 6}, 3, 0.0, SourceKind::Laplacian});
  if (scenes) spec.scenes = SceneSpec{12, 3, 10.0};
  return generate(spec);
}

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.k_grid = {2, 4};
  cfg.eval.segment_len = 5;
  cfg.seed = 3;
  return cfg;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("sweeps are bit-identical across thread counts") {
  const SynthOutput data = small_volume(1);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  REQUIRE(index.size() == 3 * 2 * 2);
  for (ModelId id : {ModelId::SRM, ModelId::SRICA}) {
    SweepConfig cfg = small_config();
    cfg.model = id;
    cfg.threads = 1;
    const ResultMaps serial = sweep(data.movie, index, cfg);
    for (std::size_t threads : {2u, 3u, 8u}) {
      cfg.threads = threads;
      const ResultMaps parallel = sweep(data.movie, index, cfg);
      CHECK(same_bits(serial.accuracy, parallel.accuracy));
      CHECK(serial.best_k == parallel.best_k);
      CHECK(serial.flags == parallel.flags);
    }
    CHECK(serial.defined_count() == index.size());
  }
}

TEST_CASE("a center's result does not depend on the rest of the sweep") {
  const SynthOutput data = small_volume(2);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  const SweepConfig cfg = small_config();
  const ResultMaps maps = sweep(data.movie, index, cfg);
  const CenterResult alone = evaluate_center(data.movie, index, 5, cfg);
  const Coord c = index.centers[5];
  const std::size_t flat = index.dims.flat(c.x, c.y, c.z);
  double best = -1;
  for (const auto& tc : alone.per_k)
    if (tc) best = std::max(best, tc->accuracy());
  CHECK(maps.accuracy[flat] == best);
  CHECK(center_seed(3, flat, 2) != center_seed(3, flat, 4));
  CHECK(center_seed(3, flat, 2) != center_seed(4, flat, 2));
}

TEST_CASE("best k ties go to the smaller k and infeasible k are flagged") {
  const SynthOutput data = small_volume(3);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  SweepConfig cfg = small_config();
  cfg.k_grid = {3, 3, 500};
  const ResultMaps maps = sweep(data.movie, index, cfg);
  for (std::size_t f = 0; f < maps.flags.size(); ++f) {
    if (!maps.defined(f)) continue;
    CHECK(maps.best_k[f] == 3);
    CHECK((maps.flags[f] & kSkippedK) != 0);
  }
  CHECK(maps.centers.front().skipped_k == std::vector<std::size_t>{500});
  CHECK(std::isnan(maps.centers.front().accuracy_per_k[2]));

  cfg.k_grid = {500};
  const ResultMaps none = sweep(data.movie, index, cfg);
  CHECK(none.defined_count() == 0);
}

TEST_CASE("non-converged fits are flagged") {
  const SynthOutput data = small_volume(4);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  SweepConfig cfg = small_config();
  cfg.max_iter = 1;
  cfg.tol = 1e-15;
  const ResultMaps maps = sweep(data.movie, index, cfg);
  std::size_t flagged = 0;
  for (auto f : maps.flags) flagged += (f & kNotConverged) != 0;
  CHECK(flagged == index.size());
}

TEST_CASE("thresholding") {
  ResultMaps maps = ResultMaps::empty({2, 1, 1});
  maps.accuracy = {0.2, 0.6};
  maps.best_k = {10, 25};
  maps.flags = {kDefined, kDefined | kNotConverged};
  const ResultMaps t = threshold_map(maps, 0.5);
  CHECK_FALSE(t.defined(0));
  CHECK(std::isnan(t.accuracy[0]));
  CHECK(t.best_k[0] == 0);
  CHECK(t.defined(1));
  CHECK(t.flags[1] == (kDefined | kNotConverged));
  CHECK(threshold_map(maps, 0.0).defined_count() == 2);
  CHECK_THROWS_AS(threshold_map(maps, 1.5), InvalidInput);
  CHECK_THROWS_AS(threshold_map(maps, -0.1), InvalidInput);
}

TEST_CASE("maps round trip and csv") {
  ResultMaps maps = ResultMaps::empty({2, 2, 1});
  maps.accuracy[3] = 0.75;
  maps.best_k[3] = 25;
  maps.flags[3] = kDefined | kSkippedK;
  maps.flags[0] = kSkippedK;
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_maps(ss, maps);
  CHECK(ss.str().size() == 5 + 12 + 4 * (8 + 2 + 1));
  const ResultMaps back = read_maps(ss);
  CHECK(back.dims == maps.dims);
  CHECK(same_bits(back.accuracy, maps.accuracy));
  CHECK(back.best_k == maps.best_k);
  CHECK(back.flags == maps.flags);

  std::ostringstream csv;
  write_maps_csv(csv, maps);
  CHECK(csv.str() == "x,y,z,accuracy,k\n1,1,0,0.75,25\n");

  std::istringstream bad(ss.str().substr(0, 20), std::ios::binary);
  CHECK_THROWS_AS(read_maps(bad), FormatError);
}

TEST_CASE("single-center volume") {
  SynthSpec spec;
  spec.m = 3;
  spec.dims = {5, 5, 5};
  spec.t = 30;
  spec.regions.push_back({{0, 0, 0}, {5, 5, 5}, 2, 10.0, SourceKind::Laplacian});
  const SynthOutput data = generate(spec);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  REQUIRE(index.size() == 1);
  SweepConfig cfg = small_config();
  const ResultMaps maps = sweep(data.movie, index, cfg);
  CHECK(maps.defined_count() == 1);
  CHECK(maps.defined(index.dims.flat(2, 2, 2)));
  const TrialCount agg = aggregate_accuracy(data.movie, index, maps, cfg);
  CHECK(agg.accuracy() == maps.accuracy[index.dims.flat(2, 2, 2)]);
}

TEST_CASE("aggregate accuracy and whole-volume fits") {
  const SynthOutput data = small_volume(5);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  const SweepConfig cfg = small_config();
  const ResultMaps maps = sweep(data.movie, index, cfg);
  const TrialCount agg = aggregate_accuracy(data.movie, index, maps, cfg);
  CHECK(agg.trials == 4 * 2 * 16);
  CHECK(agg.accuracy() > 5 * agg.chance());

  FitConfig fc;
  fc.k = 3;
  EvalSpec spec;
  spec.segment_len = 5;
  const FoldReport whole = whole_volume_accuracy(data.movie, ModelId::SRM, fc, spec);
  CHECK(whole.counts.accuracy() > 5 * whole.counts.chance());

  ResultMaps empty = ResultMaps::empty(index.dims);
  CHECK_THROWS_AS(aggregate_accuracy(data.movie, index, empty, cfg), ProtocolError);
}

TEST_CASE("scene-recall sweep") {
  const SynthOutput data = small_volume(6, true);
  const SearchlightIndex index = build_searchlights(data.movie.grid, data.movie.mask);
  SweepConfig cfg = small_config();
  cfg.eval.protocol = Protocol::SceneRecall;
  CHECK_THROWS_AS(sweep(data.movie, index, cfg), ProtocolError);
  RecallData recall{&*data.recall, scene_table_from_labels(data.recall->labels, data.recall->tr_count(), 4)};
  const ResultMaps maps = sweep(data.movie, index, cfg, &recall);
  CHECK(maps.defined_count() == index.size());
  double mean = 0;
  for (std::size_t f = 0; f < maps.accuracy.size(); ++f)
    if (maps.defined(f)) mean += maps.accuracy[f] / static_cast<double>(index.size());
  CHECK(mean > 3.0 / 12.0);
}
