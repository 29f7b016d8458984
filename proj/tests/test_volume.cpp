#include <doctest.h>

#include <algorithm>
#include <random>

#include "msr/error.hpp"
#include "msr/rng.hpp"
#include "msr/volume.hpp"
#include "oracles.hpp"

using namespace msr;

namespace {

Mask random_mask(GridDims d, double keep, std::mt19937_64& gen) {
  std::bernoulli_distribution in(keep);
  std::vector<std::uint8_t> bits(d.count());
  for (auto& b : bits) b = in(gen) ? 1 : 0;
  return Mask(d, std::move(bits));
}

SubjectDataset random_dataset(const Mask& mask, std::size_t m, std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Matrix> xs;
  for (std::size_t i = 0; i < m; ++i) xs.push_back(random_normal(mask.count(), t, rng));
  return make_dataset(std::move(xs), mask, 2.0);
}

}  // namespace

TEST_CASE("flat indexing is x-fastest") {
  const GridDims d{4, 3, 2};
  CHECK(d.flat(1, 2, 1) == 1 + 4 * (2 + 3 * 1));
  CHECK(unflatten(d, d.flat(3, 1, 1)) == Coord{3, 1, 1});
}

TEST_CASE("volume grid maps rows to ascending flat coordinates") {
  const Mask mask(GridDims{3, 2, 1}, {1, 0, 1, 1, 0, 1});
  const VolumeGrid grid(mask);
  CHECK(grid.voxel_count() == 4);
  CHECK(grid.flat_of_row(1) == 2);
  CHECK(grid.row_of_flat(1) == -1);
  CHECK(grid.row_of_flat(5) == 3);
}

TEST_CASE("searchlight enumeration matches brute force on random masks") {
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<std::uint32_t> side(1, 10);
  int instances = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const GridDims d{side(gen), side(gen), side(gen)};
    const double keep = trial % 4 == 0 ? 1.0 : 0.85 + 0.15 * (trial % 3) / 2.0;
    const Mask mask = random_mask(d, keep, gen);
    const VolumeGrid grid(mask);
    const int radius = 1 + trial % 3;
    const SearchlightIndex index = build_searchlights(grid, mask, radius);
    const auto ref = oracle::searchlights(grid, mask, radius);
    REQUIRE(index.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
      CHECK(index.centers[i] == ref[i].center);
      const auto nb = index.neighborhood(i);
      CHECK(std::equal(nb.begin(), nb.end(), ref[i].rows.begin(), ref[i].rows.end()));
    }
    ++instances;
  }
  CHECK(instances >= 100);
}

TEST_CASE("default searchlights on a full grid") {
  const Mask mask = Mask::full({12, 12, 12});
  const SearchlightIndex index = build_searchlights(VolumeGrid(mask), mask);
  CHECK(index.radius == 2);
  CHECK(index.size() == 8 * 8 * 8);
  CHECK(index.cube_size() == 125);
  // Neighbouring centers share a 5x5x4 slab.
  const auto a = index.neighborhood(0), b = index.neighborhood(1);
  std::vector<std::size_t> sa(a.begin(), a.end()), sb(b.begin(), b.end()), common;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
  CHECK(common.size() == 100);
}

TEST_CASE("single center and empty cases") {
  const Mask five = Mask::full({5, 5, 5});
  const auto one = build_searchlights(VolumeGrid(five), five);
  REQUIRE(one.size() == 1);
  CHECK(one.centers[0] == Coord{2, 2, 2});
  const Mask four = Mask::full({4, 9, 9});
  CHECK(build_searchlights(VolumeGrid(four), four).size() == 0);
  CHECK_THROWS_AS(build_searchlights(VolumeGrid(five), five, 4), InvalidInput);
}

TEST_CASE("a hole in the mask removes every cube that contains it") {
  std::vector<std::uint8_t> bits(7 * 7 * 7, 1);
  const GridDims d{7, 7, 7};
  bits[d.flat(3, 3, 3)] = 0;
  const Mask mask(d, bits);
  CHECK(build_searchlights(VolumeGrid(mask), mask).size() == 0);
  CHECK(build_searchlights(VolumeGrid(mask), mask, 1).size() == 5 * 5 * 5 - 27);
}

TEST_CASE("extract_searchlight returns cube rows per subject") {
  const Mask mask = Mask::full({6, 5, 5});
  const SubjectDataset ds = random_dataset(mask, 3, 8, 5);
  const SearchlightIndex index = build_searchlights(ds.grid, mask);
  REQUIRE(index.size() == 2);
  const auto xs = extract_searchlight(ds, index, 1);
  REQUIRE(xs.size() == 3);
  CHECK(xs[2].rows() == 125);
  const std::size_t row = index.neighborhood(1)[7];
  for (std::size_t c = 0; c < 8; ++c) CHECK(xs[2](7, c) == ds.subjects[2](row, c));
  CHECK_THROWS_AS(extract_searchlight(ds, index, 2), IndexError);
}

TEST_CASE("downsampling preserves the block means") {
  std::mt19937_64 gen(3);
  const Mask full = Mask::full({6, 4, 8});
  const SubjectDataset ds = random_dataset(full, 2, 5, 9);
  const SubjectDataset half = downsample_by_2(ds);
  CHECK(half.grid.dims() == GridDims{3, 2, 4});
  CHECK(half.voxel_count() == 24);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 5; ++c) {
      double before = 0, after = 0;
      for (std::size_t r = 0; r < ds.voxel_count(); ++r) before += ds.subjects[i](r, c);
      for (std::size_t r = 0; r < half.voxel_count(); ++r) after += 8 * half.subjects[i](r, c);
      CHECK(after == doctest::Approx(before).epsilon(1e-12));
    }

  const Mask odd = random_mask({5, 3, 7}, 0.6, gen);
  const SubjectDataset ods = random_dataset(odd, 1, 3, 4);
  const SubjectDataset oh = downsample_by_2(ods);
  CHECK(oh.grid.dims() == GridDims{3, 2, 4});
  // Every output voxel is the mean of its in-mask members.
  for (std::size_t r = 0; r < oh.voxel_count(); ++r) {
    const Coord c = unflatten(oh.grid.dims(), oh.grid.flat_of_row(r));
    double sum = 0;
    int n = 0;
    for (std::size_t s = 0; s < ods.voxel_count(); ++s) {
      const Coord o = unflatten(odd.dims(), ods.grid.flat_of_row(s));
      if (o.x / 2 == c.x && o.y / 2 == c.y && o.z / 2 == c.z) {
        sum += ods.subjects[0](s, 1);
        ++n;
      }
    }
    REQUIRE(n > 0);
    CHECK(oh.subjects[0](r, 1) == doctest::Approx(sum / n).epsilon(1e-12));
  }
}

TEST_CASE("dataset validation") {
  const Mask mask = Mask::full({2, 2, 2});
  Rng rng(1);
  std::vector<Matrix> xs{random_normal(8, 4, rng), random_normal(8, 5, rng)};
  CHECK_THROWS_AS(make_dataset(xs, mask, 2.0), ShapeMismatch);
  std::vector<Matrix> ok{random_normal(8, 4, rng)};
  CHECK_THROWS_AS(make_dataset(ok, mask, 0.0), InvalidInput);
  CHECK_THROWS_AS(make_dataset(ok, mask, 1.0, {{2, 0}, {1, 1}}), InvalidInput);
  CHECK_THROWS_AS(make_dataset(ok, mask, 1.0, {{4, 0}}), InvalidInput);
  CHECK_NOTHROW(make_dataset(ok, mask, 1.0, {{0, 3}, {2, 1}}));
}
