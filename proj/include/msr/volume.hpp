#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "msr/matrix.hpp"

namespace msr {

struct GridDims {
  std::uint32_t nx = 0, ny = 0, nz = 0;

  std::size_t count() const { return std::size_t{nx} * ny * nz; }
  std::size_t flat(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return x + std::size_t{nx} * (y + std::size_t{ny} * z);
  }
  bool contains(long x, long y, long z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz;
  }
  friend bool operator==(const GridDims&, const GridDims&) = default;
};

struct Coord {
  std::uint32_t x = 0, y = 0, z = 0;
  friend bool operator==(const Coord&, const Coord&) = default;
};

Coord unflatten(const GridDims& dims, std::size_t flat);

/// Boolean in-mask flag per voxel (x-fastest order).
class Mask {
 public:
  Mask() = default;
  Mask(GridDims dims, std::vector<std::uint8_t> in_mask);
  static Mask full(GridDims dims);

  const GridDims& dims() const { return dims_; }
  bool at(std::size_t flat) const { return bits_[flat] != 0; }
  bool at(long x, long y, long z) const {
    return dims_.contains(x, y, z) &&
           bits_[dims_.flat(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                            static_cast<std::uint32_t>(z))] != 0;
  }
  std::size_t count() const;
  std::span<const std::uint8_t> bytes() const { return bits_; }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  GridDims dims_;
  std::vector<std::uint8_t> bits_;
};

/// Bijection between in-mask voxels and data rows. Rows follow ascending
/// flat coordinate.
class VolumeGrid {
 public:
  VolumeGrid() = default;
  explicit VolumeGrid(const Mask& mask);

  const GridDims& dims() const { return dims_; }
  std::size_t voxel_count() const { return flat_of_row_.size(); }
  std::uint32_t flat_of_row(std::size_t row) const { return flat_of_row_[row]; }
  /// -1 when the voxel is outside the mask.
  long row_of_flat(std::size_t flat) const { return row_of_flat_[flat]; }
  std::span<const std::uint32_t> flat_coordinates() const { return flat_of_row_; }

  friend bool operator==(const VolumeGrid&, const VolumeGrid&) = default;

 private:
  GridDims dims_;
  std::vector<std::uint32_t> flat_of_row_;
  std::vector<long> row_of_flat_;
};

/// A scene interval starts at `start_tr` and runs until the next interval
/// (or the end of the run).
struct SceneInterval {
  std::uint32_t start_tr = 0;
  std::uint32_t scene_id = 0;
  friend bool operator==(const SceneInterval&, const SceneInterval&) = default;
};

/// m subjects, each a v x t matrix over the same masked grid.
struct SubjectDataset {
  std::vector<Matrix> subjects;
  Mask mask;
  VolumeGrid grid;
  double tr_seconds = 1.0;
  std::vector<SceneInterval> labels;

  std::size_t subject_count() const { return subjects.size(); }
  std::size_t voxel_count() const { return grid.voxel_count(); }
  std::size_t tr_count() const { return subjects.empty() ? 0 : subjects.front().cols(); }

  /// Throws ShapeMismatch / InvalidInput when the invariants do not hold.
  void validate() const;
};

SubjectDataset make_dataset(std::vector<Matrix> subjects, Mask mask, double tr_seconds,
                            std::vector<SceneInterval> labels = {});

/// Block-mean pooling over 2x2x2 blocks; only in-mask members contribute.
SubjectDataset downsample_by_2(const SubjectDataset& dataset);

/// Valid cube neighbourhoods. `rows` holds, for each center, the data rows of
/// its (2r+1)^3 voxels in x-fastest order.
struct SearchlightIndex {
  GridDims dims;
  int radius = 2;
  std::vector<Coord> centers;
  std::vector<std::size_t> rows;

  std::size_t size() const { return centers.size(); }
  std::size_t cube_size() const {
    const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
    return side * side * side;
  }
  std::span<const std::size_t> neighborhood(std::size_t center_id) const {
    return {rows.data() + center_id * cube_size(), cube_size()};
  }
};

/// Centers whose whole cube lies inside the volume and inside the mask,
/// x-fastest lexicographic order. Radius 1, 2 (default) or 3.
SearchlightIndex build_searchlights(const VolumeGrid& grid, const Mask& mask, int radius = 2);

/// Per-subject cube x t submatrices, in neighbourhood order.
std::vector<Matrix> extract_searchlight(const SubjectDataset& dataset,
                                        const SearchlightIndex& index, std::size_t center_id);

}  // namespace msr
