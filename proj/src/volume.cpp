#include "msr/volume.hpp"

#include <algorithm>

#include "msr/error.hpp"

namespace msr {

Coord unflatten(const GridDims& dims, std::size_t flat) {
  Coord c;
  c.x = static_cast<std::uint32_t>(flat % dims.nx);
  flat /= dims.nx;
  c.y = static_cast<std::uint32_t>(flat % dims.ny);
  c.z = static_cast<std::uint32_t>(flat / dims.ny);
  return c;
}

Mask::Mask(GridDims dims, std::vector<std::uint8_t> in_mask) : dims_(dims), bits_(std::move(in_mask)) {
  if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) throw InvalidInput("Mask: zero dimension");
  if (bits_.size() != dims_.count()) throw ShapeMismatch("Mask: byte count does not match dims");
  for (auto& b : bits_) b = b ? 1 : 0;
  if (count() == 0) throw InvalidInput("Mask: no voxel in mask");
}

Mask Mask::full(GridDims dims) { return Mask(dims, std::vector<std::uint8_t>(dims.count(), 1)); }

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

VolumeGrid::VolumeGrid(const Mask& mask) : dims_(mask.dims()), row_of_flat_(mask.dims().count(), -1) {
  for (std::size_t f = 0; f < dims_.count(); ++f) {
    if (!mask.at(f)) continue;
    row_of_flat_[f] = static_cast<long>(flat_of_row_.size());
    flat_of_row_.push_back(static_cast<std::uint32_t>(f));
  }
}

void SubjectDataset::validate() const {
  if (subjects.empty()) throw InvalidInput("dataset has no subjects");
  if (!(tr_seconds > 0.0)) throw InvalidInput("dataset: tr_seconds must be positive");
  if (!(grid.dims() == mask.dims())) throw ShapeMismatch("dataset: grid and mask dims differ");
  const std::size_t v = grid.voxel_count();
  const std::size_t t = subjects.front().cols();
  if (t == 0) throw ShapeMismatch("dataset: zero TRs");
  for (const auto& x : subjects) {
    if (x.rows() != v) throw ShapeMismatch("dataset: subject voxel count differs from mask");
    if (x.cols() != t) throw ShapeMismatch("dataset: subjects have differing TR counts");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].start_tr >= t) throw InvalidInput("dataset: label start beyond last TR");
    if (i > 0 && labels[i].start_tr <= labels[i - 1].start_tr)
      throw InvalidInput("dataset: label starts must be strictly increasing");
  }
}

SubjectDataset make_dataset(std::vector<Matrix> subjects, Mask mask, double tr_seconds,
                            std::vector<SceneInterval> labels) {
  SubjectDataset d;
  d.subjects = std::move(subjects);
  d.grid = VolumeGrid(mask);
  d.mask = std::move(mask);
  d.tr_seconds = tr_seconds;
  d.labels = std::move(labels);
  d.validate();
  return d;
}

SubjectDataset downsample_by_2(const SubjectDataset& dataset) {
  const GridDims in = dataset.mask.dims();
  if (in.nx < 2 || in.ny < 2 || in.nz < 2) throw InvalidInput("downsample_by_2: every axis needs >= 2 voxels");
  const GridDims out{(in.nx + 1) / 2, (in.ny + 1) / 2, (in.nz + 1) / 2};

  // Member rows of every output block.
  std::vector<std::vector<std::size_t>> members(out.count());
  for (std::size_t row = 0; row < dataset.grid.voxel_count(); ++row) {
    const Coord c = unflatten(in, dataset.grid.flat_of_row(row));
    members[out.flat(c.x / 2, c.y / 2, c.z / 2)].push_back(row);
  }
  std::vector<std::uint8_t> bits(out.count(), 0);
  for (std::size_t f = 0; f < out.count(); ++f) bits[f] = members[f].empty() ? 0 : 1;
  Mask mask(out, std::move(bits));
  VolumeGrid grid(mask);

  const std::size_t t = dataset.tr_count();
  std::vector<Matrix> subjects;
  subjects.reserve(dataset.subject_count());
  for (const Matrix& x : dataset.subjects) {
    Matrix y(grid.voxel_count(), t);
    for (std::size_t r = 0; r < grid.voxel_count(); ++r) {
      const auto& mem = members[grid.flat_of_row(r)];
      auto dst = y.row(r);
      for (std::size_t src : mem) {
        const auto s = x.row(src);
        for (std::size_t c = 0; c < t; ++c) dst[c] += s[c];
      }
      const double inv = 1.0 / static_cast<double>(mem.size());
      for (double& v : dst) v *= inv;
    }
    subjects.push_back(std::move(y));
  }
  return make_dataset(std::move(subjects), std::move(mask), dataset.tr_seconds, dataset.labels);
}

SearchlightIndex build_searchlights(const VolumeGrid& grid, const Mask& mask, int radius) {
  if (radius < 1 || radius > 3) throw InvalidInput("build_searchlights: radius must be 1, 2 or 3");
  if (!(grid.dims() == mask.dims())) throw ShapeMismatch("build_searchlights: grid and mask dims differ");
  const GridDims d = mask.dims();
  SearchlightIndex index;
  index.dims = d;
  index.radius = radius;
  const long r = radius;

  // Prefix counts of in-mask voxels make the full-cube test O(1) per voxel.
  const long sx = d.nx + 1, sy = d.ny + 1;
  std::vector<long> pre(static_cast<std::size_t>(sx * sy * (d.nz + 1)), 0);
  auto P = [&](long x, long y, long z) -> long& { return pre[static_cast<std::size_t>(x + sx * (y + sy * z))]; };
  for (long z = 1; z <= d.nz; ++z)
    for (long y = 1; y <= d.ny; ++y)
      for (long x = 1; x <= d.nx; ++x)
        P(x, y, z) = (mask.at(x - 1, y - 1, z - 1) ? 1 : 0) + P(x - 1, y, z) + P(x, y - 1, z) +
                     P(x, y, z - 1) - P(x - 1, y - 1, z) - P(x - 1, y, z - 1) - P(x, y - 1, z - 1) +
                     P(x - 1, y - 1, z - 1);
  auto box = [&](long x0, long y0, long z0, long x1, long y1, long z1) {
    return P(x1, y1, z1) - P(x0, y1, z1) - P(x1, y0, z1) - P(x1, y1, z0) + P(x0, y0, z1) +
           P(x0, y1, z0) + P(x1, y0, z0) - P(x0, y0, z0);
  };

  const long side = 2 * r + 1;
  const long full = side * side * side;
  for (long z = r; z + r < d.nz; ++z) {
    for (long y = r; y + r < d.ny; ++y) {
      for (long x = r; x + r < d.nx; ++x) {
        if (box(x - r, y - r, z - r, x + r + 1, y + r + 1, z + r + 1) != full) continue;
        index.centers.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                                 static_cast<std::uint32_t>(z)});
        for (long dz = -r; dz <= r; ++dz)
          for (long dy = -r; dy <= r; ++dy)
            for (long dx = -r; dx <= r; ++dx) {
              const auto f = d.flat(static_cast<std::uint32_t>(x + dx), static_cast<std::uint32_t>(y + dy),
                                    static_cast<std::uint32_t>(z + dz));
              index.rows.push_back(static_cast<std::size_t>(grid.row_of_flat(f)));
            }
      }
    }
  }
  return index;
}

std::vector<Matrix> extract_searchlight(const SubjectDataset& dataset, const SearchlightIndex& index,
                                        std::size_t center_id) {
  if (center_id >= index.size()) throw IndexError("extract_searchlight: center id out of range");
  const auto rows = index.neighborhood(center_id);
  std::vector<Matrix> out;
  out.reserve(dataset.subject_count());
  for (const Matrix& x : dataset.subjects) out.push_back(gather_rows(x, rows));
  return out;
}

}  // namespace msr
