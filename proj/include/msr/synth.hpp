#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msr/matrix.hpp"
#include "msr/volume.hpp"

namespace msr {

enum class SourceKind : std::uint8_t { Laplacian = 0, Gaussian = 1, SinusoidMix = 2 };

std::string_view source_kind_name(SourceKind kind);
SourceKind parse_source_kind(std::string_view name);

/// Box [lo, hi) in voxel coordinates carrying a shared response.
struct PlantedRegion {
  Coord lo, hi;
  std::size_t k_true = 5;
  double snr_db = 10.0;  // +inf: no noise inside the box, -inf: no signal
  SourceKind kind = SourceKind::Laplacian;

  std::size_t voxel_count() const {
    return std::size_t{hi.x - lo.x} * (hi.y - lo.y) * (hi.z - lo.z);
  }
  bool contains(const Coord& c) const {
    return c.x >= lo.x && c.x < hi.x && c.y >= lo.y && c.y < hi.y && c.z >= lo.z && c.z < hi.z;
  }
};

/// Recall runs: n_scenes consecutive scenes of trs_per_scene TRs each.
struct SceneSpec {
  std::size_t n_scenes = 50;
  std::size_t trs_per_scene = 4;
  double snr_db = 10.0;
};

struct SynthSpec {
  std::size_t m = 5;
  GridDims dims{12, 12, 12};
  std::vector<PlantedRegion> regions;
  std::size_t t = 120;
  std::optional<SceneSpec> scenes;
  std::uint64_t seed = 0;
  double tr_seconds = 2.0;

  /// Throws SpecError when infeasible.
  void validate() const;
};

/// Named presets: "planted-small", "noise-small", "recall-small", "ica-small".
SynthSpec preset_spec(std::string_view name, std::uint64_t seed);

struct RegionTruth {
  PlantedRegion region;
  std::vector<std::size_t> rows;  // data rows of the box voxels, x-fastest
  Matrix s0;                      // k_true x t shared sources (unit variance rows)
  std::vector<Matrix> q;          // per subject, |box| x k_true orthonormal
  Matrix scene_patterns;          // k_true x n_scenes (empty without scenes)
};

struct GroundTruth {
  GridDims dims;
  std::size_t m = 0;
  std::vector<std::uint8_t> region_label;  // 0 outside, r + 1 inside region r
  std::vector<RegionTruth> regions;
};

struct SynthOutput {
  SubjectDataset movie;
  std::optional<SubjectDataset> recall;
  GroundTruth truth;
};

/// Inside every region subject i sees a * q_i s0 + noise with unit-variance
/// Gaussian noise and `a` set from the realised noise power so the region
/// SNR equals the request; outside the regions data is pure noise.
SynthOutput generate(const SynthSpec& spec);

// "MSRG1", u32 nx, ny, nz, nx*ny*nz u8 region labels, u32 m, u32 n_regions,
// then per region: u32 lo.x lo.y lo.z hi.x hi.y hi.z, u32 k_true, f64 snr_db,
// u8 kind, u32 t, k*t f64 s0, m blocks of |box|*k f64 q_i,
// u32 n_scenes, k*n_scenes f64 scene patterns.
inline constexpr const char* kTruthMagic = "MSRG1";
void write_truth(std::ostream& os, const GroundTruth& truth);
GroundTruth read_truth(std::istream& is);
void save_truth(const std::filesystem::path& path, const GroundTruth& truth);
GroundTruth load_truth(const std::filesystem::path& path);

}  // namespace msr
