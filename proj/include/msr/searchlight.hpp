#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "msr/evaluation.hpp"
#include "msr/models.hpp"
#include "msr/volume.hpp"

namespace msr {

inline const std::vector<std::size_t> kDefaultKGrid{10, 25, 50, 75, 100, 125};

struct SweepConfig {
  ModelId model = ModelId::SRM;
  std::vector<std::size_t> k_grid = kDefaultKGrid;
  EvalSpec eval;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  int max_iter = 100;
  double tol = 1e-6;
  Contrast contrast = Contrast::LogCosh;
  std::size_t k1 = 0;  // SR-GICA first stage; 0 = min(cube size, training TRs)
};

/// Inputs for the scene-recall protocol: recall runs on the same grid.
struct RecallData {
  const SubjectDataset* dataset = nullptr;
  SceneTable table;
};

enum MapFlags : std::uint8_t {
  kDefined = 1,
  kNotConverged = 2,  // some fit hit max_iter
  kSkippedK = 4,      // some k in the grid was infeasible
};

struct CenterDiagnostics {
  Coord center;
  int max_iterations = 0;
  bool all_converged = true;
  std::vector<std::size_t> skipped_k;
  std::vector<double> accuracy_per_k;  // NaN for skipped k, in k_grid order
};

struct ResultMaps {
  GridDims dims;
  std::vector<double> accuracy;     // NaN where absent
  std::vector<std::uint16_t> best_k;  // 0 where absent
  std::vector<std::uint8_t> flags;
  std::vector<CenterDiagnostics> centers;

  static ResultMaps empty(GridDims dims);
  bool defined(std::size_t flat) const { return (flags[flat] & kDefined) != 0; }
  std::size_t defined_count() const;
};

/// Seed for a (center, k) evaluation; depends only on the center position.
std::uint64_t center_seed(std::uint64_t seed, std::size_t center_flat, std::size_t k);

/// Fit configuration used for one (center, k).
FitConfig center_fit_config(const SweepConfig& cfg, std::size_t center_flat, std::size_t k);

/// Accuracy for every k at one center. Returns the per-k trial counts (empty
/// optional for infeasible k) and diagnostics.
struct CenterResult {
  std::vector<std::optional<TrialCount>> per_k;
  CenterDiagnostics diagnostics;
};
CenterResult evaluate_center(const SubjectDataset& dataset, const SearchlightIndex& index, std::size_t center_id,
                             const SweepConfig& cfg, const RecallData* recall = nullptr);

/// Runs the model + protocol over every searchlight center and keeps the best
/// k per center (ties go to the smaller k). Deterministic for a given seed
/// regardless of cfg.threads.
ResultMaps sweep(const SubjectDataset& dataset, const SearchlightIndex& index, const SweepConfig& cfg,
                 const RecallData* recall = nullptr);

/// Marks voxels with accuracy below `floor` absent. floor must lie in [0, 1].
ResultMaps threshold_map(const ResultMaps& maps, double floor);

/// Single accuracy from all centers' shared responses (each at its best k),
/// concatenated along the feature axis.
TrialCount aggregate_accuracy(const SubjectDataset& dataset, const SearchlightIndex& index, const ResultMaps& maps,
                              const SweepConfig& cfg, const RecallData* recall = nullptr);

/// One fit over every in-mask voxel at cfg.k (SR-GICA uses cfg.k1 for its
/// first stage, capped at min(v, t)).
FoldReport whole_volume_accuracy(const SubjectDataset& dataset, ModelId model, const FitConfig& cfg,
                                 const EvalSpec& spec, const RecallData* recall = nullptr);

// "MSRM1", u32 nx, u32 ny, u32 nz, then per voxel (x-fastest):
// f64 accuracy (NaN when absent), u16 k (0 when absent), u8 flags.
inline constexpr const char* kMapsMagic = "MSRM1";
void write_maps(std::ostream& os, const ResultMaps& maps);
ResultMaps read_maps(std::istream& is);
void save_maps(const std::filesystem::path& path, const ResultMaps& maps);
ResultMaps load_maps(const std::filesystem::path& path);
/// x,y,z,accuracy,k for every defined voxel.
void write_maps_csv(std::ostream& os, const ResultMaps& maps);

}  // namespace msr
