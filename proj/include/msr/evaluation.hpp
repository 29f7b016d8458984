#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "msr/matrix.hpp"
#include "msr/models.hpp"
#include "msr/svm.hpp"
#include "msr/volume.hpp"

namespace msr {

enum class Protocol { TimeSegment, SceneRecall };

std::string_view protocol_name(Protocol p);
Protocol parse_protocol(std::string_view name);

struct EvalSpec {
  Protocol protocol = Protocol::TimeSegment;
  std::size_t segment_len = 9;
  SvmConfig svm;
};

/// Half-open TR range.
struct TrRange {
  std::size_t begin = 0, end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const TrRange&, const TrRange&) = default;
};

/// First half [0, ceil(t/2)), second half the rest.
std::pair<TrRange, TrRange> split_halves(std::size_t t);

/// Columns of every subject restricted to `range`.
std::vector<Matrix> slice_trs(std::span<const Matrix> xs, TrRange range);
std::vector<Matrix> zscore_all(std::span<const Matrix> xs);

/// Correct/total trial counts; accuracies are always pooled over trials.
struct TrialCount {
  std::size_t correct = 0;
  std::size_t trials = 0;
  /// sum over trials of 1 / (number of classes or candidate starts)
  double chance_mass = 0;

  double accuracy() const { return trials ? static_cast<double>(correct) / static_cast<double>(trials) : 0.0; }
  double chance() const { return trials ? chance_mass / static_cast<double>(trials) : 0.0; }
  TrialCount& operator+=(const TrialCount& o) {
    correct += o.correct;
    trials += o.trials;
    chance_mass += o.chance_mass;
    return *this;
  }
};

/// Candidate start positions for segments of `segment_len` in `test_len` TRs.
std::size_t segment_candidates(std::size_t test_len, std::size_t segment_len);

/// Chance of time-segment matching pooled over both halves of a t-TR run.
double time_segment_chance(std::size_t t, std::size_t segment_len);

/// Correlations closer than this to the best candidate count as ties.
inline constexpr double kTieTolerance = 1e-12;

/// Leave-one-subject-out segment matching on shared-space responses (one
/// k x T matrix per subject). Every start position of every subject is a
/// trial; starts overlapping the true segment (other than the true start
/// itself) are excluded from the candidates; ties go to the smaller start.
/// A constant test block counts as a miss; constant candidates are skipped.
/// Throws ProtocolError when T < segment_len or fewer than two subjects.
TrialCount match_segments(std::span<const Matrix> projected, std::size_t segment_len);

/// Projects every subject's held-out data through `fit` and matches segments.
TrialCount time_segment_match(const FactorFit& fit, std::span<const Matrix> test_data, const EvalSpec& spec);

/// Diagnostics from a two-fold run.
struct FoldReport {
  TrialCount counts;
  bool all_converged = true;
  int max_iterations = 0;
};

/// Seed used for fold 0 (train on the first half) or fold 1.
std::uint64_t fold_seed(std::uint64_t seed, int fold);

/// Full protocol for one data block: z-score each half, fit on one half,
/// test on the other, swap, pool the trials.
FoldReport evaluate_time_segment(ModelId model, std::span<const Matrix> xs, const FitConfig& cfg,
                                 const EvalSpec& spec);

/// Same, on halves that are already z-scored.
FoldReport evaluate_time_segment_halves(ModelId model, std::span<const Matrix> first,
                                        std::span<const Matrix> second, const FitConfig& cfg,
                                        const EvalSpec& spec);

/// Scene id per recall interval, per subject, plus each subject's TR count.
struct SceneTable {
  std::vector<std::vector<SceneInterval>> intervals;
  std::vector<std::size_t> tr_counts;

  std::size_t subject_count() const { return intervals.size(); }
};

SceneTable scene_table_from_labels(const std::vector<SceneInterval>& labels, std::size_t t, std::size_t m);

/// Scene ids recalled by at least two subjects.
std::vector<std::uint32_t> usable_scenes(const SceneTable& table);

/// Per subject: scene id -> mean recall TR vector (voxel space).
std::vector<std::map<std::uint32_t, std::vector<double>>> scene_means(std::span<const Matrix> recall,
                                                                       const SceneTable& table);

/// Per subject: scene id -> shared-space scene vector.
using SceneVectors = std::vector<std::map<std::uint32_t, std::vector<double>>>;
SceneVectors project_scenes(const FactorFit& fit, std::span<const Matrix> recall, const SceneTable& table);

/// Leave-one-subject-out linear classification of scene vectors. Scenes seen
/// by fewer than two subjects are skipped; ProtocolError when none remain.
TrialCount classify_scenes(const SceneVectors& vectors, const SvmConfig& svm);

TrialCount scene_recall_match(const FactorFit& fit, std::span<const Matrix> recall, const SceneTable& table,
                              const EvalSpec& spec);

/// z-scores movie and recall data, fits on the whole movie, classifies recall.
FoldReport evaluate_scene_recall(ModelId model, std::span<const Matrix> movie, std::span<const Matrix> recall,
                                 const SceneTable& table, const FitConfig& cfg, const EvalSpec& spec);

/// One line of the evaluation report CSV.
struct ReportRow {
  Protocol protocol = Protocol::TimeSegment;
  std::string model;
  std::string k;  // a number or "best"
  double accuracy = 0;
  double chance = 0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
};

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace msr
