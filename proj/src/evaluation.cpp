#include "msr/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <set>

#include "msr/error.hpp"
#include "msr/linalg.hpp"
#include "msr/rng.hpp"
#include "msr/simd/kernels.hpp"

namespace msr {

namespace {

// Row-major flattening of the k x len block starting at column `start`,
// centered and scaled to unit norm. Returns false for a constant block.
bool normalized_block(const Matrix& m, std::size_t start, std::size_t len, double* out) {
  const auto& kern = simd::active();
  const std::size_t n = m.rows() * len;
  for (std::size_t r = 0; r < m.rows(); ++r) std::copy_n(m.row(r).data() + start, len, out + r * len);
  const double mean = kern.sum(out, n) / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out[i] -= mean;
  const double norm = std::sqrt(kern.sum_sq(out, n));
  if (!(norm > 0.0)) return false;
  kern.scale(1.0 / norm, out, n);
  return true;
}

struct BlockSet {
  Matrix rows;              // one normalized block per start position
  std::vector<bool> valid;
};

BlockSet all_blocks(const Matrix& m, std::size_t len, std::size_t count) {
  BlockSet b{Matrix(count, m.rows() * len), std::vector<bool>(count)};
  for (std::size_t p = 0; p < count; ++p) b.valid[p] = normalized_block(m, p, len, b.rows.row(p).data());
  return b;
}

}  // namespace

std::string_view protocol_name(Protocol p) {
  return p == Protocol::TimeSegment ? "time-segment" : "scene-recall";
}

Protocol parse_protocol(std::string_view name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "timesegment") return Protocol::TimeSegment;
  if (s == "scenerecall") return Protocol::SceneRecall;
  throw InvalidInput("unknown protocol: " + std::string(name));
}

std::pair<TrRange, TrRange> split_halves(std::size_t t) {
  if (t < 2) throw ProtocolError("split_halves: needs at least two TRs");
  const std::size_t mid = (t + 1) / 2;
  return {TrRange{0, mid}, TrRange{mid, t}};
}

std::vector<Matrix> slice_trs(std::span<const Matrix> xs, TrRange range) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const Matrix& x : xs) out.push_back(col_block(x, range.begin, range.end));
  return out;
}

std::vector<Matrix> zscore_all(std::span<const Matrix> xs) {
  std::vector<Matrix> out;
  out.reserve(xs.size());
  for (const Matrix& x : xs) out.push_back(zscore_rows(x));
  return out;
}

std::size_t segment_candidates(std::size_t test_len, std::size_t segment_len) {
  if (segment_len == 0) throw ProtocolError("segment length must be at least 1");
  if (test_len < segment_len) throw ProtocolError("test half shorter than the segment length");
  return test_len - segment_len + 1;
}

double time_segment_chance(std::size_t t, std::size_t segment_len) {
  const auto [first, second] = split_halves(t);
  const double a = static_cast<double>(segment_candidates(first.size(), segment_len));
  const double b = static_cast<double>(segment_candidates(second.size(), segment_len));
  // Each fold contributes one trial per candidate start, at chance 1/candidates.
  return 2.0 / (a + b);
}

TrialCount match_segments(std::span<const Matrix> projected, std::size_t segment_len) {
  const std::size_t m = projected.size();
  if (m < 2) throw ProtocolError("segment matching needs at least two subjects");
  const std::size_t k = projected.front().rows();
  const std::size_t t = projected.front().cols();
  for (const Matrix& p : projected)
    if (p.rows() != k || p.cols() != t) throw ShapeMismatch("match_segments: subjects differ in shape");
  const std::size_t ncand = segment_candidates(t, segment_len);
  const std::size_t n = k * segment_len;
  const auto& kern = simd::active();

  Matrix total(k, t);
  for (const Matrix& p : projected) total += p;

  TrialCount out;
  std::vector<double> score(ncand);
  for (std::size_t i = 0; i < m; ++i) {
    Matrix reference = total - projected[i];
    kern.scale(1.0 / static_cast<double>(m - 1), reference.data(), reference.size());
    const BlockSet ref = all_blocks(reference, segment_len, ncand);
    const BlockSet test = all_blocks(projected[i], segment_len, ncand);
    for (std::size_t truth = 0; truth < ncand; ++truth) {
      ++out.trials;
      out.chance_mass += 1.0 / static_cast<double>(ncand);
      if (!test.valid[truth]) continue;
      const double* u = test.rows.row(truth).data();
      double best = -INFINITY;
      for (std::size_t c = 0; c < ncand; ++c) {
        score[c] = -INFINITY;
        if (c != truth && (c > truth ? c - truth : truth - c) < segment_len) continue;
        if (!ref.valid[c]) continue;
        score[c] = kern.dot(ref.rows.row(c).data(), u, n);
        best = std::max(best, score[c]);
      }
      // Scores within kTieTolerance of the best tie; the smallest start wins.
      std::size_t best_start = ncand;
      for (std::size_t c = 0; c < ncand && best > -INFINITY; ++c)
        if (score[c] >= best - kTieTolerance) {
          best_start = c;
          break;
        }
      if (best_start == truth) ++out.correct;
    }
  }
  return out;
}

TrialCount time_segment_match(const FactorFit& fit, std::span<const Matrix> test_data, const EvalSpec& spec) {
  if (test_data.size() != fit.subject_count()) throw ShapeMismatch("time_segment_match: subject count differs from fit");
  std::vector<Matrix> projected;
  projected.reserve(test_data.size());
  for (std::size_t i = 0; i < test_data.size(); ++i) projected.push_back(project(fit, test_data[i], i));
  return match_segments(projected, spec.segment_len);
}

std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return mix_seed(seed, {static_cast<std::uint64_t>(fold)});
}

FoldReport evaluate_time_segment(ModelId model, std::span<const Matrix> xs, const FitConfig& cfg,
                                 const EvalSpec& spec) {
  if (xs.empty()) throw InvalidInput("evaluate_time_segment: no subjects");
  const auto [first, second] = split_halves(xs.front().cols());
  return evaluate_time_segment_halves(model, zscore_all(slice_trs(xs, first)), zscore_all(slice_trs(xs, second)),
                                      cfg, spec);
}

FoldReport evaluate_time_segment_halves(ModelId model, std::span<const Matrix> first,
                                        std::span<const Matrix> second, const FitConfig& cfg,
                                        const EvalSpec& spec) {
  if (first.empty() || second.size() != first.size()) throw ShapeMismatch("evaluate_time_segment: halves differ");
  // Validate both test halves before fitting anything.
  segment_candidates(first.front().cols(), spec.segment_len);
  segment_candidates(second.front().cols(), spec.segment_len);

  FoldReport report;
  for (int fold = 0; fold < 2; ++fold) {
    const auto train = fold == 0 ? first : second;
    const auto test = fold == 0 ? second : first;
    FitConfig fold_cfg = cfg;
    fold_cfg.seed = fold_seed(cfg.seed, fold);
    const FactorFit fit = fit_model(model, train, fold_cfg);
    report.all_converged = report.all_converged && fit.converged;
    report.max_iterations = std::max(report.max_iterations, fit.iterations);
    report.counts += time_segment_match(fit, test, spec);
  }
  return report;
}

SceneTable scene_table_from_labels(const std::vector<SceneInterval>& labels, std::size_t t, std::size_t m) {
  SceneTable table;
  table.intervals.assign(m, labels);
  table.tr_counts.assign(m, t);
  return table;
}

std::vector<std::uint32_t> usable_scenes(const SceneTable& table) {
  std::map<std::uint32_t, std::size_t> seen_by;
  for (const auto& subject : table.intervals) {
    std::set<std::uint32_t> ids;
    for (const auto& iv : subject) ids.insert(iv.scene_id);
    for (auto id : ids) ++seen_by[id];
  }
  std::vector<std::uint32_t> out;
  for (const auto& [id, count] : seen_by)
    if (count >= 2) out.push_back(id);
  return out;
}

std::vector<std::map<std::uint32_t, std::vector<double>>> scene_means(std::span<const Matrix> recall,
                                                                       const SceneTable& table) {
  if (recall.size() != table.subject_count()) throw ShapeMismatch("scene table and recall data differ in subject count");
  std::vector<std::map<std::uint32_t, std::vector<double>>> out(recall.size());
  for (std::size_t i = 0; i < recall.size(); ++i) {
    const Matrix& x = recall[i];
    const auto& ivs = table.intervals[i];
    const std::size_t t = std::min(table.tr_counts[i], x.cols());
    std::map<std::uint32_t, std::size_t> counts;
    for (std::size_t j = 0; j < ivs.size(); ++j) {
      const std::size_t begin = ivs[j].start_tr;
      const std::size_t end = j + 1 < ivs.size() ? ivs[j + 1].start_tr : t;
      if (begin >= end) continue;
      auto& acc = out[i][ivs[j].scene_id];
      acc.resize(x.rows(), 0.0);
      for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = begin; c < end; ++c) acc[r] += x(r, c);
      counts[ivs[j].scene_id] += end - begin;
    }
    for (auto& [id, acc] : out[i])
      for (double& v : acc) v /= static_cast<double>(counts[id]);
  }
  return out;
}

SceneVectors project_scenes(const FactorFit& fit, std::span<const Matrix> recall, const SceneTable& table) {
  const auto means = scene_means(recall, table);
  SceneVectors out(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    const Matrix proj = projector(fit, i);
    for (const auto& [id, mean] : means[i]) {
      std::vector<double> v(proj.rows());
      for (std::size_t r = 0; r < proj.rows(); ++r) v[r] = simd::active().dot(proj.row(r).data(), mean.data(), mean.size());
      out[i][id] = std::move(v);
    }
  }
  return out;
}

TrialCount classify_scenes(const SceneVectors& vectors, const SvmConfig& svm) {
  const std::size_t m = vectors.size();
  if (m < 2) throw ProtocolError("scene classification needs at least two subjects");
  std::map<std::uint32_t, std::size_t> seen_by;
  for (const auto& subject : vectors)
    for (const auto& [id, v] : subject) ++seen_by[id];
  std::set<std::uint32_t> usable;
  for (const auto& [id, count] : seen_by)
    if (count >= 2) usable.insert(id);
  if (usable.empty()) throw ProtocolError("no scene is recalled by at least two subjects");
  const double chance = 1.0 / static_cast<double>(usable.size());

  TrialCount out;
  for (std::size_t held = 0; held < m; ++held) {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint32_t> labels;
    for (std::size_t j = 0; j < m; ++j) {
      if (j == held) continue;
      for (const auto& [id, v] : vectors[j])
        if (usable.count(id)) {
          rows.push_back(v);
          labels.push_back(id);
        }
    }
    if (rows.empty()) continue;
    Matrix features(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) std::copy(rows[r].begin(), rows[r].end(), features.row(r).data());
    LinearSvm clf;
    clf.fit(features, labels, svm);
    for (const auto& [id, v] : vectors[held]) {
      if (!usable.count(id)) continue;
      ++out.trials;
      out.chance_mass += chance;
      if (clf.predict(v) == id) ++out.correct;
    }
  }
  return out;
}

TrialCount scene_recall_match(const FactorFit& fit, std::span<const Matrix> recall, const SceneTable& table,
                              const EvalSpec& spec) {
  return classify_scenes(project_scenes(fit, recall, table), spec.svm);
}

FoldReport evaluate_scene_recall(ModelId model, std::span<const Matrix> movie, std::span<const Matrix> recall,
                                 const SceneTable& table, const FitConfig& cfg, const EvalSpec& spec) {
  const std::vector<Matrix> train = zscore_all(movie);
  const std::vector<Matrix> test = zscore_all(recall);
  const FactorFit fit = fit_model(model, train, cfg);
  FoldReport report;
  report.all_converged = fit.converged;
  report.max_iterations = fit.iterations;
  report.counts = scene_recall_match(fit, test, table, spec);
  return report;
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "protocol,model,k,accuracy,chance,n_trials,seed\n";
  const auto flags = os.flags();
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << protocol_name(r.protocol) << ',' << r.model << ',' << r.k << ',' << r.accuracy << ',' << r.chance << ','
       << r.n_trials << ',' << r.seed << '\n';
  os.flags(flags);
}

}  // namespace msr
