#include "msr/searchlight.hpp"

#include <algorithm>
#include <limits>

#include "msr/error.hpp"
#include "msr/linalg.hpp"
#include "msr/rng.hpp"
#include "msr/work_pool.hpp"

namespace msr {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

void check_sweep_inputs(const SubjectDataset& dataset, const SearchlightIndex& index, const SweepConfig& cfg,
                        const RecallData* recall) {
  if (!(index.dims == dataset.mask.dims())) throw ShapeMismatch("sweep: index and dataset grids differ");
  if (cfg.k_grid.empty()) throw InvalidInput("sweep: empty k grid");
  for (std::size_t k : cfg.k_grid)
    if (k == 0 || k > 0xffff) throw InvalidInput("sweep: k grid values must lie in [1, 65535]");
  if (cfg.eval.protocol == Protocol::SceneRecall) {
    if (!recall || !recall->dataset) throw ProtocolError("scene-recall sweep needs recall data");
    if (!(recall->dataset->grid == dataset.grid)) throw ShapeMismatch("recall data grid differs from movie data");
    if (recall->dataset->subject_count() != dataset.subject_count())
      throw ShapeMismatch("recall data subject count differs from movie data");
  }
}

std::size_t center_flat(const SearchlightIndex& index, std::size_t center_id) {
  const Coord c = index.centers[center_id];
  return index.dims.flat(c.x, c.y, c.z);
}

}  // namespace

ResultMaps ResultMaps::empty(GridDims dims) {
  ResultMaps maps;
  maps.dims = dims;
  maps.accuracy.assign(dims.count(), kAbsent);
  maps.best_k.assign(dims.count(), 0);
  maps.flags.assign(dims.count(), 0);
  return maps;
}

std::size_t ResultMaps::defined_count() const {
  return static_cast<std::size_t>(std::count_if(flags.begin(), flags.end(), [](std::uint8_t f) { return f & kDefined; }));
}

std::uint64_t center_seed(std::uint64_t seed, std::size_t flat, std::size_t k) {
  return mix_seed(seed, {0x5ea7c41ULL, flat, k});
}

FitConfig center_fit_config(const SweepConfig& cfg, std::size_t flat, std::size_t k) {
  FitConfig fc;
  fc.k = k;
  fc.max_iter = cfg.max_iter;
  fc.tol = cfg.tol;
  fc.seed = center_seed(cfg.seed, flat, k);
  fc.contrast = cfg.contrast;
  fc.k1 = cfg.k1;
  return fc;
}

CenterResult evaluate_center(const SubjectDataset& dataset, const SearchlightIndex& index, std::size_t center_id,
                             const SweepConfig& cfg, const RecallData* recall) {
  check_sweep_inputs(dataset, index, cfg, recall);
  const std::size_t flat = center_flat(index, center_id);
  const std::vector<Matrix> xs = extract_searchlight(dataset, index, center_id);

  CenterResult out;
  out.diagnostics.center = index.centers[center_id];
  out.per_k.resize(cfg.k_grid.size());
  out.diagnostics.accuracy_per_k.assign(cfg.k_grid.size(), kAbsent);

  std::vector<Matrix> first, second, recall_xs;
  SceneTable table;
  if (cfg.eval.protocol == Protocol::TimeSegment) {
    const auto [a, b] = split_halves(dataset.tr_count());
    first = zscore_all(slice_trs(xs, a));
    second = zscore_all(slice_trs(xs, b));
  } else {
    first = zscore_all(xs);
    recall_xs = zscore_all(extract_searchlight(*recall->dataset, index, center_id));
  }

  for (std::size_t j = 0; j < cfg.k_grid.size(); ++j) {
    const std::size_t k = cfg.k_grid[j];
    const FitConfig fc = center_fit_config(cfg, flat, k);
    try {
      FoldReport report;
      if (cfg.eval.protocol == Protocol::TimeSegment) {
        report = evaluate_time_segment_halves(cfg.model, first, second, fc, cfg.eval);
      } else {
        const FactorFit fit = fit_model(cfg.model, first, fc);
        report.all_converged = fit.converged;
        report.max_iterations = fit.iterations;
        report.counts = scene_recall_match(fit, recall_xs, recall->table, cfg.eval);
      }
      out.per_k[j] = report.counts;
      out.diagnostics.accuracy_per_k[j] = report.counts.accuracy();
      out.diagnostics.all_converged = out.diagnostics.all_converged && report.all_converged;
      out.diagnostics.max_iterations = std::max(out.diagnostics.max_iterations, report.max_iterations);
    } catch (const RankError&) {
      out.diagnostics.skipped_k.push_back(k);
    }
  }
  return out;
}

ResultMaps sweep(const SubjectDataset& dataset, const SearchlightIndex& index, const SweepConfig& cfg,
                 const RecallData* recall) {
  check_sweep_inputs(dataset, index, cfg, recall);
  std::vector<CenterResult> results(index.size());
  parallel_for(index.size(), cfg.threads,
               [&](std::size_t c) { results[c] = evaluate_center(dataset, index, c, cfg, recall); });

  ResultMaps maps = ResultMaps::empty(index.dims);
  maps.centers.reserve(index.size());
  for (std::size_t c = 0; c < index.size(); ++c) {
    const CenterResult& r = results[c];
    const std::size_t flat = center_flat(index, c);
    std::uint8_t flags = 0;
    double best = -1.0;
    std::size_t best_k = 0;
    for (std::size_t j = 0; j < cfg.k_grid.size(); ++j) {
      if (!r.per_k[j]) continue;
      const double acc = r.per_k[j]->accuracy();
      const std::size_t k = cfg.k_grid[j];
      if (acc > best || (acc == best && k < best_k)) {
        best = acc;
        best_k = k;
      }
    }
    if (best_k != 0) {
      flags |= kDefined;
      maps.accuracy[flat] = best;
      maps.best_k[flat] = static_cast<std::uint16_t>(best_k);
    }
    if (!r.diagnostics.all_converged) flags |= kNotConverged;
    if (!r.diagnostics.skipped_k.empty()) flags |= kSkippedK;
    maps.flags[flat] = flags;
    maps.centers.push_back(r.diagnostics);
  }
  return maps;
}

ResultMaps threshold_map(const ResultMaps& maps, double floor) {
  if (!(floor >= 0.0 && floor <= 1.0)) throw InvalidInput("threshold_map: floor must lie in [0, 1]");
  ResultMaps out = maps;
  for (std::size_t f = 0; f < out.accuracy.size(); ++f) {
    if (!out.defined(f) || out.accuracy[f] >= floor) continue;
    out.accuracy[f] = kAbsent;
    out.best_k[f] = 0;
    out.flags[f] = static_cast<std::uint8_t>(out.flags[f] & ~kDefined);
  }
  return out;
}

TrialCount aggregate_accuracy(const SubjectDataset& dataset, const SearchlightIndex& index, const ResultMaps& maps,
                              const SweepConfig& cfg, const RecallData* recall) {
  check_sweep_inputs(dataset, index, cfg, recall);
  if (!(maps.dims == index.dims)) throw ShapeMismatch("aggregate_accuracy: maps and index grids differ");
  std::vector<std::size_t> used;
  for (std::size_t c = 0; c < index.size(); ++c)
    if (maps.defined(center_flat(index, c))) used.push_back(c);
  if (used.empty()) throw ProtocolError("aggregate_accuracy: no center has a defined accuracy");
  const std::size_t m = dataset.subject_count();

  if (cfg.eval.protocol == Protocol::TimeSegment) {
    const auto [a, b] = split_halves(dataset.tr_count());
    // per fold, per center, per subject projected test response
    std::vector<std::vector<std::vector<Matrix>>> projected(2, std::vector<std::vector<Matrix>>(used.size()));
    parallel_for(used.size(), cfg.threads, [&](std::size_t u) {
      const std::size_t c = used[u];
      const std::size_t flat = center_flat(index, c);
      const std::vector<Matrix> xs = extract_searchlight(dataset, index, c);
      const std::vector<Matrix> first = zscore_all(slice_trs(xs, a));
      const std::vector<Matrix> second = zscore_all(slice_trs(xs, b));
      FitConfig fc = center_fit_config(cfg, flat, maps.best_k[flat]);
      for (int fold = 0; fold < 2; ++fold) {
        FitConfig fold_cfg = fc;
        fold_cfg.seed = fold_seed(fc.seed, fold);
        const FactorFit fit = fit_model(cfg.model, fold == 0 ? first : second, fold_cfg);
        const std::vector<Matrix>& test = fold == 0 ? second : first;
        for (std::size_t i = 0; i < m; ++i) projected[fold][u].push_back(project(fit, test[i], i));
      }
    });
    TrialCount total;
    for (int fold = 0; fold < 2; ++fold) {
      std::vector<Matrix> composite(m);
      for (std::size_t i = 0; i < m; ++i) {
        std::vector<Matrix> blocks;
        blocks.reserve(used.size());
        for (std::size_t u = 0; u < used.size(); ++u) blocks.push_back(projected[fold][u][i]);
        composite[i] = vstack(blocks);
      }
      total += match_segments(composite, cfg.eval.segment_len);
    }
    return total;
  }

  std::vector<SceneVectors> per_center(used.size());
  parallel_for(used.size(), cfg.threads, [&](std::size_t u) {
    const std::size_t c = used[u];
    const std::size_t flat = center_flat(index, c);
    const std::vector<Matrix> movie = zscore_all(extract_searchlight(dataset, index, c));
    const std::vector<Matrix> rec = zscore_all(extract_searchlight(*recall->dataset, index, c));
    const FactorFit fit = fit_model(cfg.model, movie, center_fit_config(cfg, flat, maps.best_k[flat]));
    per_center[u] = project_scenes(fit, rec, recall->table);
  });
  SceneVectors composite(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& [id, v] : per_center.front()[i]) {
      std::vector<double> joined;
      for (const auto& pc : per_center) {
        const auto& part = pc[i].at(id);
        joined.insert(joined.end(), part.begin(), part.end());
      }
      composite[i][id] = std::move(joined);
    }
  return classify_scenes(composite, cfg.eval.svm);
}

FoldReport whole_volume_accuracy(const SubjectDataset& dataset, ModelId model, const FitConfig& cfg,
                                 const EvalSpec& spec, const RecallData* recall) {
  FitConfig fc = cfg;
  const std::size_t v = dataset.voxel_count();
  if (spec.protocol == Protocol::TimeSegment) {
    const std::size_t t_train = dataset.tr_count() / 2;
    if (model == ModelId::SRGICA) fc.k1 = std::min(fc.k1 ? fc.k1 : v, std::min(v, t_train));
    return evaluate_time_segment(model, dataset.subjects, fc, spec);
  }
  if (!recall || !recall->dataset) throw ProtocolError("scene-recall evaluation needs recall data");
  if (recall->dataset->voxel_count() != v) throw ShapeMismatch("recall data voxel count differs from movie data");
  if (model == ModelId::SRGICA) fc.k1 = std::min(fc.k1 ? fc.k1 : v, std::min(v, dataset.tr_count()));
  return evaluate_scene_recall(model, dataset.subjects, recall->dataset->subjects, recall->table, fc, spec);
}

}  // namespace msr
