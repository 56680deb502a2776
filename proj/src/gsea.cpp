#include "enrichkit/gsea.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "enrichkit/fdr.hpp"
#include "enrichkit/rng.hpp"
#include "enrichkit/text.hpp"

namespace enrichkit {

void rank_genes_into(std::span<const double> scores, RankedList& out) {
  const std::size_t n = scores.size();
  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::int32_t a, std::int32_t b) { return scores[a] > scores[b]; });
  out.sorted_scores.resize(n);
  out.rank_of_row.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    out.sorted_scores[pos] = scores[out.order[pos]];
    out.rank_of_row[out.order[pos]] = static_cast<std::int32_t>(pos);
  }
}

RankedList rank_genes(const LocalStatistics& stats) {
  for (const double s : stats.scores)
    if (!std::isfinite(s))
      throw std::runtime_error("non-finite local statistic");
  RankedList out;
  rank_genes_into(stats.scores, out);
  return out;
}

namespace {

double weight_of(double score, double alpha) {
  if (alpha == 0.0)
    return 1.0;
  if (alpha == 1.0)
    return std::abs(score);
  return std::pow(std::abs(score), alpha);
}

}  // namespace

EsCurve enrichment_score(const RankedList& ranked,
                         std::span<const std::int32_t> set_rows, double alpha) {
  const std::size_t n = ranked.sorted_scores.size();
  const std::size_t nk = set_rows.size();
  if (nk < 1)
    throw std::runtime_error("empty gene set");
  if (nk >= n)
    throw std::runtime_error("gene set must be a proper subset of the gene list");
  if (alpha < 0.0)
    throw std::runtime_error("alpha must be non-negative");

  std::vector<char> in_set(n, 0);
  for (const auto r : set_rows)
    in_set[ranked.rank_of_row[r]] = 1;

  double total_weight = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos)
    if (in_set[pos])
      total_weight += weight_of(ranked.sorted_scores[pos], alpha);
  if (!(total_weight > 0.0))
    throw std::runtime_error("degenerate weights: every in-set score is zero");

  EsCurve out;
  out.running_sum.resize(n);
  const double miss_step = 1.0 / static_cast<double>(n - nk);
  double cum_hit = 0.0;
  double cum_miss = 0.0;
  double best = 0.0;
  std::int32_t best_pos = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (in_set[pos])
      cum_hit += weight_of(ranked.sorted_scores[pos], alpha) / total_weight;
    else
      cum_miss += miss_step;
    const double v = cum_hit - cum_miss;
    out.running_sum[pos] = v;
    if (std::abs(v) > std::abs(best)) {
      best = v;
      best_pos = static_cast<std::int32_t>(pos);
    }
  }
  out.es = best;
  out.peak_index = best_pos;
  return out;
}

EsValue enrichment_score_at_positions(std::span<const double> sorted_scores,
                                      std::span<const std::int32_t> positions,
                                      double alpha) {
  const std::size_t n = sorted_scores.size();
  const std::size_t nk = positions.size();
  if (nk < 1)
    throw std::runtime_error("empty gene set");
  if (nk >= n)
    throw std::runtime_error("gene set must be a proper subset of the gene list");

  double total_weight = 0.0;
  for (const auto pos : positions)
    total_weight += weight_of(sorted_scores[pos], alpha);
  if (!(total_weight > 0.0))
    throw std::runtime_error("degenerate weights: every in-set score is zero");

  const double miss_step = 1.0 / static_cast<double>(n - nk);
  double cur = 0.0;
  double best = 0.0;
  std::int32_t best_pos = 0;
  const auto consider = [&](double v, std::int64_t at) {
    if (std::abs(v) > std::abs(best)) {
      best = v;
      best_pos = static_cast<std::int32_t>(at);
    }
  };
  // Between hits the sum only decreases, so within a miss run the extreme
  // magnitudes sit at its two ends; checking those in index order keeps the
  // first-occurrence tie rule of the full curve.
  std::int64_t last = -1;
  for (const auto pos : positions) {
    const std::int64_t gap = pos - last - 1;
    if (gap > 0) {
      consider(cur - miss_step, last + 1);
      cur -= miss_step * static_cast<double>(gap);
      if (gap > 1)
        consider(cur, pos - 1);
    }
    cur += weight_of(sorted_scores[pos], alpha) / total_weight;
    consider(cur, pos);
    last = pos;
  }
  const std::int64_t tail = static_cast<std::int64_t>(n) - 1 - last;
  if (tail > 0) {
    consider(cur - miss_step, last + 1);
    cur -= miss_step * static_cast<double>(tail);
    if (tail > 1)
      consider(cur, static_cast<std::int64_t>(n) - 1);
  }
  return {best, best_pos};
}

namespace {

struct PermWorkspace {
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
  std::vector<double> scratch;
  RankedList ranked;
  std::vector<std::int32_t> positions;
};

void null_permutation(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                      std::span<const std::vector<std::int32_t>> set_rows,
                      const GseaConfig& cfg, int perm_index, PermWorkspace& ws,
                      std::vector<std::vector<double>>& per_set) {
  ws.labels.assign(ph.labels.begin(), ph.labels.end());
  Rng rng(cfg.seed, rng_domain::kGseaPermutation,
          static_cast<std::uint64_t>(perm_index));
  rng.shuffle(std::span<std::uint8_t>(ws.labels));

  ws.scores.resize(ds.n_genes());
  compute_scores_into(ds, ws.labels, cfg.metric, ws.scores);
  if (cfg.normalize)
    median_mad_normalize_inplace(ws.scores, ws.scratch);
  rank_genes_into(ws.scores, ws.ranked);

  for (std::size_t k = 0; k < set_rows.size(); ++k) {
    ws.positions.resize(set_rows[k].size());
    for (std::size_t t = 0; t < set_rows[k].size(); ++t)
      ws.positions[t] = ws.ranked.rank_of_row[set_rows[k][t]];
    std::sort(ws.positions.begin(), ws.positions.end());
    per_set[k][perm_index] =
        enrichment_score_at_positions(ws.ranked.sorted_scores, ws.positions, cfg.alpha).es;
  }
}

void validate_null_inputs(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                          std::span<const std::vector<std::int32_t>> set_rows,
                          const GseaConfig& cfg) {
  if (cfg.n_perm < 1)
    throw std::runtime_error("nperm must be >= 1");
  if (cfg.alpha < 0.0)
    throw std::runtime_error("alpha must be non-negative");
  if (ph.n_samples() != ds.n_samples())
    throw std::runtime_error("phenotype sample count does not match dataset");
  if (ph.class_count(0) < 2 || ph.class_count(1) < 2)
    throw std::runtime_error("need at least two samples per class");
  for (const auto& rows : set_rows) {
    if (rows.empty() || rows.size() >= ds.n_genes())
      throw std::runtime_error("gene set must be a non-empty proper subset of the gene list");
  }
}

}  // namespace

PermutationNull build_null(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                           std::span<const std::vector<std::int32_t>> set_rows,
                           const GseaConfig& cfg) {
  validate_null_inputs(ds, ph, set_rows, cfg);
  PermutationNull null;
  null.seed = cfg.seed;
  null.n_perm = cfg.n_perm;
  null.per_set.assign(set_rows.size(), std::vector<double>(cfg.n_perm));

  const int nt = resolve_threads(cfg.threads);
  std::atomic<bool> failed{false};
  std::string error;

#pragma omp parallel num_threads(nt)
  {
    PermWorkspace ws;
#pragma omp for schedule(dynamic, 4)
    for (int j = 0; j < cfg.n_perm; ++j) {
      if (failed.load(std::memory_order_relaxed))
        continue;
      try {
        null_permutation(ds, ph, set_rows, cfg, j, ws, null.per_set);
      } catch (const std::exception& e) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) {
#pragma omp critical(enrichkit_null_error)
          error = e.what();
        }
      }
    }
  }
  if (failed.load())
    throw std::runtime_error(error.empty() ? "permutation failed" : error);
  return null;
}

PermutationNull build_null_serial(const ExpressionDataset& ds,
                                  const PhenotypeAssignment& ph,
                                  std::span<const std::vector<std::int32_t>> set_rows,
                                  const GseaConfig& cfg) {
  validate_null_inputs(ds, ph, set_rows, cfg);
  PermutationNull null;
  null.seed = cfg.seed;
  null.n_perm = cfg.n_perm;
  null.per_set.assign(set_rows.size(), std::vector<double>(cfg.n_perm));
  PermWorkspace ws;
  for (int j = 0; j < cfg.n_perm; ++j)
    null_permutation(ds, ph, set_rows, cfg, j, ws, null.per_set);
  return null;
}

NormalizedScore normalize_and_test(double es, std::span<const double> null_es) {
  double sum = 0.0;
  std::size_t n_same = 0;
  std::size_t n_extreme = 0;
  if (es >= 0.0) {
    for (const double v : null_es) {
      if (v >= 0.0) {
        sum += v;
        ++n_same;
        if (v >= es)
          ++n_extreme;
      }
    }
  } else {
    for (const double v : null_es) {
      if (v < 0.0) {
        sum += v;
        ++n_same;
        if (v <= es)
          ++n_extreme;
      }
    }
  }

  NormalizedScore out;
  out.p_nominal = (1.0 + static_cast<double>(n_extreme)) /
                  (1.0 + static_cast<double>(n_same));
  const double mean = n_same ? sum / static_cast<double>(n_same) : 0.0;
  if (n_same == 0 || mean == 0.0) {
    out.nes = std::numeric_limits<double>::quiet_NaN();
    out.degenerate = true;
    out.p_nominal = 1.0;
    return out;
  }
  out.nes = es / std::abs(mean);  // magnitude rescaling, sign of es kept
  return out;
}

GseaRun run_gsea(const ExpressionDataset& ds, const PhenotypeAssignment& ph,
                 const GeneSetCollection& sets, const GseaConfig& cfg) {
  if (sets.size() == 0)
    throw std::runtime_error("no gene sets to score");

  GseaRun run;
  run.set_rows = map_sets_to_rows(sets, ds);
  validate_null_inputs(ds, ph, run.set_rows, cfg);
  run.set_names.reserve(sets.size());
  for (const auto& s : sets.sets)
    run.set_names.push_back(s.name);

  run.stats = compute_local_stats(ds, ph, cfg.metric, cfg.normalize, cfg.threads);
  run.ranked = rank_genes(run.stats);

  const std::size_t K = sets.size();
  std::vector<EsCurve> observed(K);
  for (std::size_t k = 0; k < K; ++k)
    observed[k] = enrichment_score(run.ranked, run.set_rows[k], cfg.alpha);

  const PermutationNull null = build_null(ds, ph, run.set_rows, cfg);

  std::vector<double> p_nominal(K);
  run.results.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    GseaResult& r = run.results[k];
    r.set_name = run.set_names[k];
    r.n_k = run.set_rows[k].size();
    r.es = observed[k].es;
    r.peak_index = observed[k].peak_index;

    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (const double v : null.per_set[k]) {
      if (v >= 0.0) {
        pos_sum += v;
        ++n_pos;
      } else {
        neg_sum += v;
        ++n_neg;
      }
    }
    r.null_pos_mean = n_pos ? pos_sum / static_cast<double>(n_pos)
                            : std::numeric_limits<double>::quiet_NaN();
    r.null_neg_mean = n_neg ? neg_sum / static_cast<double>(n_neg)
                            : std::numeric_limits<double>::quiet_NaN();

    const auto norm = normalize_and_test(r.es, null.per_set[k]);
    r.nes = norm.nes;
    r.p_nominal = norm.p_nominal;
    r.degenerate_null = norm.degenerate;
    p_nominal[k] = r.p_nominal;
  }

  const auto q = qvalues(p_nominal);
  for (std::size_t k = 0; k < K; ++k)
    run.results[k].q_value = q.q_values[k];

  std::sort(run.results.begin(), run.results.end(),
            [](const GseaResult& a, const GseaResult& b) {
              if (a.p_nominal != b.p_nominal)
                return a.p_nominal < b.p_nominal;
              const double na = std::isnan(a.nes) ? 0.0 : std::abs(a.nes);
              const double nb = std::isnan(b.nes) ? 0.0 : std::abs(b.nes);
              if (na != nb)
                return na > nb;
              return a.set_name < b.set_name;
            });
  return run;
}

std::string export_running_sum(const GseaRun& run, std::string_view set_name,
                               double alpha) {
  std::size_t k = run.set_names.size();
  for (std::size_t i = 0; i < run.set_names.size(); ++i)
    if (run.set_names[i] == set_name) {
      k = i;
      break;
    }
  if (k == run.set_names.size())
    throw std::runtime_error("unknown gene set '" + std::string(set_name) + "'");

  const auto curve = enrichment_score(run.ranked, run.set_rows[k], alpha);
  std::vector<char> in_set(run.ranked.sorted_scores.size(), 0);
  for (const auto r : run.set_rows[k])
    in_set[run.ranked.rank_of_row[r]] = 1;

  std::string out = "rank\trunning_sum\tin_set\tis_peak\n";
  for (std::size_t pos = 0; pos < curve.running_sum.size(); ++pos) {
    out += std::to_string(pos + 1);
    out += '\t';
    out += format_sig(curve.running_sum[pos]);
    out += '\t';
    out += in_set[pos] ? '1' : '0';
    out += '\t';
    out += pos == static_cast<std::size_t>(curve.peak_index) ? '1' : '0';
    out += '\n';
  }
  return out;
}

std::string gsea_results_tsv(std::span<const GseaResult> results, bool full_precision) {
  const auto fmt = [&](double v) {
    return full_precision ? format_full(v) : format_sig(v);
  };
  std::string out = "set\tsize\tes\tnes\tp\tq\tnull_pos_mean\tnull_neg_mean\n";
  for (const auto& r : results) {
    out += r.set_name;
    out += '\t';
    out += std::to_string(r.n_k);
    out += '\t';
    out += fmt(r.es);
    out += '\t';
    out += fmt(r.nes);
    out += '\t';
    out += fmt(r.p_nominal);
    out += '\t';
    out += fmt(r.q_value);
    out += '\t';
    out += fmt(r.null_pos_mean);
    out += '\t';
    out += fmt(r.null_neg_mean);
    out += '\n';
  }
  return out;
}

}  // namespace enrichkit
