#include "enrichkit/nullbench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "enrichkit/fdr.hpp"
#include "enrichkit/rng.hpp"
#include "enrichkit/text.hpp"

namespace enrichkit {

std::string_view method_name(Method m) { return m == Method::Sea ? "sea" : "gsea"; }

double intraset_correlation(const ExpressionDataset& ds,
                            std::span<const std::int32_t> set_rows,
                            std::size_t* n_constant_rows) {
  const std::size_t nk = set_rows.size();
  if (nk < 2)
    throw std::runtime_error("correlation needs at least two genes");
  const std::size_t m = ds.n_samples();

  std::vector<double> centered(nk * m);
  std::vector<double> inv_norm(nk);
  std::size_t constant = 0;
  for (std::size_t a = 0; a < nk; ++a) {
    const auto row = ds.row(set_rows[a]);
    double mean = 0.0;
    for (const double v : row)
      mean += v;
    mean /= static_cast<double>(m);
    double norm2 = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double c = row[j] - mean;
      centered[a * m + j] = c;
      norm2 += c * c;
    }
    if (norm2 > 0.0) {
      inv_norm[a] = 1.0 / std::sqrt(norm2);
    } else {
      inv_norm[a] = 0.0;  // constant row, pairs contribute 0
      ++constant;
    }
  }
  if (n_constant_rows)
    *n_constant_rows = constant;

  double sum = 0.0;
  for (std::size_t a = 1; a < nk; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (inv_norm[a] == 0.0 || inv_norm[b] == 0.0)
        continue;
      double dot = 0.0;
      const double* ra = centered.data() + a * m;
      const double* rb = centered.data() + b * m;
      for (std::size_t j = 0; j < m; ++j)
        dot += ra[j] * rb[j];
      sum += dot * inv_norm[a] * inv_norm[b];
    }
  }
  const double n_pairs = 0.5 * static_cast<double>(nk) * static_cast<double>(nk - 1);
  return sum / n_pairs;
}

double variance_inflation(std::size_t n_k, double rho) {
  if (n_k < 1)
    throw std::runtime_error("set size must be >= 1");
  return 1.0 + static_cast<double>(n_k) * rho;
}

namespace {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v)
    s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  if (v.size() < 2)
    return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (const double x : v) {
    const double d = x - m;
    ss += d * d;
  }
  return ss / static_cast<double>(v.size() - 1);
}

template <std::size_t Bins>
std::array<double, Bins> fraction_histogram(std::span<const double> values,
                                            double lo, double hi) {
  std::array<double, Bins> h{};
  if (values.empty())
    return h;
  const double scale = static_cast<double>(Bins) / (hi - lo);
  for (const double v : values) {
    auto bin = static_cast<std::int64_t>((v - lo) * scale);
    bin = std::clamp<std::int64_t>(bin, 0, Bins - 1);
    h[static_cast<std::size_t>(bin)] += 1.0;
  }
  for (auto& f : h)
    f /= static_cast<double>(values.size());
  return h;
}

}  // namespace

CorrelationSummary correlation_summary(const ExpressionDataset& ds,
                                       const GeneSetCollection& sets) {
  const auto rows = map_sets_to_rows(sets, ds);
  CorrelationSummary out;
  out.set_names.reserve(sets.size());
  out.rho.reserve(sets.size());
  out.gamma.reserve(sets.size());
  for (std::size_t k = 0; k < sets.size(); ++k) {
    std::size_t constant = 0;
    const double r = intraset_correlation(ds, rows[k], &constant);
    out.n_constant_rows += constant;
    out.set_names.push_back(sets.sets[k].name);
    out.rho.push_back(r);
    out.gamma.push_back(variance_inflation(rows[k].size(), r));
  }
  out.rho_histogram = fraction_histogram<20>(out.rho, -1.0, 1.0);
  const auto [lo, hi] = std::minmax_element(out.gamma.begin(), out.gamma.end());
  out.gamma_min = out.gamma.empty() ? 0.0 : *lo;
  out.gamma_max = out.gamma.empty() ? 0.0 : *hi;
  if (out.gamma_max <= out.gamma_min)
    out.gamma_max = out.gamma_min + 1.0;
  out.gamma_histogram = fraction_histogram<20>(out.gamma, out.gamma_min, out.gamma_max);
  return out;
}

ZscoreNullResult zscore_null_distributions(const ExpressionDataset& ds,
                                           const PhenotypeAssignment& ph,
                                           const GeneSetCollection& sets,
                                           const ZscoreNullConfig& cfg) {
  if (cfg.n_perm < 1)
    throw std::runtime_error("nperm must be >= 1");
  if (sets.size() == 0)
    throw std::runtime_error("no gene sets");
  const auto set_rows = map_sets_to_rows(sets, ds);
  for (const auto& r : set_rows)
    if (r.size() < 2)
      throw std::runtime_error("every set needs at least two genes");
  if (ph.n_samples() != ds.n_samples())
    throw std::runtime_error("phenotype sample count does not match dataset");
  if (ph.class_count(0) < 2 || ph.class_count(1) < 2)
    throw std::runtime_error("need at least two samples per class");

  const std::size_t K = sets.size();
  const std::size_t n = ds.n_genes();
  const int nt = resolve_threads(cfg.threads);

  ZscoreNullResult out;
  out.sample_perm_z.resize(static_cast<std::size_t>(cfg.n_perm) * K);
  out.gene_perm_z.resize(static_cast<std::size_t>(cfg.n_perm) * K);

  std::atomic<bool> failed{false};
  std::string error;

  // subject-sampling null: relabel, recompute local statistics
#pragma omp parallel num_threads(nt)
  {
    std::vector<std::uint8_t> labels;
    std::vector<double> scores(n);
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 4)
    for (int j = 0; j < cfg.n_perm; ++j) {
      if (failed.load(std::memory_order_relaxed))
        continue;
      try {
        labels.assign(ph.labels.begin(), ph.labels.end());
        Rng rng(cfg.seed, rng_domain::kZnullSamplePerm, static_cast<std::uint64_t>(j));
        rng.shuffle(std::span<std::uint8_t>(labels));
        compute_scores_into(ds, labels, cfg.metric, scores);
        if (cfg.normalize)
          median_mad_normalize_inplace(scores, scratch);
        for (std::size_t k = 0; k < K; ++k)
          out.sample_perm_z[static_cast<std::size_t>(j) * K + k] =
              sea_zscore(scores, set_rows[k]);
      } catch (const std::exception& e) {
        bool expected = false;
        if (failed.compare_exchange_strong(expected, true)) {
#pragma omp critical(enrichkit_znull_error)
          error = e.what();
        }
      }
    }
  }
  if (failed.load())
    throw std::runtime_error(error);

  // gene-sampling null: labels fixed, gene-to-row mapping reshuffled
  std::vector<double> base_scores(n);
  compute_scores_into(ds, ph.labels, cfg.metric, base_scores);
  if (cfg.normalize) {
    std::vector<double> scratch;
    median_mad_normalize_inplace(base_scores, scratch);
  }

#pragma omp parallel num_threads(nt)
  {
    std::vector<std::int32_t> row_map(n);
    std::vector<std::int32_t> mapped;
#pragma omp for schedule(dynamic, 4)
    for (int j = 0; j < cfg.n_perm; ++j) {
      std::iota(row_map.begin(), row_map.end(), 0);
      Rng rng(cfg.seed, rng_domain::kZnullGenePerm, static_cast<std::uint64_t>(j));
      rng.shuffle(std::span<std::int32_t>(row_map));
      for (std::size_t k = 0; k < K; ++k) {
        mapped.resize(set_rows[k].size());
        for (std::size_t t = 0; t < set_rows[k].size(); ++t)
          mapped[t] = row_map[set_rows[k][t]];
        out.gene_perm_z[static_cast<std::size_t>(j) * K + k] =
            sea_zscore(base_scores, mapped);
      }
    }
  }

  out.sample_perm_mean = mean_of(out.sample_perm_z);
  out.sample_perm_variance = variance_of(out.sample_perm_z);
  out.gene_perm_mean = mean_of(out.gene_perm_z);
  out.gene_perm_variance = variance_of(out.gene_perm_z);
  return out;
}

namespace {

// One study run of the parametric method: scores, set statistics, p-values,
// per-family q-values, chosen result per set (same rule as run_sea).
void sea_study_run(const ExpressionDataset& ds, std::span<const std::uint8_t> labels,
                   std::span<const std::vector<std::int32_t>> set_rows,
                   Metric metric, bool normalize, std::vector<double>& scores,
                   std::vector<double>& scratch, std::span<double> p_out,
                   std::span<double> q_out) {
  const std::size_t K = set_rows.size();
  compute_scores_into(ds, labels, metric, scores);
  if (normalize)
    median_mad_normalize_inplace(scores, scratch);
  std::vector<double> p_z(K), p_chi2(K);
  std::vector<char> chosen(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double z = sea_zscore(scores, set_rows[k]);
    const double c = sea_chi2(scores, set_rows[k]);
    const auto p = sea_pvalues(z, c);
    p_z[k] = p.p_z;
    p_chi2[k] = p.p_chi2;
    p_out[k] = p.p_combined;
    chosen[k] = p.chosen;
  }
  const auto q_z = qvalues(p_z);
  const auto q_chi2 = qvalues(p_chi2);
  for (std::size_t k = 0; k < K; ++k)
    q_out[k] = chosen[k] == 'z' ? q_z.q_values[k] : q_chi2.q_values[k];
}

std::vector<std::vector<std::int32_t>>
shuffled_set_rows(std::span<const std::vector<std::int32_t>> set_rows, std::size_t n,
                  std::uint64_t seed, std::uint64_t run) {
  std::vector<std::int32_t> row_map(n);
  std::iota(row_map.begin(), row_map.end(), 0);
  Rng rng(seed, rng_domain::kStudyGeneShuffle, run);
  rng.shuffle(std::span<std::int32_t>(row_map));
  std::vector<std::vector<std::int32_t>> out(set_rows.size());
  for (std::size_t k = 0; k < set_rows.size(); ++k) {
    out[k].resize(set_rows[k].size());
    for (std::size_t t = 0; t < set_rows[k].size(); ++t)
      out[k][t] = row_map[set_rows[k][t]];
    std::sort(out[k].begin(), out[k].end());
  }
  return out;
}

}  // namespace

NullStudyReport randomized_phenotype_study(const ExpressionDataset& ds,
                                           const PhenotypeAssignment& ph,
                                           const GeneSetCollection& sets,
                                           const StudyConfig& cfg) {
  if (cfg.n_runs < 1)
    throw std::runtime_error("runs must be >= 1");
  if (sets.size() == 0)
    throw std::runtime_error("no gene sets");
  const auto set_rows = map_sets_to_rows(sets, ds);
  const std::size_t K = sets.size();
  const std::size_t n_runs = static_cast<std::size_t>(cfg.n_runs);

  NullStudyReport report;
  report.method = cfg.method;
  report.shuffle_genes = cfg.shuffle_genes;
  report.n_runs = cfg.n_runs;
  report.dataset_label = cfg.dataset_label;

  // set-level z variances under both nulls, the correlation diagnostic
  ZscoreNullConfig zcfg;
  zcfg.metric = cfg.sea_metric;
  zcfg.normalize = cfg.sea_normalize;
  zcfg.n_perm = cfg.n_runs;
  zcfg.seed = cfg.seed;
  zcfg.threads = cfg.threads;
  const auto znull = zscore_null_distributions(ds, ph, sets, zcfg);
  report.z_variance_sample_perm = znull.sample_perm_variance;
  report.z_variance_gene_perm = znull.gene_perm_variance;

  std::vector<double> p_all(n_runs * K);
  std::vector<double> q_all(n_runs * K);

  if (cfg.method == Method::Sea) {
    const int nt = resolve_threads(cfg.threads);
    std::atomic<bool> failed{false};
    std::string error;
#pragma omp parallel num_threads(nt)
    {
      std::vector<std::uint8_t> labels;
      std::vector<double> scores(ds.n_genes());
      std::vector<double> scratch;
#pragma omp for schedule(dynamic)
      for (std::int64_t r = 0; r < cfg.n_runs; ++r) {
        if (failed.load(std::memory_order_relaxed))
          continue;
        try {
          labels.assign(ph.labels.begin(), ph.labels.end());
          Rng rng(cfg.seed, rng_domain::kStudyLabels, static_cast<std::uint64_t>(r));
          rng.shuffle(std::span<std::uint8_t>(labels));
          const auto rows_r =
              cfg.shuffle_genes
                  ? shuffled_set_rows(set_rows, ds.n_genes(), cfg.seed,
                                      static_cast<std::uint64_t>(r))
                  : std::vector<std::vector<std::int32_t>>();
          const auto& rows = cfg.shuffle_genes ? rows_r : set_rows;
          sea_study_run(ds, labels, rows, cfg.sea_metric, cfg.sea_normalize, scores,
                        scratch, std::span<double>(p_all).subspan(r * K, K),
                        std::span<double>(q_all).subspan(r * K, K));
        } catch (const std::exception& e) {
          bool expected = false;
          if (failed.compare_exchange_strong(expected, true)) {
#pragma omp critical(enrichkit_study_error)
            error = e.what();
          }
        }
      }
    }
    if (failed.load())
      throw std::runtime_error(error);
  } else {
    // permutation engine inside each run; parallelism lives in build_null
    for (std::int64_t r = 0; r < cfg.n_runs; ++r) {
      std::vector<std::uint8_t> labels(ph.labels.begin(), ph.labels.end());
      Rng rng(cfg.seed, rng_domain::kStudyLabels, static_cast<std::uint64_t>(r));
      rng.shuffle(std::span<std::uint8_t>(labels));
      PhenotypeAssignment ph_r;
      ph_r.labels = std::move(labels);
      ph_r.class_names = ph.class_names;

      const auto rows_r = cfg.shuffle_genes
                              ? shuffled_set_rows(set_rows, ds.n_genes(), cfg.seed,
                                                  static_cast<std::uint64_t>(r))
                              : set_rows;

      GseaConfig gcfg;
      gcfg.metric = cfg.gsea_metric;
      gcfg.normalize = cfg.gsea_normalize;
      gcfg.alpha = cfg.gsea_alpha;
      gcfg.n_perm = cfg.gsea_n_perm;
      gcfg.seed = mix64(cfg.seed + kRngIncrement * (rng_domain::kStudyInnerSeed + 1)) ^
                  mix64(static_cast<std::uint64_t>(r));
      gcfg.threads = cfg.threads;

      const auto stats =
          compute_local_stats(ds, ph_r, gcfg.metric, gcfg.normalize, gcfg.threads);
      RankedList ranked;
      rank_genes_into(stats.scores, ranked);

      const PermutationNull null = build_null(ds, ph_r, rows_r, gcfg);
      std::vector<std::int32_t> positions;
      for (std::size_t k = 0; k < K; ++k) {
        positions.resize(rows_r[k].size());
        for (std::size_t t = 0; t < rows_r[k].size(); ++t)
          positions[t] = ranked.rank_of_row[rows_r[k][t]];
        std::sort(positions.begin(), positions.end());
        const double es =
            enrichment_score_at_positions(ranked.sorted_scores, positions, gcfg.alpha).es;
        p_all[static_cast<std::size_t>(r) * K + k] =
            normalize_and_test(es, null.per_set[k]).p_nominal;
      }
      const auto q = qvalues(std::span<const double>(p_all).subspan(r * K, K));
      std::copy(q.q_values.begin(), q.q_values.end(), q_all.begin() + r * K);
    }
  }

  report.p_histogram = fraction_histogram<20>(p_all, 0.0, 1.0);
  report.q_histogram = fraction_histogram<20>(q_all, 0.0, 1.0);
  std::size_t q05 = 0, q25 = 0;
  for (const double q : q_all) {
    if (q < 0.05)
      ++q05;
    if (q < 0.25)
      ++q25;
  }
  report.frac_q_below_05 = static_cast<double>(q05) / static_cast<double>(q_all.size());
  report.frac_q_below_25 = static_cast<double>(q25) / static_cast<double>(q_all.size());

  const auto corr = correlation_summary(ds, sets);
  if (corr.n_constant_rows > 0)
    std::fprintf(stderr,
                 "warning: %zu constant expression rows contribute correlation 0\n",
                 corr.n_constant_rows);
  report.per_set.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    PerSetStudyRow& row = report.per_set[k];
    row.set_name = sets.sets[k].name;
    row.n_k = set_rows[k].size();
    row.rho = corr.rho[k];
    row.gamma = corr.gamma[k];
    double psum = 0.0, qsum = 0.0;
    std::size_t p05 = 0, qk05 = 0;
    for (std::size_t r = 0; r < n_runs; ++r) {
      const double p = p_all[r * K + k];
      const double q = q_all[r * K + k];
      psum += p;
      qsum += q;
      if (p < 0.05)
        ++p05;
      if (q < 0.05)
        ++qk05;
    }
    row.mean_p = psum / static_cast<double>(n_runs);
    row.mean_q = qsum / static_cast<double>(n_runs);
    row.frac_p_below_05 = static_cast<double>(p05) / static_cast<double>(n_runs);
    row.frac_q_below_05 = static_cast<double>(qk05) / static_cast<double>(n_runs);
  }
  return report;
}

namespace {

std::string mode_name(bool shuffle_genes) {
  return shuffle_genes ? "phenotype_perm_plus_gene_shuffle" : "phenotype_perm";
}

}  // namespace

std::string study_report_tsv(const NullStudyReport& report) {
  std::string out =
      "set\tsize\trho_x\tgamma\tmean_p\tmean_q\tfrac_p_lt_0.05\tfrac_q_lt_0.05\n";
  for (const auto& row : report.per_set) {
    out += row.set_name;
    out += '\t';
    out += std::to_string(row.n_k);
    out += '\t';
    out += format_sig(row.rho);
    out += '\t';
    out += format_sig(row.gamma);
    out += '\t';
    out += format_sig(row.mean_p);
    out += '\t';
    out += format_sig(row.mean_q);
    out += '\t';
    out += format_sig(row.frac_p_below_05);
    out += '\t';
    out += format_sig(row.frac_q_below_05);
    out += '\n';
  }
  return out;
}

std::string study_report_json(const NullStudyReport& report) {
  nlohmann::json j;
  j["method"] = std::string(method_name(report.method));
  j["mode"] = mode_name(report.shuffle_genes);
  j["n_runs"] = report.n_runs;
  j["dataset"] = report.dataset_label;
  j["z_variance_sample_perm"] = report.z_variance_sample_perm;
  j["z_variance_gene_perm"] = report.z_variance_gene_perm;
  std::vector<double> edges;
  for (int i = 0; i <= 20; ++i)
    edges.push_back(i / 20.0);
  j["p_histogram"] = {{"bin_edges", edges}, {"fractions", report.p_histogram}};
  j["q_histogram"] = {{"bin_edges", edges}, {"fractions", report.q_histogram}};
  j["frac_q_below"] = {{"0.05", report.frac_q_below_05}, {"0.25", report.frac_q_below_25}};
  j["notes"] = {
      "within-set correlation rho_x of expression rows stands in for the "
      "correlation of the per-gene statistics"};
  return j.dump(2) + "\n";
}

std::string zscore_null_json(const ZscoreNullResult& z) {
  nlohmann::json j;
  j["sample_perm"] = {{"mean", z.sample_perm_mean},
                      {"variance", z.sample_perm_variance},
                      {"count", z.sample_perm_z.size()}};
  j["gene_perm"] = {{"mean", z.gene_perm_mean},
                    {"variance", z.gene_perm_variance},
                    {"count", z.gene_perm_z.size()}};
  std::vector<double> edges;
  for (int i = 0; i <= 64; ++i)
    edges.push_back(-8.0 + 0.25 * i);
  j["bin_edges"] = edges;
  j["sample_perm"]["fractions"] = fraction_histogram<64>(z.sample_perm_z, -8.0, 8.0);
  j["gene_perm"]["fractions"] = fraction_histogram<64>(z.gene_perm_z, -8.0, 8.0);
  return j.dump(2) + "\n";
}

std::string benchmark_summary_tsv(std::span<const NullStudyReport> reports) {
  if (reports.empty())
    throw std::runtime_error("no study reports to summarize");

  std::vector<std::string> datasets;
  for (const auto& r : reports)
    if (std::find(datasets.begin(), datasets.end(), r.dataset_label) == datasets.end())
      datasets.push_back(r.dataset_label);

  const auto find_report = [&](const std::string& ds, Method m) -> const NullStudyReport* {
    for (const auto& r : reports)
      if (r.dataset_label == ds && r.method == m)
        return &r;
    return nullptr;
  };

  bool any_sea = false, any_gsea = false;
  for (const auto& r : reports) {
    any_sea = any_sea || r.method == Method::Sea;
    any_gsea = any_gsea || r.method == Method::Gsea;
  }
  if (any_sea && any_gsea) {
    for (const auto& ds : datasets) {
      const bool has_sea = find_report(ds, Method::Sea) != nullptr;
      const bool has_gsea = find_report(ds, Method::Gsea) != nullptr;
      if (has_sea != has_gsea)
        throw std::runtime_error("dataset '" + ds + "' lacks one method's report");
    }
  }

  std::string out =
      "dataset\tsea_frac_q_lt_0.05\tgsea_frac_q_lt_0.05\tsea_frac_q_lt_0.25\t"
      "gsea_frac_q_lt_0.25\tratio_0.05\tflag\n";
  for (const auto& ds : datasets) {
    const auto* sea = find_report(ds, Method::Sea);
    const auto* gsea = find_report(ds, Method::Gsea);
    out += ds;
    out += '\t';
    out += sea ? format_sig(sea->frac_q_below_05) : "-";
    out += '\t';
    out += gsea ? format_sig(gsea->frac_q_below_05) : "-";
    out += '\t';
    out += sea ? format_sig(sea->frac_q_below_25) : "-";
    out += '\t';
    out += gsea ? format_sig(gsea->frac_q_below_25) : "-";
    out += '\t';
    std::string flag;
    if (sea && gsea) {
      const double a = sea->frac_q_below_05;
      const double b = gsea->frac_q_below_05;
      if (b > 0.0) {
        out += format_sig(a / b);
        if (a > 10.0 * b)
          flag = "*";
      } else {
        out += a > 0.0 ? "inf" : "-";
        if (a > 0.0)
          flag = "*";
      }
    } else {
      out += "-";
    }
    out += '\t';
    out += flag.empty() ? "." : flag;
    out += '\n';
  }
  return out;
}

}  // namespace enrichkit
