#include "enrichkit/sea.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enrichkit/fdr.hpp"
#include "enrichkit/text.hpp"

namespace enrichkit {

double normal_upper_tail(double x) {
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double sea_zscore(std::span<const double> scores, std::span<const std::int32_t> set_rows) {
  if (set_rows.size() < 2)
    throw std::runtime_error("set needs at least two genes");
  double sum = 0.0;
  for (const auto r : set_rows)
    sum += scores[r];
  const double nk = static_cast<double>(set_rows.size());
  return std::sqrt(nk) * (sum / nk);
}

double sea_chi2(std::span<const double> scores, std::span<const std::int32_t> set_rows) {
  if (set_rows.size() < 2)
    throw std::runtime_error("set needs at least two genes");
  const double nk = static_cast<double>(set_rows.size());
  double sum = 0.0;
  for (const auto r : set_rows)
    sum += scores[r];
  const double mean = sum / nk;
  double ss = 0.0;
  for (const auto r : set_rows) {
    const double d = scores[r] - mean;
    ss += d * d;
  }
  return (ss - (nk - 1.0)) / std::sqrt(2.0 * (nk - 1.0));
}

SeaPValues sea_pvalues(double z, double chi2) {
  if (!std::isfinite(z) || !std::isfinite(chi2))
    throw std::runtime_error("non-finite set statistic");
  const double p_z = 2.0 * normal_upper_tail(std::abs(z));
  const double p_chi2 = normal_upper_tail(chi2);
  SeaPValues out{p_z, p_chi2, std::min(p_z, p_chi2), p_z <= p_chi2 ? 'z' : 'c'};
  return out;
}

std::vector<SeaResult> run_sea(const ExpressionDataset& ds,
                               const PhenotypeAssignment& ph,
                               const GeneSetCollection& sets,
                               const SeaConfig& cfg) {
  if (sets.size() == 0)
    throw std::runtime_error("no gene sets to score");
  const auto stats = compute_local_stats(ds, ph, cfg.metric, cfg.normalize, cfg.threads);
  const auto rows = map_sets_to_rows(sets, ds);

  std::vector<SeaResult> results(sets.size());
  std::vector<double> p_z(sets.size());
  std::vector<double> p_chi2(sets.size());
  for (std::size_t k = 0; k < sets.size(); ++k) {
    SeaResult& r = results[k];
    r.set_name = sets.sets[k].name;
    r.n_k = rows[k].size();
    r.z_stat = sea_zscore(stats.scores, rows[k]);
    r.chi2_stat = sea_chi2(stats.scores, rows[k]);
    const auto p = sea_pvalues(r.z_stat, r.chi2_stat);
    r.p_z = p.p_z;
    r.p_chi2 = p.p_chi2;
    r.p_combined = p.p_combined;
    r.chosen = p.chosen;
    p_z[k] = p.p_z;
    p_chi2[k] = p.p_chi2;
  }

  // q-values are estimated within each statistic family and the reported q
  // is the chosen family's. Feeding min(p_z, p_chi2) into the estimator
  // would empty the p-histogram near 1 and collapse pi0 toward zero, making
  // every set significant even on label-randomized data.
  const auto q_z = qvalues(p_z);
  const auto q_chi2 = qvalues(p_chi2);
  for (std::size_t k = 0; k < sets.size(); ++k)
    results[k].q_value =
        results[k].chosen == 'z' ? q_z.q_values[k] : q_chi2.q_values[k];

  std::sort(results.begin(), results.end(), [](const SeaResult& a, const SeaResult& b) {
    if (a.p_combined != b.p_combined)
      return a.p_combined < b.p_combined;
    return a.set_name < b.set_name;
  });
  return results;
}

std::string sea_results_tsv(std::span<const SeaResult> results, bool full_precision) {
  const auto fmt = [&](double v) {
    return full_precision ? format_full(v) : format_sig(v);
  };
  std::string out = "set\tsize\tz\tchi2\tp_z\tp_chi2\tp\tchosen\tq\n";
  for (const auto& r : results) {
    out += r.set_name;
    out += '\t';
    out += std::to_string(r.n_k);
    out += '\t';
    out += fmt(r.z_stat);
    out += '\t';
    out += fmt(r.chi2_stat);
    out += '\t';
    out += fmt(r.p_z);
    out += '\t';
    out += fmt(r.p_chi2);
    out += '\t';
    out += fmt(r.p_combined);
    out += '\t';
    out += r.chosen == 'z' ? "z" : "chi2";
    out += '\t';
    out += fmt(r.q_value);
    out += '\n';
  }
  return out;
}

}  // namespace enrichkit
