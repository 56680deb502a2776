#pragma once

// Shared fixtures and independent oracles. Oracles re-derive expected values
// from first principles; they never call the engine code they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "enrichkit/dataio.hpp"
#include "enrichkit/rng.hpp"

namespace testsupport {

inline enrichkit::ExpressionDataset
make_dataset(const std::vector<std::vector<double>>& rows) {
  enrichkit::ExpressionDataset ds;
  const std::size_t m = rows.empty() ? 0 : rows[0].size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.gene_ids.push_back("g" + std::to_string(i + 1));
    for (const double v : rows[i])
      ds.values.push_back(v);
  }
  for (std::size_t j = 0; j < m; ++j)
    ds.sample_ids.push_back("s" + std::to_string(j + 1));
  return ds;
}

inline enrichkit::PhenotypeAssignment
make_labels(const std::vector<int>& labels) {
  enrichkit::PhenotypeAssignment ph;
  ph.class_names = {"A", "B"};
  for (const int v : labels)
    ph.labels.push_back(static_cast<std::uint8_t>(v));
  return ph;
}

inline enrichkit::GeneSetCollection
make_sets(const std::vector<std::pair<std::string, std::vector<std::string>>>& sets) {
  enrichkit::GeneSetCollection coll;
  for (const auto& [name, members] : sets)
    coll.sets.push_back({name, members});
  return coll;
}

/// Running-sum statistic computed directly from its definition: for every
/// prefix, the weighted in-set mass over the total in-set mass minus the
/// out-of-set count over the out-of-set total, each prefix summed from
/// scratch (O(N^2)).
struct NaiveEs {
  double es = 0.0;
  std::vector<double> running_sum;
  std::size_t peak = 0;
};

inline NaiveEs naive_enrichment_score(const std::vector<double>& sorted_scores,
                                      const std::vector<bool>& in_set, double alpha) {
  const std::size_t n = sorted_scores.size();
  std::size_t nk = 0;
  double total_w = 0.0;
  for (std::size_t h = 0; h < n; ++h)
    if (in_set[h]) {
      ++nk;
      total_w += std::pow(std::abs(sorted_scores[h]), alpha);
    }
  NaiveEs out;
  out.running_sum.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double hit = 0.0;
    double miss = 0.0;
    for (std::size_t h = 0; h <= i; ++h) {
      if (in_set[h])
        hit += std::pow(std::abs(sorted_scores[h]), alpha);
      else
        miss += 1.0;
    }
    out.running_sum[i] =
        hit / total_w - miss / static_cast<double>(n - nk);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(out.running_sum[i]) > std::abs(out.running_sum[out.peak]))
      out.peak = i;
  out.es = out.running_sum[out.peak];
  return out;
}

/// Classic unweighted two-sample KS distance between the in-set and
/// out-of-set rank distributions, max over prefixes of |F_in - F_out|
/// with the sign of the largest deviation.
inline double naive_unweighted_ks(std::size_t n, const std::vector<bool>& in_set) {
  std::size_t nk = 0;
  for (const bool b : in_set)
    nk += b;
  double f_in = 0.0, f_out = 0.0, best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_set[i])
      f_in += 1.0 / static_cast<double>(nk);
    else
      f_out += 1.0 / static_cast<double>(n - nk);
    if (std::abs(f_in - f_out) > std::abs(best))
      best = f_in - f_out;
  }
  return best;
}

/// Benjamini-Hochberg adjusted p-values, the running-minimum formulation.
inline std::vector<double> bh_adjust(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adj(m);
  double running = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    const double v = 1.0 * static_cast<double>(m) * p[order[i]] / static_cast<double>(i + 1);
    running = std::min(running, v);
    adj[order[i]] = std::min(running, 1.0);
  }
  return adj;
}

inline double naive_pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

inline double sample_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  const double m = sample_mean(v);
  double ss = 0.0;
  for (const double x : v)
    ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace testsupport
