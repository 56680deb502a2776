#include "enrichkit/local_stats.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace enrichkit {

std::string_view metric_name(Metric m) {
  return m == Metric::TwoSampleT ? "two_sample_t" : "signal_to_noise";
}

Metric metric_from_name(std::string_view name) {
  if (name == "ttest")
    return Metric::TwoSampleT;
  if (name == "s2n")
    return Metric::SignalToNoise;
  throw std::runtime_error("unknown metric '" + std::string(name) + "', expected ttest or s2n");
}

int resolve_threads(int requested) {
  if (requested > 0)
    return requested;
  if (const char* env = std::getenv("ENRICHKIT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0)
      return v;
  }
  return omp_get_max_threads();
}

namespace {

struct ClassMoments {
  double mean0, mean1, var0, var1;  // unbiased variances
  std::size_t n0, n1;
};

ClassMoments class_moments(std::span<const double> row,
                           std::span<const std::uint8_t> labels) {
  double sum0 = 0.0, sum1 = 0.0;
  std::size_t n0 = 0, n1 = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (labels[j]) {
      sum1 += row[j];
      ++n1;
    } else {
      sum0 += row[j];
      ++n0;
    }
  }
  if (n0 < 2 || n1 < 2)
    throw std::runtime_error("need at least two samples per class");
  const double mean0 = sum0 / static_cast<double>(n0);
  const double mean1 = sum1 / static_cast<double>(n1);
  double ss0 = 0.0, ss1 = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (labels[j]) {
      const double d = row[j] - mean1;
      ss1 += d * d;
    } else {
      const double d = row[j] - mean0;
      ss0 += d * d;
    }
  }
  return {mean0, mean1, ss0 / static_cast<double>(n0 - 1),
          ss1 / static_cast<double>(n1 - 1), n0, n1};
}

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

double two_sample_t(std::span<const double> row, std::span<const std::uint8_t> labels) {
  const auto m = class_moments(row, labels);
  const double diff = m.mean0 - m.mean1;
  const double denom2 = m.var0 + m.var1;
  if (denom2 == 0.0)
    return diff == 0.0 ? 0.0 : sign(diff) * kLargeT;
  return diff / std::sqrt(denom2);
}

double signal_to_noise(std::span<const double> row, std::span<const std::uint8_t> labels) {
  const auto m = class_moments(row, labels);
  const double s0 = std::max({std::sqrt(m.var0), 0.20 * std::abs(m.mean0), kAbsFloor});
  const double s1 = std::max({std::sqrt(m.var1), 0.20 * std::abs(m.mean1), kAbsFloor});
  return (m.mean0 - m.mean1) / (s0 + s1);
}

double median(std::span<const double> v) {
  if (v.empty())
    throw std::runtime_error("median of empty vector");
  std::vector<double> tmp(v.begin(), v.end());
  const std::size_t mid = tmp.size() / 2;
  std::nth_element(tmp.begin(), tmp.begin() + mid, tmp.end());
  const double upper = tmp[mid];
  if (tmp.size() % 2 == 1)
    return upper;
  const double lower = *std::max_element(tmp.begin(), tmp.begin() + mid);
  return 0.5 * (lower + upper);
}

double mad(std::span<const double> v) {
  const double med = median(v);
  std::vector<double> dev(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    dev[i] = std::abs(v[i] - med);
  return kMadScale * median(dev);
}

namespace {

// Serial normalization core shared by the public and in-place variants.
void normalize_core(std::span<double> scores, std::vector<double>& scratch) {
  scratch.assign(scores.begin(), scores.end());
  const std::size_t mid = scratch.size() / 2;
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  double med = scratch[mid];
  if (scratch.size() % 2 == 0)
    med = 0.5 * (med + *std::max_element(scratch.begin(), scratch.begin() + mid));

  for (std::size_t i = 0; i < scores.size(); ++i)
    scratch[i] = std::abs(scores[i] - med);
  std::nth_element(scratch.begin(), scratch.begin() + mid, scratch.end());
  double mad_raw = scratch[mid];
  if (scratch.size() % 2 == 0)
    mad_raw = 0.5 * (mad_raw + *std::max_element(scratch.begin(), scratch.begin() + mid));

  const double scale = kMadScale * mad_raw;
  if (scale == 0.0)
    throw std::runtime_error("degenerate score distribution (zero median absolute deviation)");
  const double inv = 1.0 / scale;
  for (auto& s : scores)
    s = (s - med) * inv;
}

}  // namespace

void median_mad_normalize_inplace(std::span<double> scores, std::vector<double>& scratch) {
  if (scores.size() < 2)
    throw std::runtime_error("normalization needs at least two scores");
  normalize_core(scores, scratch);
}

LocalStatistics median_mad_normalize(const LocalStatistics& stats) {
  LocalStatistics out = stats;
  std::vector<double> scratch;
  median_mad_normalize_inplace(out.scores, scratch);
  out.normalized = true;
  return out;
}

void compute_scores_into(const ExpressionDataset& ds,
                         std::span<const std::uint8_t> labels, Metric metric,
                         std::span<double> out) {
  const std::size_t n = ds.n_genes();
  if (labels.size() != ds.n_samples())
    throw std::runtime_error("label count does not match sample count");
  if (out.size() != n)
    throw std::runtime_error("output buffer size mismatch");
  if (metric == Metric::TwoSampleT) {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = two_sample_t(ds.row(i), labels);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      out[i] = signal_to_noise(ds.row(i), labels);
  }
}

LocalStatistics compute_local_stats(const ExpressionDataset& ds,
                                    const PhenotypeAssignment& ph, Metric metric,
                                    bool normalize, int threads) {
  if (ph.n_samples() != ds.n_samples())
    throw std::runtime_error("phenotype sample count does not match dataset");
  if (ph.class_count(0) < 2 || ph.class_count(1) < 2)
    throw std::runtime_error("need at least two samples per class");
  LocalStatistics stats;
  stats.metric = metric;
  stats.scores.resize(ds.n_genes());
  const std::span<const std::uint8_t> labels(ph.labels);
  const auto n = static_cast<std::int64_t>(ds.n_genes());
  const int nt = resolve_threads(threads);

#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::int64_t i = 0; i < n; ++i) {
    stats.scores[i] = metric == Metric::TwoSampleT
                          ? two_sample_t(ds.row(i), labels)
                          : signal_to_noise(ds.row(i), labels);
  }

  if (normalize) {
    std::vector<double> scratch;
    median_mad_normalize_inplace(stats.scores, scratch);
    stats.normalized = true;
  }
  return stats;
}

}  // namespace enrichkit
