#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "enrichkit/dataio.hpp"
#include "enrichkit/local_stats.hpp"

namespace enrichkit {

struct SeaConfig {
  Metric metric = Metric::TwoSampleT;
  bool normalize = true;
  int threads = 1;
};

struct SeaResult {
  std::string set_name;
  std::size_t n_k = 0;
  double z_stat = 0.0;
  double chi2_stat = 0.0;
  double p_z = 1.0;
  double p_chi2 = 1.0;
  double p_combined = 1.0;
  char chosen = 'z';  // 'z' or 'c' (chi2); ties resolve to z
  double q_value = 1.0;
};

/// Location score: sqrt(n_k) times the mean in-set local statistic.
double sea_zscore(std::span<const double> scores, std::span<const std::int32_t> set_rows);

/// Scale score: centered sum of squared in-set deviations standardized to
/// unit variance, (sum (t - mean)^2 - (n_k - 1)) / sqrt(2 (n_k - 1)).
double sea_chi2(std::span<const double> scores, std::span<const std::int32_t> set_rows);

struct SeaPValues {
  double p_z;
  double p_chi2;
  double p_combined;
  char chosen;
};

/// p_z is the two-sided standard-normal tail (location shifts in either
/// direction count); p_chi2 is the one-sided upper tail (only excess
/// dispersion counts). p_combined is their minimum, uncorrected.
SeaPValues sea_pvalues(double z, double chi2);

double normal_upper_tail(double x);  // P(N(0,1) >= x)

/// Full pipeline: local statistics, both set scores, normal-theory p-values,
/// q-values estimated per statistic family with the chosen family's q
/// reported. Results sorted by p_combined then set name.
std::vector<SeaResult> run_sea(const ExpressionDataset& ds,
                               const PhenotypeAssignment& ph,
                               const GeneSetCollection& sets,
                               const SeaConfig& cfg);

std::string sea_results_tsv(std::span<const SeaResult> results, bool full_precision = false);

}  // namespace enrichkit
