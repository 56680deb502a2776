#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "enrichkit/dataio.hpp"

namespace enrichkit {

enum class Metric { TwoSampleT, SignalToNoise };

std::string_view metric_name(Metric m);
Metric metric_from_name(std::string_view name);  // "ttest" | "s2n"

// Documented constants for the degenerate denominators the formulas leave
// unspecified.
inline constexpr double kLargeT = 1e6;      // zero-variance, nonzero-difference t
inline constexpr double kAbsFloor = 1e-8;   // dispersion floor when both class means ~ 0
inline constexpr double kMadScale = 1.4826; // normal-consistency constant

/// Per-gene scores aligned to dataset row order.
struct LocalStatistics {
  std::vector<double> scores;
  Metric metric = Metric::TwoSampleT;
  bool normalized = false;
};

/// Difference of class means over the root of summed unbiased class
/// variances. Requires at least two samples per class.
double two_sample_t(std::span<const double> row, std::span<const std::uint8_t> labels);

/// Difference of class means over the sum of floored class standard
/// deviations. Each deviation is floored at 20% of the absolute class mean,
/// and at kAbsFloor when that is still smaller.
double signal_to_noise(std::span<const double> row, std::span<const std::uint8_t> labels);

double median(std::span<const double> v);

/// Scaled median absolute deviation: kMadScale * median(|v - median(v)|).
double mad(std::span<const double> v);

/// Center at the median and rescale by the scaled MAD. Throws on a
/// degenerate (MAD = 0) score distribution.
LocalStatistics median_mad_normalize(const LocalStatistics& stats);

/// One score per gene; genes are evaluated independently (parallel when
/// threads > 1) and results do not depend on the evaluation order.
LocalStatistics compute_local_stats(const ExpressionDataset& ds,
                                    const PhenotypeAssignment& ph, Metric metric,
                                    bool normalize, int threads = 1);

// Hot-path variants used inside permutation loops: no allocation beyond the
// caller-provided buffers, strictly serial.
void compute_scores_into(const ExpressionDataset& ds,
                         std::span<const std::uint8_t> labels, Metric metric,
                         std::span<double> out);
void median_mad_normalize_inplace(std::span<double> scores,
                                  std::vector<double>& scratch);

int resolve_threads(int requested);

}  // namespace enrichkit
