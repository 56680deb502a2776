#pragma once

#include <span>
#include <vector>

namespace enrichkit {

struct QValueResult {
  std::vector<double> q_values;  // aligned to the input order
  double pi0_hat = 1.0;
  std::vector<double> lambda_grid;
};

std::vector<double> default_lambda_grid();  // 0.05, 0.10, ..., 0.95

/// Estimate the null proportion from the p-value histogram tail. Fits a
/// natural cubic spline (3 df) through pi0(lambda) over the grid and
/// evaluates it at the largest lambda, clamped into (0, 1]. Inputs shorter
/// than 100 return 1 rather than an unstable fit.
double estimate_pi0(std::span<const double> pvalues,
                    std::span<const double> lambda_grid);

/// Storey q-values: q_(i) = min_{j>=i} pi0 * m * p_(j) / j over p sorted
/// ascending, clamped to [0, 1], returned in the input order.
QValueResult qvalues(std::span<const double> pvalues);

}  // namespace enrichkit
