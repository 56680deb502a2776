#include "enrichkit/fdr.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace enrichkit {

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i)
    grid.push_back(0.05 * i);
  return grid;
}

namespace {

void check_probabilities(std::span<const double> p) {
  if (p.empty())
    throw std::runtime_error("empty p-value input");
  for (const double v : p)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::runtime_error("p-value outside [0, 1]");
}

// Natural cubic spline least-squares fit with four knots spanning the grid
// (two interior), i.e. intercept + 3 effective degrees of freedom, evaluated
// at a single point.
double natural_spline_fit_at(std::span<const double> x, std::span<const double> y,
                             double x_eval) {
  const double kmin = x.front();
  const double kmax = x.back();
  const std::array<double, 4> knots = {kmin, kmin + (kmax - kmin) / 3.0,
                                       kmin + 2.0 * (kmax - kmin) / 3.0, kmax};

  const auto cube_plus = [](double t) { return t > 0.0 ? t * t * t : 0.0; };
  const auto d = [&](int j, double t) {
    return (cube_plus(t - knots[j]) - cube_plus(t - knots[3])) / (knots[3] - knots[j]);
  };
  const auto basis = [&](double t) {
    return std::array<double, 4>{1.0, t, d(0, t) - d(2, t), d(1, t) - d(2, t)};
  };

  // normal equations, 4x4
  std::array<std::array<double, 4>, 4> ata{};
  std::array<double, 4> aty{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto b = basis(x[i]);
    for (int r = 0; r < 4; ++r) {
      aty[r] += b[r] * y[i];
      for (int c = 0; c < 4; ++c)
        ata[r][c] += b[r] * b[c];
    }
  }

  // Gaussian elimination with partial pivoting
  std::array<int, 4> piv = {0, 1, 2, 3};
  for (int col = 0; col < 4; ++col) {
    int best = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(ata[piv[r]][col]) > std::abs(ata[piv[best]][col]))
        best = r;
    std::swap(piv[col], piv[best]);
    const double pivot = ata[piv[col]][col];
    if (std::abs(pivot) < 1e-30)
      throw std::runtime_error("singular spline system");
    for (int r = col + 1; r < 4; ++r) {
      const double f = ata[piv[r]][col] / pivot;
      for (int c = col; c < 4; ++c)
        ata[piv[r]][c] -= f * ata[piv[col]][c];
      aty[piv[r]] -= f * aty[piv[col]];
    }
  }
  std::array<double, 4> coef{};
  for (int col = 3; col >= 0; --col) {
    double s = aty[piv[col]];
    for (int c = col + 1; c < 4; ++c)
      s -= ata[piv[col]][c] * coef[c];
    coef[col] = s / ata[piv[col]][col];
  }

  const auto b = basis(x_eval);
  return std::inner_product(b.begin(), b.end(), coef.begin(), 0.0);
}

}  // namespace

double estimate_pi0(std::span<const double> pvalues,
                    std::span<const double> lambda_grid) {
  check_probabilities(pvalues);
  const std::size_t m = pvalues.size();
  if (m < 100)
    return 1.0;
  if (lambda_grid.size() < 4)
    throw std::runtime_error("lambda grid needs at least 4 points");

  std::vector<double> pi0_at(lambda_grid.size());
  for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
    const double lambda = lambda_grid[g];
    std::size_t count = 0;
    for (const double p : pvalues)
      if (p > lambda)
        ++count;
    pi0_at[g] = static_cast<double>(count) /
                (static_cast<double>(m) * (1.0 - lambda));
  }

  const double fitted =
      natural_spline_fit_at(lambda_grid, pi0_at, lambda_grid.back());
  return std::clamp(fitted, 1e-8, 1.0);
}

QValueResult qvalues(std::span<const double> pvalues) {
  check_probabilities(pvalues);
  QValueResult res;
  res.lambda_grid = default_lambda_grid();
  res.pi0_hat = estimate_pi0(pvalues, res.lambda_grid);

  const std::size_t m = pvalues.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

  res.q_values.resize(m);
  double running_min = 1.0;
  for (std::size_t i = m; i-- > 0;) {
    const double rank = static_cast<double>(i + 1);
    const double v = res.pi0_hat * static_cast<double>(m) * pvalues[order[i]] / rank;
    running_min = std::min(running_min, v);
    res.q_values[order[i]] = std::clamp(running_min, 0.0, 1.0);
  }
  return res;
}

}  // namespace enrichkit
