#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "enrichkit/local_stats.hpp"
#include "enrichkit/rng.hpp"
#include "test_support.hpp"

using namespace enrichkit;

namespace {

std::vector<std::uint8_t> half_half(std::size_t n0, std::size_t n1) {
  std::vector<std::uint8_t> labels(n0, 0);
  labels.insert(labels.end(), n1, 1);
  return labels;
}

}  // namespace

TEST_CASE("two_sample_t: identical classes score zero") {
  const std::vector<double> row = {1, 2, 3, 1, 2, 3};
  CHECK(two_sample_t(row, half_half(3, 3)) == 0.0);
}

TEST_CASE("two_sample_t: hand-computed value") {
  // means 2 and 4, unbiased variances 1 and 1
  const std::vector<double> row = {1, 2, 3, 3, 4, 5};
  CHECK(two_sample_t(row, half_half(3, 3)) ==
        doctest::Approx(-2.0 / std::sqrt(2.0)).epsilon(1e-9));
}

TEST_CASE("two_sample_t: zero variance with a real difference saturates") {
  const std::vector<double> row = {5, 5, 1, 1};
  CHECK(two_sample_t(row, half_half(2, 2)) == kLargeT);
  const std::vector<double> neg = {1, 1, 5, 5};
  CHECK(two_sample_t(neg, half_half(2, 2)) == -kLargeT);
}

TEST_CASE("signal_to_noise: the 20% floors bind on low-noise classes") {
  // class means 10 and 5, class sd 1 and 0.5; floors lift them to 2 and 1
  const std::vector<double> row = {9, 10, 11, 4.5, 5, 5.5};
  CHECK(signal_to_noise(row, half_half(3, 3)) ==
        doctest::Approx(5.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("signal_to_noise: identical classes and the all-zero case") {
  const std::vector<double> same = {1, 2, 3, 1, 2, 3};
  CHECK(signal_to_noise(same, half_half(3, 3)) == 0.0);
  const std::vector<double> zeros = {0, 0, 0, 0};
  CHECK(signal_to_noise(zeros, half_half(2, 2)) == 0.0);
}

TEST_CASE("signal_to_noise: negative class means still floor the dispersion") {
  // log-space style data; the floor uses |mean|
  const std::vector<double> row = {-10.1, -10, -9.9, -5.05, -5, -4.95};
  const double s = signal_to_noise(row, half_half(3, 3));
  // floors 2 and 1 dominate the tiny sds
  CHECK(s == doctest::Approx(-5.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("median and mad") {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  CHECK(median(v) == 3.0);
  CHECK(mad(v) == doctest::Approx(kMadScale).epsilon(1e-12));
  const std::vector<double> even = {1, 2, 3, 4};
  CHECK(median(even) == 2.5);
}

TEST_CASE("median_mad_normalize: hand-computed example") {
  LocalStatistics stats;
  stats.scores = {1, 2, 3, 4, 5};
  const auto out = median_mad_normalize(stats);
  REQUIRE(out.normalized);
  CHECK(out.scores[0] == doctest::Approx(-1.349).epsilon(1e-3));
  CHECK(out.scores[1] == doctest::Approx(-0.674).epsilon(1e-3));
  CHECK(out.scores[2] == doctest::Approx(0.0));
  CHECK(out.scores[4] == doctest::Approx(1.349).epsilon(1e-3));
}

TEST_CASE("median_mad_normalize: centered input keeps its median at zero") {
  LocalStatistics stats;
  stats.scores = {-2, -1, 0, 1, 2};
  const auto out = median_mad_normalize(stats);
  CHECK(median(out.scores) == 0.0);
}

TEST_CASE("median_mad_normalize: constant scores are degenerate") {
  LocalStatistics stats;
  stats.scores = {3, 3, 3, 3};
  CHECK_THROWS_WITH_AS(median_mad_normalize(stats),
                       doctest::Contains("degenerate score distribution"),
                       std::runtime_error);
}

TEST_CASE("normalized output has median 0 and unit scaled MAD") {
  Rng rng(21, 7, 0);
  for (int trial = 0; trial < 20; ++trial) {
    LocalStatistics stats;
    const std::size_t n = 5 + rng.next_below(200);
    for (std::size_t i = 0; i < n; ++i)
      stats.scores.push_back(10.0 * rng.next_gaussian() + 3.0);
    const auto out = median_mad_normalize(stats);
    CHECK(std::abs(median(out.scores)) < 1e-12);
    CHECK(mad(out.scores) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("label swap negates both statistics exactly") {
  Rng rng(3, 44, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n0 = 2 + rng.next_below(6);
    const std::size_t n1 = 2 + rng.next_below(6);
    std::vector<double> row(n0 + n1);
    for (auto& v : row)
      v = rng.next_gaussian() * 3.0 + 1.0;
    auto labels = half_half(n0, n1);
    auto swapped = labels;
    for (auto& l : swapped)
      l ^= 1;
    CHECK(two_sample_t(row, labels) == -two_sample_t(row, swapped));
    CHECK(signal_to_noise(row, labels) == -signal_to_noise(row, swapped));
  }
}

TEST_CASE("two_sample_t is invariant to shift and positive scaling") {
  Rng rng(17, 44, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> row(12);
    for (auto& v : row)
      v = rng.next_gaussian();
    const auto labels = half_half(6, 6);
    const double base = two_sample_t(row, labels);

    std::vector<double> shifted = row;
    const double c = 20.0 * (rng.next_double() - 0.5);
    for (auto& v : shifted)
      v += c;
    CHECK(two_sample_t(shifted, labels) == doctest::Approx(base).epsilon(1e-9));

    std::vector<double> scaled = row;
    const double lambda = 0.1 + 5.0 * rng.next_double();
    for (auto& v : scaled)
      v *= lambda;
    CHECK(two_sample_t(scaled, labels) == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("signal_to_noise denominator respects the mean floor") {
  Rng rng(29, 5, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> row(10);
    for (auto& v : row)
      v = rng.next_gaussian() * 2.0 + 4.0 * (rng.next_double() - 0.5);
    const auto labels = half_half(5, 5);
    double m0 = 0, m1 = 0;
    for (int j = 0; j < 5; ++j) {
      m0 += row[j] / 5.0;
      m1 += row[j + 5] / 5.0;
    }
    if (std::abs(m0) < 1e-6 || std::abs(m1) < 1e-6)
      continue;
    const double s = signal_to_noise(row, labels);
    const double cap = std::abs(m0 - m1) / (0.20 * (std::abs(m0) + std::abs(m1)));
    CHECK(std::abs(s) <= cap * (1 + 1e-12));
  }
}

TEST_CASE("compute_local_stats matches the per-row functions and parallelizes") {
  Rng rng(8, 2, 0);
  std::vector<std::vector<double>> rows(64, std::vector<double>(10));
  for (auto& r : rows)
    for (auto& v : r)
      v = rng.next_gaussian();
  const auto ds = testsupport::make_dataset(rows);
  const auto ph = testsupport::make_labels({0, 0, 0, 0, 0, 1, 1, 1, 1, 1});

  const auto serial = compute_local_stats(ds, ph, Metric::SignalToNoise, false, 1);
  const auto parallel = compute_local_stats(ds, ph, Metric::SignalToNoise, false, 4);
  REQUIRE(serial.scores.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(serial.scores[i] == parallel.scores[i]);
    CHECK(serial.scores[i] == signal_to_noise(ds.row(i), ph.labels));
  }
}

TEST_CASE("compute_local_stats validates the class layout") {
  const auto ds = testsupport::make_dataset({{1, 2, 3, 4}});
  CHECK_THROWS(compute_local_stats(ds, testsupport::make_labels({0, 0, 0, 1}),
                                   Metric::TwoSampleT, false));
  CHECK_THROWS(compute_local_stats(ds, testsupport::make_labels({0, 1}),
                                   Metric::TwoSampleT, false));
}
