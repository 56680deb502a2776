#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "enrichkit/fdr.hpp"
#include "enrichkit/rng.hpp"
#include "test_support.hpp"

using namespace enrichkit;

TEST_CASE("pi0: all p-values at one clamps to one") {
  std::vector<double> p(1000, 1.0);
  CHECK(estimate_pi0(p, default_lambda_grid()) == 1.0);
}

TEST_CASE("pi0: short inputs fall back to one") {
  std::vector<double> p(99, 0.001);
  CHECK(estimate_pi0(p, default_lambda_grid()) == 1.0);
}

TEST_CASE("pi0: uniform p-values estimate close to one") {
  Rng rng(31, 6, 0);
  std::vector<double> p(10000);
  for (auto& v : p)
    v = rng.next_double();
  CHECK(estimate_pi0(p, default_lambda_grid()) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("pi0: half uniform, half near zero estimates one half") {
  Rng rng(32, 6, 0);
  std::vector<double> p;
  for (int i = 0; i < 5000; ++i)
    p.push_back(rng.next_double());
  for (int i = 0; i < 5000; ++i)
    p.push_back(1e-7 * rng.next_double());
  CHECK(estimate_pi0(p, default_lambda_grid()) == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("qvalues: worked example reduces to step-up adjustment") {
  const std::vector<double> p = {0.01, 0.02, 0.03, 0.9};
  const auto res = qvalues(p);
  CHECK(res.pi0_hat == 1.0);  // m < 100
  CHECK(res.q_values[0] == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(res.q_values[1] == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(res.q_values[2] == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(res.q_values[3] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("qvalues: single p-value and full ties") {
  const auto single = qvalues(std::vector<double>{0.01});
  CHECK(single.q_values[0] == doctest::Approx(0.01).epsilon(1e-15));

  const std::vector<double> tied(10, 0.5);
  const auto res = qvalues(tied);
  for (const double q : res.q_values)
    CHECK(q == doctest::Approx(0.5 * res.pi0_hat).epsilon(1e-12));
}

TEST_CASE("qvalues: empty and out-of-range inputs are rejected") {
  CHECK_THROWS(qvalues(std::vector<double>{}));
  CHECK_THROWS(qvalues(std::vector<double>{0.5, 1.5}));
  CHECK_THROWS(qvalues(std::vector<double>{-0.1}));
  CHECK_THROWS(estimate_pi0(std::vector<double>{}, default_lambda_grid()));
}

TEST_CASE("qvalues equal the independent step-up oracle when pi0 is one") {
  Rng rng(41, 3, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + rng.next_below(99);  // short inputs pin pi0 to 1
    std::vector<double> p(m);
    for (auto& v : p) {
      v = rng.next_double();
      if (rng.next_below(4) == 0)
        v *= 0.01;  // sprinkle small values
    }
    const auto res = qvalues(p);
    REQUIRE(res.pi0_hat == 1.0);
    const auto oracle = testsupport::bh_adjust(p);
    for (std::size_t i = 0; i < m; ++i)
      CHECK(res.q_values[i] == oracle[i]);
  }
}

TEST_CASE("qvalues: monotone in p, bounded, and below pi0") {
  Rng rng(42, 3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 2 + rng.next_below(500);
    std::vector<double> p(m);
    for (auto& v : p)
      v = rng.next_double();
    const auto res = qvalues(p);
    double maxq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(res.q_values[i] >= 0.0);
      CHECK(res.q_values[i] <= 1.0);
      maxq = std::max(maxq, res.q_values[i]);
      for (std::size_t j = 0; j < m; ++j)
        if (p[i] <= p[j])
          CHECK(res.q_values[i] <= res.q_values[j] + 1e-15);
    }
    CHECK(maxq <= res.pi0_hat + 1e-12);
  }
}

TEST_CASE("qvalues: permuting the input permutes the output") {
  Rng rng(43, 3, 0);
  std::vector<double> p(200);
  for (auto& v : p)
    v = rng.next_double();
  const auto base = qvalues(p);

  std::vector<std::size_t> perm(p.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    perm[i] = i;
  Rng shuffler(44, 3, 0);
  shuffler.shuffle(std::span<std::size_t>(perm));

  std::vector<double> permuted(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    permuted[i] = p[perm[i]];
  const auto res = qvalues(permuted);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(res.q_values[i] == base.q_values[perm[i]]);
}
