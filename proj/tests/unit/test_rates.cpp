#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "exmerge/error.hpp"
#include "exmerge/rates.hpp"
#include "helpers.hpp"

using namespace exm;

TEST_CASE("rate schedules") {
  const RateSchedule lil{RateKind::SqrtNOverLogLog, 16};
  for (double n : {16.0, 100.0, 12345.0, 1e6}) {
    const double b = rate(lil, n);
    CHECK(b * b * std::log(std::log(n)) / n == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(rate_value(RateKind::NOverLogQuarter, std::numbers::e) == doctest::Approx(std::pow(std::numbers::e, 0.25)));
  CHECK(rate_value(RateKind::NOverLogEighth, std::numbers::e) == doctest::Approx(std::pow(std::numbers::e, 0.125)));
  CHECK_THROWS_AS(rate(lil, 15.0), InvalidInput);
  CHECK_THROWS_AS(rate_value(RateKind::SqrtNOverLogLog, 15.0), InvalidInput);
  CHECK_THROWS_AS(rate(RateSchedule{RateKind::NOverLogQuarter, 8}, 20.0), ConfigError);
}

TEST_CASE("rate schedules increase on [16, 1e6]") {
  for (auto kind : {RateKind::SqrtNOverLogLog, RateKind::NOverLogQuarter, RateKind::NOverLogEighth}) {
    const RateSchedule s{kind, 16};
    double prev = rate(s, 16.0);
    for (double n = 17.0; n <= 1e6; n = std::ceil(n * 1.01)) {
      const double b = rate(s, n);
      CHECK(b > prev);
      prev = b;
    }
  }
}

TEST_CASE("gini bound: closed forms") {
  const auto line = GroundSpace::real_line();
  CHECK(gini_bound(DiscreteMeasure::dirac(line, {3.0})) == 0.0);
  const DiscreteMeasure two(line, {{0.0}, {1.0}}, {0.5, 0.5});
  CHECK(gini_bound(two) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));

  // Uniform on [0, 1]: sqrt(2) * B(3/2, 3/2) = sqrt(2) * pi / 8.
  const auto rep = gini_bound([](double x) { return std::clamp(x, 0.0, 1.0); }, -0.5, 1.5, 1e-4);
  CHECK(rep.value == doctest::Approx(std::sqrt(2.0) * std::numbers::pi / 8).epsilon(1e-5));
  CHECK_FALSE(rep.warning);
  // A heavy tail cut by the grid raises the warning.
  const auto cauchy = gini_bound([](double x) { return 0.5 + std::atan(x) / std::numbers::pi; }, -10, 10, 1e-2);
  CHECK(cauchy.warning);
}

TEST_CASE("gini bound for step CDFs equals refined quadrature") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const auto mu = testing_helpers::random_line_measure(rng, 6, false);
    const double exact = gini_bound(mu);
    const auto q = gini_bound([&](double x) { return cdf(mu, x); }, -3.5, 3.5, 1e-4);
    CHECK(std::abs(q.value - exact) <= 2e-3);
  }
}

TEST_CASE("moment bound") {
  const auto line = GroundSpace::real_line();
  CHECK(moment_bound(DiscreteMeasure::dirac(line, {0.0}), 1.0) == 0.0);
  const DiscreteMeasure sym(line, {{-1.0}, {1.0}}, {0.5, 0.5});
  CHECK(moment_bound(sym, 1.0) == doctest::Approx(std::sqrt(32.0 / 3)).epsilon(1e-15));
  CHECK_THROWS_AS(moment_bound(sym, 0.0), InvalidInput);
}

TEST_CASE("gini bound never exceeds the moment bound") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> eps(0.05, 2.0);
  for (int rep = 0; rep < 200; ++rep) {
    const auto mu = testing_helpers::random_line_measure(rng, 8, rep % 2 == 0);
    CHECK(gini_bound(mu) <= moment_bound(mu, eps(rng)) + 1e-9);
  }
}

TEST_CASE("pi_r on finite spaces") {
  const auto k = GroundSpace::discrete(4);
  CHECK(pi_r(DiscreteMeasure::dirac(k, {2.0}), 3.0).value == 0.0);
  const auto uni = DiscreteMeasure::on_labels(k, std::vector<double>(4, 0.25));
  CHECK(pi_r(uni, 3.0).value == doctest::Approx(4.0 * std::cbrt(3.0 / 16)).epsilon(1e-14));
  CHECK_THROWS_AS(pi_r(uni, 2.0), InvalidInput);

  std::mt19937_64 rng(45);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = testing_helpers::random_label_measure(rng, k);
    const double r = 2.5 + rep % 4;
    auto w = p.label_weights();
    // permutation invariance
    std::shuffle(w.begin(), w.end(), rng);
    const double v = pi_r(p, r).value;
    CHECK(v == doctest::Approx(pi_r(DiscreteMeasure::on_labels(k, w), r).value).epsilon(1e-14));
    // atomic branch of the concavity bound
    double atomic = 0.0;
    for (double x : w) atomic += std::pow(x, 1.0 / r);
    CHECK(v <= atomic + 1e-12);
    CHECK((v == 0.0) == (p.size() == 1));
  }
}

TEST_CASE("pi_r on the line stabilizes once atoms are separated") {
  const auto line = GroundSpace::real_line();
  const DiscreteMeasure mu(line, {{-0.3}, {0.0}, {2.5}}, {0.2, 0.3, 0.5});
  const auto rep = pi_r(mu, 3.0, 16);
  double expect = 0.0;
  for (double w : {0.2, 0.3, 0.5}) expect += std::cbrt(w * (1 - w));
  CHECK(rep.value == doctest::Approx(expect).epsilon(1e-14));
  CHECK(rep.schedule.size() == 16);
  CHECK_FALSE(rep.warning);
}

TEST_CASE("Y estimator") {
  std::vector<std::size_t> ns;
  for (std::size_t n = 32; n <= 100000; n = n * 13 / 10) ns.push_back(n);
  ns.push_back(100000);
  std::vector<double> zero(ns.size(), 0.0), exact(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double n = static_cast<double>(ns[i]);
    exact[i] = std::sqrt(std::log(n) / n);
  }
  CHECK(y_estimator(ns, zero).value == 0.0);
  CHECK(y_estimator(ns, exact).value == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
  CHECK(y_estimator(ns, exact).per_replicate);
  std::vector<std::size_t> one{100};
  std::vector<double> d{0.1};
  CHECK_THROWS_AS(y_estimator(one, d), InvalidInput);
}
