#include <doctest.h>

#include <cmath>
#include <map>

#include "exmerge/error.hpp"
#include "exmerge/models.hpp"

using namespace exm;

namespace {

std::shared_ptr<const ExchangeableModel> dirichlet(std::size_t k, std::vector<double> a) {
  return std::make_shared<const ExchangeableModel>(make_finite_dirichlet(GroundSpace::discrete(k), std::move(a)));
}

std::shared_ptr<const ExchangeableModel> dp_normal(double alpha, std::size_t T = 64) {
  return std::make_shared<const ExchangeableModel>(make_dp(BaseMeasure::normal(0.0, 1.0, 256), alpha, T, 1e-6));
}

}  // namespace

TEST_CASE("model construction validates parameters") {
  CHECK_THROWS_AS(make_finite_dirichlet(GroundSpace::discrete(1), {1.0}), ConfigError);
  CHECK_THROWS_AS(make_finite_dirichlet(GroundSpace::discrete(2), {1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(make_finite_dirichlet(GroundSpace::discrete(2), {1.0}), ConfigError);
  CHECK_THROWS_AS(make_finite_dirichlet(GroundSpace::real_line(), {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(make_dp(BaseMeasure::normal(), 0.0), ConfigError);
  CHECK_THROWS_AS(BaseMeasure::normal(0.0, -1.0), ConfigError);
}

TEST_CASE("truncation residual is checked against its bound") {
  const ExchangeableModel ok = make_dp(BaseMeasure::normal(), 1.0, 30, 1e-6);
  CHECK_NOTHROW(validate_truncation(ok));
  CHECK(std::get<DPModel>(ok).expected_residual() == doctest::Approx(std::pow(0.5, 30)));
  const ExchangeableModel short_sticks = make_dp(BaseMeasure::normal(), 1.0, 10, 1e-6);
  CHECK_THROWS_AS(validate_truncation(short_sticks), ConfigError);
  Engine eng(1);
  CHECK_THROWS_AS(prior_draw(short_sticks, eng), ConfigError);
}

TEST_CASE("finite Dirichlet posterior and predictive") {
  const auto model = dirichlet(3, {1.0, 2.0, 3.0});
  PosteriorState st(model);
  st.add({0.0}, 4);
  st.add({2.0});
  CHECK(st.n() == 5);
  CHECK(st.dirichlet_parameters() == std::vector<double>{5.0, 2.0, 4.0});
  const auto p1 = predictive_one(st);
  CHECK(p1.label_weights()[0] == doctest::Approx(5.0 / 11));
  CHECK(p1.label_weights()[2] == doctest::Approx(4.0 / 11));
}

TEST_CASE("two-step Polya urn arithmetic") {
  const auto model = dirichlet(2, {1.0, 1.0});
  const PosteriorState st(model);
  const auto p2 = predictive_m(st, 2);
  // P(0,0) = 1/2 * 2/3; each ordered mixed pair 1/2 * 1/3 = 1/6.
  std::map<std::pair<double, double>, double> w;
  for (std::size_t i = 0; i < p2.size(); ++i) {
    const auto& pts = p2.support()[i].points();
    w[{pts[0][0], pts[1][0]}] = p2.weights()[i];
  }
  CHECK(w.at({0.0, 0.0}) == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(w.at({0.0, 1.0}) == doctest::Approx(2.0 / 6).epsilon(1e-14));
  CHECK(w.at({1.0, 1.0}) == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("m-step predictive matches simulation through the directing measure") {
  const auto model = dirichlet(3, {0.5, 1.0, 2.0});
  PosteriorState st(model);
  st.add({1.0}, 3);
  const auto p3 = predictive_m(st, 3);
  // Simulate: draw p from the posterior, then three i.i.d. labels.
  Engine eng(99);
  const std::size_t N = 200000;
  std::map<std::vector<double>, double> freq;
  for (std::size_t r = 0; r < N; ++r) {
    const auto p = posterior_draw(st, eng);
    const AtomSampler draw(p);
    std::vector<double> key;
    for (int i = 0; i < 3; ++i) key.push_back(draw(eng)[0]);
    std::sort(key.begin(), key.end());
    freq[key] += 1.0 / N;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p3.size(); ++i) {
    std::vector<double> key;
    for (const auto& x : p3.support()[i].points()) key.push_back(x[0]);
    const double w = p3.weights()[i];
    total += w;
    const double se = std::sqrt(w * (1 - w) / N);
    CHECK(std::abs(freq[key] - w) <= 5 * se + 1e-12);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("posterior state is invariant under data order") {
  const auto model = dp_normal(2.0);
  std::vector<Point> xs{{0.5}, {-1.0}, {0.5}, {2.0}};
  std::vector<Point> ys{{2.0}, {0.5}, {-1.0}, {0.5}};
  const PosteriorState empty(model);
  CHECK(posterior_update(empty, xs) == posterior_update(empty, ys));
  const auto st = posterior_update(empty, xs);
  REQUIRE(st.observed().size() == 3);
  CHECK(st.observed()[1].first == Point{0.5});
  CHECK(st.observed()[1].second == 2);
}

TEST_CASE("DP one-step predictive mixes base and data") {
  const auto model = dp_normal(2.0);
  auto st = posterior_update(PosteriorState(model), std::vector<Point>{{0.25}, {0.25}, {3.0}});
  const auto p1 = predictive_one(st);
  double at_data = 0.0;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p1.atom(i)[0] == 0.25) at_data += p1.weight(i);
  }
  // 2 observations at 0.25 out of alpha + n = 5; quadrature atoms never hit 0.25.
  CHECK(at_data == doctest::Approx(2.0 / 5).epsilon(1e-12));
  CHECK_THROWS_AS(predictive_m(st, 2), Unsupported);
}

TEST_CASE("Bayes estimate under the DP has the closed-form shrinkage") {
  const auto model = dp_normal(1.5);
  const auto g = [](const Point& x) { return std::tanh(x[0]); };
  const double prior_g = prior_mean(*model).expectation(g);
  Engine eng(5);
  auto st = PosteriorState(model);
  const auto base = std::get<DPModel>(*model).base;
  for (int n = 1; n <= 40; ++n) {
    st.add(base.sample(eng));
    double plugin = 0.0;
    for (const auto& [x, c] : st.observed()) plugin += g(x) * static_cast<double>(c) / n;
    const double gap = bayes_estimator(st, g) - plugin;
    CHECK(std::abs(gap - 1.5 / (1.5 + n) * (prior_g - plugin)) <= 1e-12);
  }
}

TEST_CASE("normal base: quadrature representation and sampler") {
  const auto b = BaseMeasure::normal(1.0, 2.0, 1000);
  const auto& rep = b.representation();
  CHECK(rep.size() == 1000);
  const double mean = rep.expectation([](const Point& x) { return x[0]; });
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-12));
  Engine eng(17);
  double s = 0.0, ss = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double x = b.sample(eng)[0];
    s += x;
    ss += x * x;
  }
  const double m = s / N, var = ss / N - m * m;
  CHECK(std::abs(m - 1.0) < 5 * 2.0 / std::sqrt(N));
  CHECK(std::abs(var - 4.0) < 0.1);
}

TEST_CASE("Dirichlet draws have the right mean") {
  Engine eng(3);
  std::vector<double> params{0.5, 1.5, 3.0};
  std::vector<double> mean(3, 0.0);
  const int N = 100000;
  for (int i = 0; i < N; ++i) {
    const auto v = dirichlet_draw(params, eng);
    double t = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      mean[j] += v[j] / N;
      t += v[j];
    }
    CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(mean[j] - params[j] / 5.0) < 0.005);
}

TEST_CASE("stick-breaking draws are probability measures on T + 1 atoms") {
  Engine eng(8);
  const auto base = BaseMeasure::normal();
  for (int i = 0; i < 2000; ++i) {
    const auto p = stick_breaking_draw(1.0, base, 5, eng);
    CHECK(p.size() <= 6);
    double t = 0.0;
    for (double w : p.weights()) t += w;
    CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("DP posterior draws concentrate on the data as n grows") {
  const auto model = dp_normal(1.0);
  std::vector<Point> xs(500, Point{0.7});
  const auto st = posterior_update(PosteriorState(model), xs);
  Engine eng(4);
  double mass = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const auto p = posterior_draw(st, eng);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (p.atom(j)[0] == 0.7) mass += p.weight(j) / 2000;
  }
  // E[V_1] = 500 / 501
  CHECK(mass == doctest::Approx(500.0 / 501).epsilon(1e-3));
}

TEST_CASE("sequences are reproducible from their seed") {
  const ExchangeableModel m = make_finite_dirichlet(GroundSpace::discrete(3), {1, 1, 1});
  const auto a = sample_sequence(m, 100, 42);
  const auto b = sample_sequence(m, 100, 42);
  CHECK(a.directing == b.directing);
  CHECK(a.observations == b.observations);
  const auto c = sample_sequence(m, 100, 43);
  CHECK(a.observations != c.observations);
}
