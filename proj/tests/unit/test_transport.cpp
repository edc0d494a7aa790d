#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "exmerge/error.hpp"
#include "exmerge/transport.hpp"

using namespace exm;

namespace {

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return v;
}

Matrix random_cost(std::mt19937_64& rng, std::size_t r, std::size_t c, bool integral) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::uniform_int_distribution<int> k(0, 3);
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = integral ? k(rng) : u(rng);
  return m;
}

}  // namespace

TEST_CASE("transport optimum carries a dual certificate") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t r = 1 + rep % 7, c = 1 + (rep / 7) % 6;
    const auto a = random_simplex(rng, r);
    const auto b = random_simplex(rng, c);
    const auto cost = random_cost(rng, r, c, rep % 2 == 0);
    const auto sol = solve_transport(a, b, cost);
    // Primal feasibility and objective recomputed from the plan.
    double obj = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        CHECK(sol.plan(i, j) >= -1e-15);
        row += sol.plan(i, j);
        obj += sol.plan(i, j) * cost(i, j);
      }
      CHECK(row == doctest::Approx(a[i]).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < c; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < r; ++i) col += sol.plan(i, j);
      CHECK(col == doctest::Approx(b[j]).epsilon(1e-12));
    }
    CHECK(obj == doctest::Approx(sol.cost).epsilon(1e-12));
    // Dual feasibility and objective recomputed from the potentials.
    double dual = 0.0, violation = 0.0;
    for (std::size_t j = 0; j < c; ++j) dual += b[j] * sol.col_potential[j];
    for (std::size_t i = 0; i < r; ++i) dual -= a[i] * sol.row_potential[i];
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        violation = std::max(violation, sol.col_potential[j] - sol.row_potential[i] - cost(i, j));
    CHECK(violation <= 1e-12);
    CHECK(std::abs(dual - obj) <= 1e-12);
  }
}

TEST_CASE("uniform transport equals the best assignment") {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n <= 6; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto cost = random_cost(rng, n, n, rep % 2 == 0);
      std::vector<double> w(n, 1.0 / static_cast<double>(n));
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      double best = 1e300;
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += cost(i, perm[i]);
        best = std::min(best, s / static_cast<double>(n));
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(std::abs(solve_transport(w, w, cost).cost - best) <= 1e-12);
    }
  }
}

TEST_CASE("transport rejects unbalanced input") {
  std::vector<double> a{0.5, 0.5}, b{0.9};
  CHECK_THROWS_AS(solve_transport(a, b, Matrix(2, 1)), InvalidInput);
  std::vector<double> c{1.0};
  CHECK_THROWS_AS(solve_transport(a, c, Matrix(1, 1)), InvalidInput);
}

TEST_CASE("bipartite max flow equals the minimum cut") {
  std::mt19937_64 rng(9);
  std::bernoulli_distribution edge(0.4);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t r = 1 + rep % 6, c = 1 + (rep / 6) % 6;
    const auto a = random_simplex(rng, r);
    const auto b = random_simplex(rng, c);
    std::vector<std::vector<std::size_t>> allowed(r);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j)
        if (edge(rng)) allowed[i].push_back(j);
    // Cut: rows kept on the source side are the set S; then all their
    // neighbours must be cut at the sink edges.
    double cut = 1e300;
    for (std::size_t mask = 0; mask < (std::size_t{1} << r); ++mask) {
      double s = 0.0;
      std::vector<bool> nb(c, false);
      for (std::size_t i = 0; i < r; ++i) {
        if (mask >> i & 1) {
          for (auto j : allowed[i]) nb[j] = true;
        } else {
          s += a[i];
        }
      }
      for (std::size_t j = 0; j < c; ++j)
        if (nb[j]) s += b[j];
      cut = std::min(cut, s);
    }
    CHECK(std::abs(bipartite_max_flow(a, b, allowed) - cut) <= 1e-12);
  }
}

TEST_CASE("simplex solves a textbook program") {
  Matrix A(3, 2);
  A(0, 0) = 1;
  A(1, 1) = 2;
  A(2, 0) = 3;
  A(2, 1) = 2;
  std::vector<double> rhs{4, 12, 18}, c{3, 5};
  CHECK(simplex_maximize(A, rhs, c) == doctest::Approx(36.0).epsilon(1e-12));

  Matrix B(1, 2);
  B(0, 0) = 1;
  B(0, 1) = -1;
  std::vector<double> r1{1}, c1{0, 1};
  CHECK_THROWS_AS(simplex_maximize(B, r1, c1), InvalidInput);
}

TEST_CASE("bounded-Lipschitz program on two points") {
  for (double d : {0.25, 1.0, 1.9, 2.0, 5.0}) {
    Matrix dist(2, 2);
    dist(0, 1) = dist(1, 0) = d;
    std::vector<double> mass{0.4, -0.4};
    CHECK(bounded_lipschitz_lp(mass, dist) == doctest::Approx(0.4 * std::min(d, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("prokhorov from a distance matrix on two points") {
  // mu = delta_0, nu = (1 - t) delta_0 + t delta_x: distance min(t, x) when x < 1.
  for (double t : {0.1, 0.3, 0.7}) {
    for (double x : {0.05, 0.2, 0.5, 2.0}) {
      std::vector<double> a{1.0}, b{1.0 - t, t};
      Matrix d(1, 2);
      d(0, 1) = x;
      CHECK(prokhorov_from_matrix(a, b, d) == doctest::Approx(std::min(t, x)).epsilon(1e-12));
    }
  }
}
