#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace exm {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Optimal plan of a transportation problem together with dual potentials.
/// Optimality is certified when `cost == dual_objective` (up to rounding)
/// and `max_dual_violation` is zero up to rounding.
struct TransportSolution {
  double cost = 0.0;
  double dual_objective = 0.0;
  double max_dual_violation = 0.0;
  Matrix plan;
  std::vector<double> row_potential;
  std::vector<double> col_potential;
};

/// min sum_ij plan_ij cost_ij subject to row sums = supply, column sums =
/// demand, plan >= 0. Supplies and demands must both sum to (about) one.
/// Successive shortest paths with Dijkstra on reduced costs.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Matrix& cost);

/// Maximum flow through the bipartite graph source -> i (cap a_i) -> j
/// (uncapacitated, only where allowed(i, j)) -> sink (cap b_j).
double bipartite_max_flow(std::span<const double> a, std::span<const double> b,
                          const std::vector<std::vector<std::size_t>>& allowed);

/// Prokhorov distance between the measures with weights `a` and `b` whose
/// supports have pairwise ground distances `dist`.
///
/// The feasibility of a level eps is the Strassen coupling condition: a
/// subcoupling of mass >= 1 - eps on pairs with dist <= eps. The achievable
/// mass M(eps) is a step function with jumps only at entries of `dist`, so
/// the distance equals min(1, min_k max(D_k, 1 - M(D_k))) over the sorted
/// distinct entries D_k; the minimum is located by binary search on k with
/// one max-flow per probe.
double prokhorov_from_matrix(std::span<const double> a, std::span<const double> b, const Matrix& dist);

/// max c.y subject to A y <= rhs, y >= 0, with rhs >= 0 (the origin is
/// feasible). Dense tableau simplex with Bland's rule. Throws
/// InvalidInput when unbounded.
double simplex_maximize(const Matrix& A, std::span<const double> rhs, std::span<const double> c);

/// sup { sum_i h_i signed_mass_i : |h_i| <= 1, |h_i - h_j| <= dist(i, j) }
/// as an explicit linear program.
double bounded_lipschitz_lp(std::span<const double> signed_mass, const Matrix& dist);

}  // namespace exm
