#include "exmerge/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "exmerge/error.hpp"

namespace exm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEps = 1e-14;

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Matrix& cost) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (n == 0 || m == 0 || cost.rows() != n || cost.cols() != m) {
    throw InvalidInput("transport: cost matrix shape does not match marginals");
  }
  const double sa = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double sb = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(sa - 1.0) > 1e-9 || std::abs(sb - 1.0) > 1e-9) {
    throw InvalidInput("transport: marginals must each sum to 1");
  }

  std::vector<double> rs(supply.begin(), supply.end());
  std::vector<double> rd(demand.begin(), demand.end());
  Matrix flow(n, m, 0.0);
  std::vector<double> pr(n, 0.0);
  std::vector<double> pc(m, kInf);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) pc[j] = std::min(pc[j], cost(i, j));

  // Node numbering: rows 0..n-1, columns n..n+m-1.
  const std::size_t total = n + m;
  std::vector<double> dist(total);
  std::vector<std::size_t> prev(total);
  std::vector<char> done(total);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  auto remaining = [](const std::vector<double>& v) {
    return std::any_of(v.begin(), v.end(), [](double x) { return x > kMassEps; });
  };

  while (remaining(rs) && remaining(rd)) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (rs[i] > kMassEps) dist[i] = 0.0;

    std::size_t target = kNone;
    for (;;) {
      std::size_t u = kNone;
      double best = kInf;
      for (std::size_t v = 0; v < total; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == kNone) break;
      done[u] = 1;
      if (u < n) {
        for (std::size_t j = 0; j < m; ++j) {
          const double rc = std::max(0.0, cost(u, j) + pr[u] - pc[j]);
          if (dist[u] + rc < dist[n + j]) {
            dist[n + j] = dist[u] + rc;
            prev[n + j] = u;
          }
        }
      } else {
        const std::size_t j = u - n;
        if (rd[j] > kMassEps) {
          target = u;
          break;
        }
        for (std::size_t i = 0; i < n; ++i) {
          if (flow(i, j) <= kMassEps) continue;
          const double rc = std::max(0.0, -cost(i, j) + pc[j] - pr[i]);
          if (dist[u] + rc < dist[i]) {
            dist[i] = dist[u] + rc;
            prev[i] = u;
          }
        }
      }
    }
    if (target == kNone) break;

    const double dt = dist[target];
    for (std::size_t i = 0; i < n; ++i) pr[i] += std::min(dist[i], dt);
    for (std::size_t j = 0; j < m; ++j) pc[j] += std::min(dist[n + j], dt);

    // Bottleneck along the path.
    double push = rd[target - n];
    std::size_t v = target;
    while (prev[v] != kNone) {
      const std::size_t u = prev[v];
      if (u >= n) push = std::min(push, flow(v, u - n));  // reverse arc col u -> row v
      v = u;
    }
    push = std::min(push, rs[v]);

    v = target;
    while (prev[v] != kNone) {
      const std::size_t u = prev[v];
      if (u < n) {
        flow(u, v - n) += push;
      } else {
        double& f = flow(v, u - n);
        f -= push;
        if (f < kMassEps) f = 0.0;
      }
      v = u;
    }
    rs[v] -= push;
    if (rs[v] < kMassEps) rs[v] = 0.0;
    rd[target - n] -= push;
    if (rd[target - n] < kMassEps) rd[target - n] = 0.0;
  }

  TransportSolution sol;
  sol.plan = std::move(flow);
  double primal = 0.0;
  double violation = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      primal += sol.plan(i, j) * cost(i, j);
      violation = std::max(violation, pc[j] - pr[i] - cost(i, j));
    }
  }
  double dual = 0.0;
  for (std::size_t j = 0; j < m; ++j) dual += demand[j] * pc[j];
  for (std::size_t i = 0; i < n; ++i) dual -= supply[i] * pr[i];
  sol.cost = std::max(0.0, primal);
  sol.dual_objective = dual;
  sol.max_dual_violation = violation;
  sol.row_potential = std::move(pr);
  sol.col_potential = std::move(pc);
  return sol;
}

// ---------------------------------------------------------------------------
// Max flow (Dinic with real capacities)

namespace {

class Dinic {
 public:
  explicit Dinic(std::size_t nodes) : adj_(nodes), level_(nodes), it_(nodes) {}

  void add_edge(std::size_t u, std::size_t v, double cap) {
    adj_[u].push_back({v, adj_[v].size(), cap});
    adj_[v].push_back({u, adj_[u].size() - 1, 0.0});
  }

  double run(std::size_t s, std::size_t t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (true) {
        const double f = dfs(s, t, kInf);
        if (f <= kMassEps) break;
        total += f;
      }
    }
    return total;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t rev;
    double cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (const Edge& e : adj_[u]) {
        if (e.cap > kMassEps && level_[e.to] < 0) {
          level_[e.to] = level_[u] + 1;
          q.push(e.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t u, std::size_t t, double f) {
    if (u == t) return f;
    for (std::size_t& i = it_[u]; i < adj_[u].size(); ++i) {
      Edge& e = adj_[u][i];
      if (e.cap <= kMassEps || level_[e.to] != level_[u] + 1) continue;
      const double got = dfs(e.to, t, std::min(f, e.cap));
      if (got > kMassEps) {
        e.cap -= got;
        adj_[e.to][e.rev].cap += got;
        return got;
      }
    }
    return 0.0;
  }

  std::vector<std::vector<Edge>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace

double bipartite_max_flow(std::span<const double> a, std::span<const double> b,
                          const std::vector<std::vector<std::size_t>>& allowed) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (allowed.size() != n) throw InvalidInput("max flow: adjacency size mismatch");
  Dinic g(n + m + 2);
  const std::size_t s = n + m;
  const std::size_t t = n + m + 1;
  for (std::size_t i = 0; i < n; ++i) g.add_edge(s, i, a[i]);
  for (std::size_t j = 0; j < m; ++j) g.add_edge(n + j, t, b[j]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : allowed[i]) g.add_edge(i, n + j, kInf);
  return g.run(s, t);
}

double prokhorov_from_matrix(std::span<const double> a, std::span<const double> b, const Matrix& dist) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0 || dist.rows() != n || dist.cols() != m) {
    throw InvalidInput("prokhorov: distance matrix shape does not match weights");
  }
  std::vector<double> levels;
  levels.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (dist(i, j) < 1.0) levels.push_back(dist(i, j));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty()) return 1.0;

  auto unmatched = [&](std::size_t k) {
    std::vector<std::vector<std::size_t>> allowed(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (dist(i, j) <= levels[k]) allowed[i].push_back(j);
    return std::max(0.0, 1.0 - bipartite_max_flow(a, b, allowed));
  };

  // First k with levels[k] >= 1 - M(levels[k]); the predicate is monotone.
  std::size_t lo = 0;
  std::size_t hi = levels.size();
  std::vector<double> cache(levels.size(), -1.0);
  auto gap = [&](std::size_t k) {
    if (cache[k] < 0.0) cache[k] = unmatched(k);
    return cache[k];
  };
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (levels[mid] >= gap(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  double best = 1.0;
  if (lo < levels.size()) best = std::min(best, levels[lo]);
  if (lo > 0) best = std::min(best, gap(lo - 1));
  return best;
}

// ---------------------------------------------------------------------------
// Simplex

double simplex_maximize(const Matrix& A, std::span<const double> rhs, std::span<const double> c) {
  const std::size_t rows = A.rows();
  const std::size_t vars = A.cols();
  if (rhs.size() != rows || c.size() != vars) throw InvalidInput("simplex: shape mismatch");
  for (double r : rhs)
    if (r < 0.0) throw InvalidInput("simplex: right-hand side must be nonnegative");
  constexpr double kTol = 1e-12;

  // Tableau columns: vars, slacks, rhs. Objective row stored separately as
  // reduced costs z_j - c_j (we pivot while some entry is negative).
  const std::size_t width = vars + rows + 1;
  Matrix t(rows, width, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < vars; ++j) t(i, j) = A(i, j);
    t(i, vars + i) = 1.0;
    t(i, width - 1) = rhs[i];
  }
  std::vector<double> obj(width, 0.0);
  for (std::size_t j = 0; j < vars; ++j) obj[j] = -c[j];
  std::vector<std::size_t> basis(rows);
  std::iota(basis.begin(), basis.end(), vars);

  for (std::size_t iter = 0;; ++iter) {
    if (iter > 50 * (rows + vars) + 1000) throw ResourceLimit("simplex: iteration limit");
    // Bland: lowest-index entering column with negative reduced cost.
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j) {
      if (obj[j] < -kTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = rows;
    double best_ratio = kInf;
    for (std::size_t i = 0; i < rows; ++i) {
      if (t(i, enter) > kTol) {
        const double ratio = t(i, width - 1) / t(i, enter);
        if (ratio < best_ratio - kTol || (std::abs(ratio - best_ratio) <= kTol && leave < rows &&
                                          basis[i] < basis[leave])) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave == rows) throw InvalidInput("simplex: objective unbounded");

    const double piv = t(leave, enter);
    for (std::size_t j = 0; j < width; ++j) t(leave, j) /= piv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) t(i, j) -= f * t(leave, j);
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j < width; ++j) obj[j] -= f * t(leave, j);
    basis[leave] = enter;
  }
  return obj[width - 1];
}

double bounded_lipschitz_lp(std::span<const double> signed_mass, const Matrix& dist) {
  const std::size_t n = signed_mass.size();
  if (dist.rows() != n || dist.cols() != n) throw InvalidInput("bounded_lipschitz_lp: shape mismatch");
  // Shift y = h + 1 so that y >= 0 and the origin is feasible:
  //   y_i <= 2, y_i - y_j <= d_ij. Pairs with d_ij >= 2 are implied by the
  //   box and omitted.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && dist(i, j) < 2.0) pairs.emplace_back(i, j);
  Matrix A(n + pairs.size(), n, 0.0);
  std::vector<double> rhs(n + pairs.size());
  for (std::size_t i = 0; i < n; ++i) {
    A(i, i) = 1.0;
    rhs[i] = 2.0;
  }
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto [i, j] = pairs[r];
    A(n + r, i) = 1.0;
    A(n + r, j) = -1.0;
    rhs[n + r] = dist(i, j);
  }
  const double shifted = simplex_maximize(A, rhs, signed_mass);
  // sum_i (y_i - 1) s_i = shifted - sum_i s_i
  const double total = std::accumulate(signed_mass.begin(), signed_mass.end(), 0.0);
  return std::max(0.0, shifted - total);
}

}  // namespace exm
