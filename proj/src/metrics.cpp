#include "exmerge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>

#include "exmerge/error.hpp"

namespace exm {

namespace {

void require_real_line(const DiscreteMeasure& mu, const char* what) {
  if (!mu.space().is_real_line()) throw InvalidInput(std::string(what) + " needs measures on the real line");
}

void require_within(std::size_t size, std::size_t limit, const char* what) {
  if (size > limit) {
    throw ResourceLimit(std::string(what) + ": support size " + std::to_string(size) + " exceeds budget " +
                        std::to_string(limit));
  }
}

// Round-robin over scales 0, 1, 2, ...: round t visits scales 0..t and takes
// the next unused center of each. `centers_at(s)` is the number of centers at
// scale s.
template <class CentersAt, class Emit>
void interleave_scales(std::size_t wanted, CentersAt centers_at, Emit emit) {
  std::vector<std::size_t> used;
  std::size_t produced = 0;
  for (std::size_t round = 0; produced < wanted; ++round) {
    used.push_back(0);
    for (std::size_t s = 0; s <= round && produced < wanted; ++s) {
      if (used[s] < centers_at(s)) {
        emit(s, used[s]++);
        ++produced;
      }
    }
  }
}

double hat(double dist, double radius) { return std::clamp(1.0 - dist / radius, 0.0, 1.0); }

double weight_of(std::size_t k) { return std::ldexp(1.0, -static_cast<int>(k + 1)); }

}  // namespace

Matrix ground_distances(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu.space(), nu.space(), "ground_distances");
  Matrix d(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) d(i, j) = mu.space().distance(mu.atom(i), nu.atom(j));
  return d;
}

double w1_real(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_real_line(mu, "w1_real");
  require_real_line(nu, "w1_real");
  // Both atom lists are sorted; sweep the merged grid.
  std::size_t i = 0;
  std::size_t j = 0;
  double F = 0.0;
  double G = 0.0;
  double total = 0.0;
  double x_prev = 0.0;
  bool started = false;
  while (i < mu.size() || j < nu.size()) {
    const double xi = i < mu.size() ? mu.atom(i)[0] : INFINITY;
    const double xj = j < nu.size() ? nu.atom(j)[0] : INFINITY;
    const double x = std::min(xi, xj);
    if (started) total += (x - x_prev) * std::abs(F - G);
    if (xi == x) F += mu.weight(i++);
    if (xj == x) G += nu.weight(j++);
    x_prev = x;
    started = true;
  }
  return total;
}

double ot_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, const SolverBudget& budget) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("ot_cost needs a finite order p >= 1");
  require_same_space(mu.space(), nu.space(), "ot_cost");
  require_within(mu.size(), budget.transport_side, "ot_cost");
  require_within(nu.size(), budget.transport_side, "ot_cost");
  Matrix c = ground_distances(mu, nu);
  if (p != 1.0) {
    for (std::size_t i = 0; i < c.rows(); ++i)
      for (std::size_t j = 0; j < c.cols(); ++j) c(i, j) = std::pow(c(i, j), p);
  }
  const auto sol = solve_transport(mu.weights(), nu.weights(), c);
  return p == 1.0 ? sol.cost : std::pow(sol.cost, 1.0 / p);
}

double prokhorov(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SolverBudget& budget) {
  require_same_space(mu.space(), nu.space(), "prokhorov");
  require_within(mu.size(), budget.flow_side, "prokhorov");
  require_within(nu.size(), budget.flow_side, "prokhorov");
  return prokhorov_from_matrix(mu.weights(), nu.weights(), ground_distances(mu, nu));
}

double prokhorov_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SolverBudget& budget) {
  require_same_space(mu.space(), nu.space(), "prokhorov_bruteforce");
  require_within(mu.size(), budget.bruteforce_atoms, "prokhorov_bruteforce");
  require_within(nu.size(), budget.bruteforce_atoms, "prokhorov_bruteforce");
  const Matrix d = ground_distances(mu, nu);

  std::vector<double> levels;
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      if (d(i, j) < 1.0) levels.push_back(d(i, j));
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  // excess[k] = max over B within the first support of first(B) - second(B^eps_k).
  auto excess = [&](const std::vector<double>& first, const std::vector<double>& second, bool transposed) {
    const std::size_t a = first.size();
    const std::size_t b = second.size();
    std::vector<double> out(levels.size(), 0.0);
    std::vector<double> reach(b);
    for (std::uint32_t mask = 1; mask < (1u << a); ++mask) {
      double mass = 0.0;
      std::fill(reach.begin(), reach.end(), INFINITY);
      for (std::size_t i = 0; i < a; ++i) {
        if (!(mask & (1u << i))) continue;
        mass += first[i];
        for (std::size_t j = 0; j < b; ++j) reach[j] = std::min(reach[j], transposed ? d(j, i) : d(i, j));
      }
      for (std::size_t k = 0; k < levels.size(); ++k) {
        double covered = 0.0;
        for (std::size_t j = 0; j < b; ++j)
          if (reach[j] <= levels[k]) covered += second[j];
        out[k] = std::max(out[k], mass - covered);
      }
    }
    return out;
  };
  const auto forward = excess(mu.weights(), nu.weights(), false);
  const auto backward = excess(nu.weights(), mu.weights(), true);

  double best = 1.0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const double g = std::max({0.0, forward[k], backward[k]});
    best = std::min(best, std::max(levels[k], g));
  }
  return best;
}

double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SolverBudget& budget) {
  require_same_space(mu.space(), nu.space(), "fortet_mourier");
  std::vector<Point> pts;
  std::vector<double> signed_mass;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < mu.size() || j < nu.size()) {
    if (j == nu.size() || (i < mu.size() && mu.atom(i) < nu.atom(j))) {
      pts.push_back(mu.atom(i));
      signed_mass.push_back(mu.weight(i++));
    } else if (i == mu.size() || nu.atom(j) < mu.atom(i)) {
      pts.push_back(nu.atom(j));
      signed_mass.push_back(-nu.weight(j++));
    } else {
      pts.push_back(mu.atom(i));
      signed_mass.push_back(mu.weight(i++) - nu.weight(j++));
    }
  }
  require_within(pts.size(), budget.lp_atoms, "fortet_mourier");
  Matrix d(pts.size(), pts.size());
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = 0; b < pts.size(); ++b) d(a, b) = mu.space().distance(pts[a], pts[b]);
  return bounded_lipschitz_lp(signed_mass, d);
}

// ---------------------------------------------------------------------------
// DeterminingClass

DeterminingClass::DeterminingClass(GroundSpace space, std::vector<HatFunction> generators)
    : space_(std::move(space)), generators_(std::move(generators)) {
  if (generators_.empty()) throw InvalidInput("determining class needs truncation >= 1");
  bl_norms_.reserve(generators_.size());
  for (const auto& g : generators_) {
    if (!(g.radius > 0.0)) throw InvalidInput("hat radius must be positive");
    bl_norms_.push_back(1.0 + 1.0 / g.radius);
  }
  if (space_.is_finite()) {
    const std::size_t L = space_.label_count();
    label_table_.resize(generators_.size() * L);
    for (std::size_t k = 0; k < generators_.size(); ++k)
      for (std::size_t l = 0; l < L; ++l) label_table_[k * L + l] = normalized(k, space_.label_point(l));
  }
}

DeterminingClass DeterminingClass::dyadic(const GroundSpace& space, std::vector<double> lo,
                                          std::vector<double> hi, std::size_t truncation) {
  if (space.is_finite()) throw InvalidInput("dyadic class needs a real or euclidean space");
  const std::size_t dim = space.coords();
  if (lo.size() != dim || hi.size() != dim) throw InvalidInput("bounding box dimension mismatch");
  for (std::size_t c = 0; c < dim; ++c)
    if (!(hi[c] >= lo[c]) || !std::isfinite(lo[c]) || !std::isfinite(hi[c]))
      throw InvalidInput("bounding box must satisfy lo <= hi");

  // Centers at scale s: the grid lo + i * 2^-s in each coordinate, ordered by
  // distance to the box midpoint (ties lexicographic).
  std::vector<std::vector<Point>> scales;
  auto centers = [&](std::size_t s) -> const std::vector<Point>& {
    while (scales.size() <= s) {
      const double r = std::ldexp(1.0, -static_cast<int>(scales.size()));
      std::vector<std::size_t> counts(dim);
      std::size_t total = 1;
      for (std::size_t c = 0; c < dim; ++c) {
        counts[c] = static_cast<std::size_t>(std::floor((hi[c] - lo[c]) / r + 1e-9)) + 1;
        total = std::min<std::size_t>(total * counts[c], std::size_t{1} << 22);
      }
      std::vector<Point> pts;
      if (total >= (std::size_t{1} << 22)) throw ResourceLimit("dyadic net too large for this truncation");
      pts.reserve(total);
      std::vector<std::size_t> idx(dim, 0);
      for (std::size_t t = 0; t < total; ++t) {
        Point p(dim);
        for (std::size_t c = 0; c < dim; ++c) p[c] = lo[c] + static_cast<double>(idx[c]) * r;
        pts.push_back(std::move(p));
        for (std::size_t c = dim; c-- > 0;) {
          if (++idx[c] < counts[c]) break;
          idx[c] = 0;
        }
      }
      Point mid(dim);
      for (std::size_t c = 0; c < dim; ++c) mid[c] = 0.5 * (lo[c] + hi[c]);
      std::stable_sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
        return space.distance(a, mid) < space.distance(b, mid);
      });
      scales.push_back(std::move(pts));
    }
    return scales[s];
  };

  std::vector<HatFunction> gens;
  interleave_scales(
      truncation, [&](std::size_t s) { return centers(s).size(); },
      [&](std::size_t s, std::size_t i) {
        gens.push_back({centers(s)[i], std::ldexp(1.0, -static_cast<int>(s))});
      });
  return DeterminingClass(space, std::move(gens));
}

DeterminingClass DeterminingClass::on_labels(const GroundSpace& space, std::size_t truncation) {
  if (!space.is_finite()) throw InvalidInput("on_labels class needs a finite space");
  const std::size_t L = space.label_count();
  std::vector<HatFunction> gens;
  interleave_scales(
      truncation, [&](std::size_t) { return L; },
      [&](std::size_t s, std::size_t i) {
        gens.push_back({space.label_point(i), std::ldexp(1.0, -static_cast<int>(s))});
      });
  return DeterminingClass(space, std::move(gens));
}

DeterminingClass DeterminingClass::covering(const std::vector<DiscreteMeasure>& measures,
                                            std::size_t truncation) {
  if (measures.empty()) throw InvalidInput("covering class needs at least one measure");
  const GroundSpace& space = measures.front().space();
  if (space.is_finite()) return on_labels(space, truncation);
  const std::size_t dim = space.coords();
  std::vector<double> lo(dim, INFINITY);
  std::vector<double> hi(dim, -INFINITY);
  for (const auto& mu : measures) {
    require_same_space(space, mu.space(), "DeterminingClass::covering");
    for (const auto& a : mu.atoms())
      for (std::size_t c = 0; c < dim; ++c) {
        lo[c] = std::min(lo[c], a[c]);
        hi[c] = std::max(hi[c], a[c]);
      }
  }
  for (std::size_t c = 0; c < dim; ++c) {
    lo[c] = std::floor(lo[c]) - 1.0;
    hi[c] = std::ceil(hi[c]) + 1.0;
  }
  return dyadic(space, std::move(lo), std::move(hi), truncation);
}

double DeterminingClass::value(std::size_t k, const Point& x) const {
  const auto& g = generators_[k];
  return hat(space_.distance(x, g.center), g.radius);
}

double DeterminingClass::normalized(std::size_t k, const Point& x) const { return value(k, x) / bl_norms_[k]; }

std::vector<double> DeterminingClass::embed(const DiscreteMeasure& mu) const {
  require_same_space(space_, mu.space(), "DeterminingClass::embed");
  const std::size_t K = generators_.size();
  std::vector<double> out(K, 0.0);
  if (!label_table_.empty()) {
    const std::size_t L = space_.label_count();
    for (std::size_t k = 0; k < K; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i)
        s += mu.weight(i) * label_table_[k * L + static_cast<std::size_t>(mu.atom(i)[0])];
      out[k] = s;
    }
    return out;
  }
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * normalized(k, mu.atom(i));
    out[k] = s;
  }
  return out;
}

double DeterminingClass::tail_bound() const { return 2.0 * std::ldexp(1.0, -static_cast<int>(truncation())); }

DeterminingClass DeterminingClass::truncated(std::size_t k) const {
  if (k < 1 || k > generators_.size()) throw InvalidInput("truncation out of range");
  return DeterminingClass(space_, {generators_.begin(), generators_.begin() + static_cast<long>(k)});
}

std::string DeterminingClass::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "hat-class K=" << generators_.size() << " space=" << space_.describe() << " generators=";
  for (std::size_t k = 0; k < generators_.size(); ++k) {
    os << (k ? ";" : "") << space_.format_point(generators_[k].center) << "@" << generators_[k].radius;
  }
  return os.str();
}

double series_weight(std::size_t k) { return weight_of(k); }

double embedding_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("embedding sizes differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += weight_of(k) * std::abs(a[k] - b[k]);
  return s;
}

SeriesValue dW(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DeterminingClass& cls) {
  require_same_space(mu.space(), nu.space(), "dW");
  return {embedding_distance(cls.embed(mu), cls.embed(nu)), cls.tail_bound()};
}

SeriesValue dW_product(const TupleMeasure& pm, const TupleMeasure& qm, const DeterminingClass& cls,
                       std::size_t m) {
  if (pm.m() != m || qm.m() != m) throw InvalidInput("dW_product: tuple length does not match m");
  require_same_space(pm.space(), qm.space(), "dW_product");
  require_same_space(pm.space(), cls.space(), "dW_product");
  const std::size_t K = cls.truncation();

  // Per class: table[c][i][k] = g*_k(x_i), plus all coordinate orderings.
  struct Prepared {
    std::vector<double> weights;
    std::vector<std::vector<double>> table;  // class -> i*K + k
  };
  auto prepare = [&](const TupleMeasure& tm) {
    Prepared p;
    p.weights = tm.weights();
    for (const auto& cl : tm.support()) {
      std::vector<double> t(m * K);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < K; ++k) t[i * K + k] = cls.normalized(k, cl.points()[i]);
      p.table.push_back(std::move(t));
    }
    return p;
  };
  const Prepared P = prepare(pm);
  const Prepared Q = prepare(qm);

  std::vector<std::vector<std::size_t>> perms;
  {
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  }
  const double inv_perms = 1.0 / static_cast<double>(perms.size());

  auto integral = [&](const Prepared& p, std::span<const std::size_t> ks) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.table.size(); ++c) {
      const auto& t = p.table[c];
      double sym = 0.0;
      for (const auto& perm : perms) {
        double prod = 1.0;
        for (std::size_t i = 0; i < m; ++i) prod *= t[perm[i] * K + ks[i]];
        sym += prod;
      }
      s += p.weights[c] * (sym * inv_perms);
    }
    return s;
  };

  double value = 0.0;
  for_each_tuple(K, m, std::numeric_limits<std::size_t>::max(), [&](std::span<const std::size_t> ks) {
    int exponent = 0;
    for (std::size_t k : ks) exponent += static_cast<int>(k + 1);
    value += std::ldexp(1.0, -exponent) * std::abs(integral(P, ks) - integral(Q, ks));
  });
  const double inner = 1.0 - std::ldexp(1.0, -static_cast<int>(K));
  return {value, 2.0 * (1.0 - std::pow(inner, static_cast<double>(m)))};
}

double quotient_dist(const TupleClass& a, const TupleClass& b, QuotientMetric which, const SolverBudget& budget) {
  if (a.m() != b.m()) throw InvalidInput("quotient_dist: tuple classes of different length");
  require_same_space(a.space(), b.space(), "quotient_dist");
  const auto mu = a.as_measure();
  const auto nu = b.as_measure();
  if (which == QuotientMetric::G1) return mu.space().is_real_line() ? w1_real(mu, nu) : ot_cost(mu, nu, 1.0, budget);
  return prokhorov(mu, nu, budget);
}

double tuple_transport(const TupleMeasure& pm, const TupleMeasure& qm, const SolverBudget& budget) {
  if (pm.m() != qm.m()) throw InvalidInput("tuple_transport: measures on different tuple lengths");
  require_within(pm.size(), budget.transport_side, "tuple_transport");
  require_within(qm.size(), budget.transport_side, "tuple_transport");
  Matrix c(pm.size(), qm.size());
  for (std::size_t i = 0; i < pm.size(); ++i)
    for (std::size_t j = 0; j < qm.size(); ++j)
      c(i, j) = quotient_dist(pm.support()[i], qm.support()[j], QuotientMetric::G1, budget);
  return solve_transport(pm.weights(), qm.weights(), c).cost;
}

// ---------------------------------------------------------------------------
// Level two

AnchorClass::AnchorClass(std::vector<DiscreteMeasure> anchors, std::size_t truncation)
    : anchors_(std::move(anchors)) {
  if (anchors_.empty()) throw InvalidInput("anchor class needs at least one anchor");
  if (truncation < 1) throw InvalidInput("anchor class needs truncation >= 1");
  for (const auto& a : anchors_) require_same_space(anchors_.front().space(), a.space(), "AnchorClass");
  interleave_scales(
      truncation, [&](std::size_t) { return anchors_.size(); },
      [&](std::size_t s, std::size_t i) {
        anchor_of_.push_back(i);
        radius_.push_back(std::ldexp(1.0, -static_cast<int>(s)));
      });
}

double AnchorClass::normalized(std::size_t k, double dist_to_anchor) const {
  return hat(dist_to_anchor, radius_[k]) / bl_norm(k);
}

double AnchorClass::tail_bound() const { return 2.0 * std::ldexp(1.0, -static_cast<int>(truncation())); }

double base_distance(const DiscreteMeasure& p, const DiscreteMeasure& q, const Level2Options& opts) {
  switch (opts.base) {
    case BaseMetric::G1:
      return p.space().is_real_line() && q.space().is_real_line() ? w1_real(p, q) : ot_cost(p, q, 1.0, opts.budget);
    case BaseMetric::P:
      return prokhorov(p, q, opts.budget);
    case BaseMetric::W:
      if (opts.ground_class == nullptr) throw InvalidInput("base metric W needs a determining class");
      return dW(p, q, *opts.ground_class).value;
  }
  return 0.0;
}

double level2_dist(const MeasureOnMeasures& nu, const MeasureOnMeasures& target, Level2Metric which,
                   const Level2Options& opts) {
  require_same_space(nu.base_space(), target.base_space(), "level2_dist");
  if (which == Level2Metric::W) {
    if (opts.anchor_class == nullptr) throw InvalidInput("level-2 W needs an anchor class");
    const AnchorClass& ac = *opts.anchor_class;
    std::vector<std::vector<double>> anchor_emb;
    if (opts.base == BaseMetric::W) {
      if (opts.ground_class == nullptr) throw InvalidInput("base metric W needs a determining class");
      for (const auto& a : ac.anchors()) anchor_emb.push_back(opts.ground_class->embed(a));
    }
    // dist[a][i]: base distance from support_i to anchor a.
    auto distances = [&](const MeasureOnMeasures& mm) {
      std::vector<std::vector<double>> d(ac.anchors().size(), std::vector<double>(mm.size()));
      for (std::size_t i = 0; i < mm.size(); ++i) {
        if (opts.base == BaseMetric::W) {
          const auto e = opts.ground_class->embed(mm.support()[i]);
          for (std::size_t a = 0; a < anchor_emb.size(); ++a) d[a][i] = embedding_distance(e, anchor_emb[a]);
        } else {
          for (std::size_t a = 0; a < ac.anchors().size(); ++a)
            d[a][i] = base_distance(mm.support()[i], ac.anchors()[a], opts);
        }
      }
      return d;
    };
    const auto dn = distances(nu);
    const auto dt = distances(target);
    double value = 0.0;
    for (std::size_t k = 0; k < ac.truncation(); ++k) {
      const std::size_t a = ac.anchor_of(k);
      double en = 0.0;
      for (std::size_t i = 0; i < nu.size(); ++i) en += nu.weights()[i] * ac.normalized(k, dn[a][i]);
      double et = 0.0;
      for (std::size_t i = 0; i < target.size(); ++i) et += target.weights()[i] * ac.normalized(k, dt[a][i]);
      value += weight_of(k) * std::abs(en - et);
    }
    return value;
  }

  const std::size_t limit = which == Level2Metric::G1 ? opts.budget.transport_side : opts.budget.flow_side;
  require_within(nu.size(), limit, "level2_dist");
  require_within(target.size(), limit, "level2_dist");
  Matrix d(nu.size(), target.size());
  for (std::size_t i = 0; i < nu.size(); ++i)
    for (std::size_t j = 0; j < target.size(); ++j) d(i, j) = base_distance(nu.support()[i], target.support()[j], opts);
  if (which == Level2Metric::G1) return solve_transport(nu.weights(), target.weights(), d).cost;
  return prokhorov_from_matrix(nu.weights(), target.weights(), d);
}

double prokhorov_to_dirac(std::span<const double> weights, std::span<const double> distances) {
  if (weights.size() != distances.size() || weights.empty()) {
    throw InvalidInput("prokhorov_to_dirac: weights and distances differ in length");
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  // tail = mass with distance strictly above the current level.
  double tail = 0.0;
  for (std::size_t i : order)
    if (distances[i] > 0.0) tail += weights[i];
  double best = std::min(1.0, std::max(0.0, tail));
  std::size_t pos = 0;
  while (pos < order.size() && distances[order[pos]] <= 0.0) ++pos;
  while (pos < order.size()) {
    const double level = distances[order[pos]];
    if (level >= best) break;
    while (pos < order.size() && distances[order[pos]] == level) tail -= weights[order[pos++]];
    best = std::min(best, std::max(level, std::max(0.0, tail)));
  }
  return best;
}

double prokhorov_to_dirac(const MeasureOnMeasures& nu, const DiscreteMeasure& e, const Level2Options& opts) {
  require_same_space(nu.base_space(), e.space(), "prokhorov_to_dirac");
  std::vector<double> d(nu.size());
  for (std::size_t i = 0; i < nu.size(); ++i) d[i] = base_distance(nu.support()[i], e, opts);
  return prokhorov_to_dirac(nu.weights(), d);
}

}  // namespace exm
