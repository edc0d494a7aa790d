#include "exmerge/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "exmerge/metrics.hpp"

namespace exm {

DiscreteMeasure random_measure(const GroundSpace& space, std::size_t max_atoms, Engine& eng) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::exponential_distribution<double> mass(1.0);
  const std::size_t k = count(eng);
  std::vector<Point> atoms;
  std::vector<double> w;
  const bool grid = std::uniform_int_distribution<int>(0, 1)(eng) == 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (space.is_finite()) {
      atoms.push_back(space.label_point(std::uniform_int_distribution<std::size_t>(0, space.label_count() - 1)(eng)));
    } else {
      Point x(space.coords());
      for (double& c : x)
        c = grid ? 0.5 * static_cast<double>(std::uniform_int_distribution<int>(-6, 6)(eng))
                 : std::uniform_real_distribution<double>(-3.0, 3.0)(eng);
      atoms.push_back(std::move(x));
    }
    w.push_back(mass(eng) + 1e-3);
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return DiscreteMeasure(space, std::move(atoms), std::move(w));
}

GroundSpace random_finite_space(std::size_t labels, Engine& eng) {
  std::uniform_real_distribution<double> coord(0.0, 2.0);
  std::vector<std::pair<double, double>> pts(labels);
  for (auto& p : pts) p = {coord(eng), coord(eng)};
  std::vector<double> d(labels * labels, 0.0);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < labels; ++i) {
    names.push_back("s" + std::to_string(i));
    for (std::size_t j = 0; j < labels; ++j) {
      if (i == j) continue;
      // Points may nearly coincide; keep labels at positive distance.
      d[i * labels + j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second) + 0.05;
    }
  }
  return GroundSpace::finite(std::move(names), std::move(d));
}

namespace {

GroundSpace random_space(Engine& eng) {
  if (std::uniform_int_distribution<int>(0, 1)(eng) == 0) return GroundSpace::real_line();
  return random_finite_space(std::uniform_int_distribution<std::size_t>(2, 6)(eng), eng);
}

DeterminingClass class_for(const GroundSpace& space) {
  if (space.is_finite()) return DeterminingClass::on_labels(space, 24);
  return DeterminingClass::dyadic(space, {-4.0}, {4.0}, 24);
}

}  // namespace

std::vector<OracleItem> run_oracle_checks(std::uint64_t seed, const OracleCounts& counts) {
  Engine eng = make_engine(seed, StreamPurpose::Oracle);
  std::vector<OracleItem> out;

  OracleItem pro{"prokhorov: max-flow vs subset enumeration", 0, 0.0, 1e-9};
  for (std::size_t i = 0; i < counts.equivalence_pairs; ++i) {
    const auto space = random_space(eng);
    const auto mu = random_measure(space, counts.max_atoms, eng);
    const auto nu = random_measure(space, counts.max_atoms, eng);
    pro.worst = std::max(pro.worst, std::abs(prokhorov(mu, nu) - prokhorov_bruteforce(mu, nu)));
    ++pro.cases;
  }
  out.push_back(pro);

  OracleItem w1{"first-order cost: CDF integral vs transport solver", 0, 0.0, 1e-9};
  const auto line = GroundSpace::real_line();
  for (std::size_t i = 0; i < counts.equivalence_pairs; ++i) {
    const auto mu = random_measure(line, counts.max_atoms, eng);
    const auto nu = random_measure(line, counts.max_atoms, eng);
    w1.worst = std::max(w1.worst, std::abs(w1_real(mu, nu) - ot_cost(mu, nu, 1.0)));
    ++w1.cases;
  }
  out.push_back(w1);

  struct Named {
    const char* name;
    double (*f)(const DiscreteMeasure&, const DiscreteMeasure&, const DeterminingClass&);
  };
  const Named metrics[] = {
      {"P", [](const DiscreteMeasure& a, const DiscreteMeasure& b, const DeterminingClass&) { return prokhorov(a, b); }},
      {"G1", [](const DiscreteMeasure& a, const DiscreteMeasure& b, const DeterminingClass&) { return ot_cost(a, b, 1.0); }},
      {"G2", [](const DiscreteMeasure& a, const DiscreteMeasure& b, const DeterminingClass&) { return ot_cost(a, b, 2.0); }},
      {"FM", [](const DiscreteMeasure& a, const DiscreteMeasure& b, const DeterminingClass&) { return fortet_mourier(a, b); }},
      {"W", [](const DiscreteMeasure& a, const DiscreteMeasure& b, const DeterminingClass& c) { return dW(a, b, c).value; }},
  };
  for (const auto& m : metrics) {
    OracleItem ax{std::string("metric axioms: ") + m.name, 0, 0.0, 1e-9};
    for (std::size_t i = 0; i < counts.axiom_triples; ++i) {
      const auto space = random_space(eng);
      const auto cls = class_for(space);
      const auto a = random_measure(space, counts.max_atoms, eng);
      const auto b = random_measure(space, counts.max_atoms, eng);
      const auto c = random_measure(space, counts.max_atoms, eng);
      const double ab = m.f(a, b, cls), ba = m.f(b, a, cls), bc = m.f(b, c, cls), ac = m.f(a, c, cls);
      const double aa = m.f(a, a, cls);
      ax.worst = std::max({ax.worst, -ab, std::abs(ab - ba), ac - ab - bc, std::abs(aa)});
      ++ax.cases;
    }
    out.push_back(ax);
  }

  OracleItem chain{"P <= sqrt(1.5 FM) and FM <= G1", 0, 0.0, 1e-9};
  for (std::size_t i = 0; i < counts.chain_pairs; ++i) {
    const auto space = random_space(eng);
    const auto mu = random_measure(space, counts.max_atoms, eng);
    const auto nu = random_measure(space, counts.max_atoms, eng);
    const double p = prokhorov(mu, nu), fm = fortet_mourier(mu, nu), g1 = ot_cost(mu, nu, 1.0);
    chain.worst = std::max({chain.worst, p - std::sqrt(1.5 * fm), fm - g1});
    ++chain.cases;
  }
  out.push_back(chain);
  return out;
}

}  // namespace exm
