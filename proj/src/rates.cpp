#include "exmerge/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "exmerge/error.hpp"

namespace exm {

std::string_view rate_name(RateKind kind) {
  switch (kind) {
    case RateKind::SqrtNOverLogLog: return "sqrt_n_over_loglog";
    case RateKind::NOverLogQuarter: return "n_over_log_quarter";
    case RateKind::NOverLogEighth: return "n_over_log_eighth";
  }
  return "unknown";
}

RateKind parse_rate_kind(std::string_view name) {
  if (name == "sqrt_n_over_loglog") return RateKind::SqrtNOverLogLog;
  if (name == "n_over_log_quarter") return RateKind::NOverLogQuarter;
  if (name == "n_over_log_eighth") return RateKind::NOverLogEighth;
  throw ConfigError("unknown rate schedule '" + std::string(name) + "'");
}

double rate_value(RateKind kind, double n) {
  if (!std::isfinite(n)) throw InvalidInput("rate needs finite n");
  switch (kind) {
    case RateKind::SqrtNOverLogLog: {
      if (!(n > std::exp(std::exp(1.0)))) throw InvalidInput("sqrt(n / loglog n) needs n > e^e");
      return std::sqrt(n / std::log(std::log(n)));
    }
    case RateKind::NOverLogQuarter:
      if (!(n > 1.0)) throw InvalidInput("(n / log n)^(1/4) needs n > 1");
      return std::pow(n / std::log(n), 0.25);
    case RateKind::NOverLogEighth:
      if (!(n > 1.0)) throw InvalidInput("(n / log n)^(1/8) needs n > 1");
      return std::pow(n / std::log(n), 0.125);
  }
  throw InvalidInput("unknown rate kind");
}

double rate(const RateSchedule& schedule, double n) {
  if (schedule.n_min < 16) throw ConfigError("rate schedule needs n_min >= 16");
  if (!(n >= static_cast<double>(schedule.n_min))) {
    std::ostringstream os;
    os << "n = " << n << " is below the schedule minimum " << schedule.n_min;
    throw InvalidInput(os.str());
  }
  return rate_value(schedule.kind, n);
}

double gini_bound(const DiscreteMeasure& mu) {
  if (!mu.space().is_real_line()) throw InvalidInput("gini_bound needs a measure on the real line");
  double total = 0.0;
  double F = 0.0;
  for (std::size_t i = 0; i + 1 < mu.size(); ++i) {
    F += mu.weight(i);
    const double G = std::clamp(F, 0.0, 1.0);
    total += (mu.atom(i + 1)[0] - mu.atom(i)[0]) * std::sqrt(2.0 * G * (1.0 - G));
  }
  return total;
}

BoundReport gini_bound(const std::function<double(double)>& F, double lo, double hi, double h) {
  if (!(hi > lo) || !(h > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidInput("gini_bound quadrature needs lo < hi and h > 0");
  const auto integrand = [&](double x) {
    const double v = std::clamp(F(x), 0.0, 1.0);
    return std::sqrt(2.0 * v * (1.0 - v));
  };
  const auto steps = static_cast<std::size_t>(std::ceil((hi - lo) / h));
  const double dx = (hi - lo) / static_cast<double>(steps);
  double sum = 0.5 * (integrand(lo) + integrand(hi));
  for (std::size_t i = 1; i < steps; ++i) sum += integrand(lo + dx * static_cast<double>(i));
  BoundReport rep;
  rep.constant_name = "gini";
  rep.value = sum * dx;
  rep.per_replicate = true;
  const double tail = std::max(integrand(lo), integrand(hi));
  rep.warning = tail > 1e-6;
  std::ostringstream os;
  os << "trapezoid h=" << dx;
  if (rep.warning) os << "; integrand " << tail << " at grid edge, tail may be truncated";
  rep.note = os.str();
  return rep;
}

double moment_bound(const DiscreteMeasure& mu, double eps) {
  if (!mu.space().is_real_line()) throw InvalidInput("moment_bound needs a measure on the real line");
  if (!(eps > 0.0)) throw InvalidInput("moment_bound needs eps > 0");
  const double s = mu.expectation([eps](const Point& x) {
    const double a = std::abs(x[0]);
    return a + std::pow(a, 2.0 + eps) / (2.0 + eps);
  });
  return std::sqrt(8.0 * s);
}

namespace {

double cell_term(double mass, double r) {
  const double v = mass * (1.0 - mass);
  return v > 0.0 ? std::pow(v, 1.0 / r) : 0.0;
}

}  // namespace

PiRReport pi_r(const DiscreteMeasure& p, double r, std::size_t max_level) {
  if (!(r > 2.0)) throw InvalidInput("pi_r needs r > 2");
  PiRReport rep;
  if (p.space().is_finite()) {
    for (double w : p.weights()) rep.value += cell_term(w, r);
    rep.schedule = {1};
    rep.sums = {rep.value};
    return rep;
  }
  if (max_level < 1) throw InvalidInput("pi_r needs max_level >= 1");
  const std::size_t d = p.space().coords();
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  for (std::size_t m = 1; m <= max_level; ++m) {
    const double bound = static_cast<double>(m);
    // Cube side so that the diameter side * sqrt(d) is at most 1/m.
    const double cells_per_unit = std::ceil(bound * sqrt_d);
    const double side = 1.0 / cells_per_unit;
    std::map<std::vector<long long>, double> cells;
    double outside = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const Point& x = p.atom(i);
      bool inside = true;
      std::vector<long long> key(d);
      for (std::size_t c = 0; c < d; ++c) {
        if (x[c] < -bound || x[c] >= bound) {
          inside = false;
          break;
        }
        key[c] = static_cast<long long>(std::floor((x[c] + bound) / side));
      }
      if (inside) {
        cells[key] += p.weight(i);
      } else {
        outside += p.weight(i);
      }
    }
    double sum = cell_term(outside, r);
    for (const auto& [key, mass] : cells) sum += cell_term(mass, r);
    rep.schedule.push_back(m);
    rep.sums.push_back(sum);
  }
  // Coarse early levels merge atoms and understate the sum, so the liminf is
  // taken over the trailing half of the schedule.
  rep.value = *std::min_element(rep.sums.begin() + static_cast<std::ptrdiff_t>(rep.sums.size() / 2), rep.sums.end());
  const auto n = rep.sums.size();
  rep.warning = n >= 2 && std::abs(rep.sums[n - 1] - rep.sums[n - 2]) > 1e-12;
  return rep;
}

BoundReport y_estimator(std::span<const std::size_t> ns, std::span<const double> distances, double window) {
  if (ns.size() != distances.size()) throw InvalidInput("y_estimator: n and distance lengths differ");
  if (ns.size() < 2) throw InvalidInput("y_estimator: trajectory too short");
  if (!(window > 0.0 && window < 1.0)) throw InvalidInput("y_estimator: window fraction must lie in (0, 1)");
  const double n_hi = static_cast<double>(ns.back());
  const double lo = window * n_hi;
  double best = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double n = static_cast<double>(ns[i]);
    if (n < lo || n < 2.0) continue;
    best = std::max(best, std::sqrt(n / std::log(n)) * distances[i]);
    ++used;
  }
  if (used < 2) throw InvalidInput("y_estimator: trajectory too short for the window");
  BoundReport rep;
  rep.constant_name = "Y";
  rep.value = std::sqrt(1.5 * best);
  rep.per_replicate = true;
  std::ostringstream os;
  os << "window [" << lo << ", " << n_hi << "], " << used << " points";
  rep.note = os.str();
  return rep;
}

}  // namespace exm
