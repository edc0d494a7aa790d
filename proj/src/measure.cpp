#include "exmerge/measure.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "exmerge/error.hpp"

namespace exm {

namespace {

constexpr double kInputMassTol = 1e-6;

void check_weights(std::span<const double> w) {
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw InvalidInput("weights must be finite and nonnegative");
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (std::abs(total - 1.0) > kInputMassTol) {
    throw InvalidInput("weights must sum to 1 (got " + std::to_string(total) + ")");
  }
}

// Sorts `items` by `less`, merges runs that compare equal (adding weights),
// drops zero weights and renormalizes.
template <class T, class Less, class Eq>
void canonicalize(std::vector<T>& items, std::vector<double>& weights, Less less, Eq eq) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return less(items[a], items[b]); });
  std::vector<T> out_items;
  std::vector<double> out_weights;
  out_items.reserve(items.size());
  out_weights.reserve(items.size());
  for (std::size_t idx : order) {
    if (!out_items.empty() && eq(out_items.back(), items[idx])) {
      out_weights.back() += weights[idx];
    } else {
      out_items.push_back(std::move(items[idx]));
      out_weights.push_back(weights[idx]);
    }
  }
  std::vector<T> kept_items;
  std::vector<double> kept_weights;
  kept_items.reserve(out_items.size());
  kept_weights.reserve(out_items.size());
  for (std::size_t i = 0; i < out_items.size(); ++i) {
    if (out_weights[i] > 0.0) {
      kept_items.push_back(std::move(out_items[i]));
      kept_weights.push_back(out_weights[i]);
    }
  }
  if (kept_items.empty()) throw InvalidInput("measure has no positive mass");
  const double total = std::accumulate(kept_weights.begin(), kept_weights.end(), 0.0);
  // Leave weights that already sum to 1 up to rounding untouched, so that
  // canonical form is a fixed point.
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(kept_weights.size());
  if (std::abs(total - 1.0) > slack) {
    for (double& w : kept_weights) w /= total;
  }
  items = std::move(kept_items);
  weights = std::move(kept_weights);
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(GroundSpace space, std::vector<Point> atoms, std::vector<double> weights)
    : space_(std::move(space)), atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.empty()) throw InvalidInput("measure needs at least one atom");
  if (atoms_.size() != weights_.size()) throw InvalidInput("atoms and weights differ in length");
  for (const auto& a : atoms_) space_.check(a);
  check_weights(weights_);
  canonicalize(
      atoms_, weights_, [](const Point& a, const Point& b) { return a < b; },
      [](const Point& a, const Point& b) { return a == b; });
}

DiscreteMeasure DiscreteMeasure::dirac(GroundSpace space, Point x) {
  return DiscreteMeasure(std::move(space), {std::move(x)}, {1.0});
}

DiscreteMeasure DiscreteMeasure::on_labels(GroundSpace space, std::span<const double> weights) {
  if (!space.is_finite()) throw InvalidInput("on_labels needs a finite space");
  if (weights.size() != space.label_count()) throw InvalidInput("one weight per label required");
  std::vector<Point> atoms;
  atoms.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) atoms.push_back(space.label_point(i));
  return DiscreteMeasure(std::move(space), std::move(atoms), {weights.begin(), weights.end()});
}

double DiscreteMeasure::expectation(const std::function<double(const Point&)>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * f(atoms_[i]);
  return s;
}

std::vector<double> DiscreteMeasure::label_weights() const {
  if (!space_.is_finite()) throw InvalidInput("label_weights needs a finite space");
  std::vector<double> w(space_.label_count(), 0.0);
  for (std::size_t i = 0; i < atoms_.size(); ++i) w[static_cast<std::size_t>(atoms_[i][0])] = weights_[i];
  return w;
}

bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  return a.space_ == b.space_ && a.atoms_ == b.atoms_ && a.weights_ == b.weights_;
}

std::strong_ordering compare(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.atoms_ < b.atoms_) return std::strong_ordering::less;
  if (b.atoms_ < a.atoms_) return std::strong_ordering::greater;
  for (std::size_t i = 0; i < a.weights_.size(); ++i) {
    if (a.weights_[i] < b.weights_[i]) return std::strong_ordering::less;
    if (a.weights_[i] > b.weights_[i]) return std::strong_ordering::greater;
  }
  return std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// Tuples

TupleClass::TupleClass(GroundSpace space, std::vector<Point> points)
    : space_(std::move(space)), points_(std::move(points)) {
  if (points_.empty()) throw InvalidInput("tuple class needs m >= 1 points");
  for (const auto& p : points_) space_.check(p);
  std::sort(points_.begin(), points_.end());
}

DiscreteMeasure TupleClass::as_measure() const {
  const double w = 1.0 / static_cast<double>(points_.size());
  return DiscreteMeasure(space_, points_, std::vector<double>(points_.size(), w));
}

TupleMeasure::TupleMeasure(GroundSpace space, std::size_t m, std::vector<TupleClass> support,
                           std::vector<double> weights)
    : space_(std::move(space)), m_(m), support_(std::move(support)), weights_(std::move(weights)) {
  if (m_ < 1) throw InvalidInput("tuple measure needs m >= 1");
  if (support_.empty()) throw InvalidInput("tuple measure needs at least one class");
  if (support_.size() != weights_.size()) throw InvalidInput("support and weights differ in length");
  for (const auto& t : support_) {
    if (t.m() != m_) throw InvalidInput("tuple class of the wrong length");
    require_same_space(space_, t.space(), "TupleMeasure");
  }
  check_weights(weights_);
  canonicalize(
      support_, weights_, [](const TupleClass& a, const TupleClass& b) { return a < b; },
      [](const TupleClass& a, const TupleClass& b) { return a == b; });
}

DiscreteMeasure TupleMeasure::marginal() const {
  std::vector<Point> atoms;
  std::vector<double> w;
  const double inv_m = 1.0 / static_cast<double>(m_);
  for (std::size_t i = 0; i < support_.size(); ++i) {
    for (const auto& p : support_[i].points()) {
      atoms.push_back(p);
      w.push_back(weights_[i] * inv_m);
    }
  }
  return DiscreteMeasure(space_, std::move(atoms), std::move(w));
}

// ---------------------------------------------------------------------------
// Measures on measures

MeasureOnMeasures::MeasureOnMeasures(GroundSpace base_space, std::vector<DiscreteMeasure> support,
                                     std::vector<double> weights)
    : base_space_(std::move(base_space)), support_(std::move(support)), weights_(std::move(weights)) {
  if (support_.empty()) throw InvalidInput("measure on measures needs at least one atom");
  if (support_.size() != weights_.size()) throw InvalidInput("support and weights differ in length");
  for (const auto& p : support_) require_same_space(base_space_, p.space(), "MeasureOnMeasures");
  check_weights(weights_);
  canonicalize(
      support_, weights_,
      [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return compare(a, b) < 0; },
      [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return compare(a, b) == 0; });
}

MeasureOnMeasures MeasureOnMeasures::dirac(DiscreteMeasure p) {
  GroundSpace s = p.space();
  return MeasureOnMeasures(std::move(s), {std::move(p)}, {1.0});
}

MeasureOnMeasures MeasureOnMeasures::uniform(GroundSpace base_space, std::vector<DiscreteMeasure> draws) {
  if (draws.empty()) throw InvalidInput("uniform measure on measures needs at least one draw");
  const double w = 1.0 / static_cast<double>(draws.size());
  std::vector<double> weights(draws.size(), w);
  return MeasureOnMeasures(std::move(base_space), std::move(draws), std::move(weights));
}

DiscreteMeasure MeasureOnMeasures::mean() const {
  std::vector<Point> atoms;
  std::vector<double> w;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    const auto& p = support_[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      atoms.push_back(p.atom(j));
      w.push_back(weights_[i] * p.weight(j));
    }
  }
  return DiscreteMeasure(base_space_, std::move(atoms), std::move(w));
}

// ---------------------------------------------------------------------------
// Operations

DiscreteMeasure empirical(std::span<const Point> sample, const GroundSpace& space) {
  if (sample.empty()) throw InvalidInput("empirical measure of an empty sample");
  const double w = 1.0 / static_cast<double>(sample.size());
  return DiscreteMeasure(space, {sample.begin(), sample.end()}, std::vector<double>(sample.size(), w));
}

DiscreteMeasure empirical_from_counts(const GroundSpace& space, std::span<const std::size_t> counts) {
  if (!space.is_finite() || counts.size() != space.label_count()) {
    throw InvalidInput("empirical_from_counts needs one count per label of a finite space");
  }
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n == 0) throw InvalidInput("empirical measure of an empty sample");
  std::vector<double> w(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    w[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return DiscreteMeasure::on_labels(space, w);
}

double cdf(const DiscreteMeasure& mu, double x) {
  if (!mu.space().is_real_line()) throw InvalidInput("cdf needs a measure on the real line");
  if (std::isnan(x)) throw InvalidInput("cdf evaluated at NaN");
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size() && mu.atom(i)[0] <= x; ++i) s += mu.weight(i);
  return std::min(s, 1.0);
}

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const std::function<double(const Point&)>& g) {
  std::vector<Point> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu.atoms()) {
    const double v = g(a);
    if (!std::isfinite(v)) throw InvalidInput("pushforward map returned a non-finite value");
    atoms.push_back(Point{v});
  }
  return DiscreteMeasure(GroundSpace::real_line(), std::move(atoms), mu.weights());
}

void for_each_tuple(std::size_t k, std::size_t m, std::size_t budget,
                    const std::function<void(std::span<const std::size_t>)>& visit) {
  if (m < 1) throw InvalidInput("tuple length must be >= 1");
  std::size_t total = 1;
  for (std::size_t i = 0; i < m; ++i) {
    if (k != 0 && total > budget / k) {
      throw ResourceLimit("enumeration of " + std::to_string(k) + "^" + std::to_string(m) +
                          " tuples exceeds budget " + std::to_string(budget));
    }
    total *= k;
  }
  if (total > budget) throw ResourceLimit("tuple enumeration exceeds budget");
  if (k == 0) return;
  std::vector<std::size_t> idx(m, 0);
  while (true) {
    visit(idx);
    std::size_t pos = m;
    while (pos > 0) {
      --pos;
      if (++idx[pos] < k) break;
      idx[pos] = 0;
      if (pos == 0) return;
    }
  }
}

TupleMeasure product_power(const DiscreteMeasure& mu, std::size_t m, std::size_t budget) {
  std::map<TupleClass, double> acc;
  std::vector<Point> pts(m);
  for_each_tuple(mu.size(), m, budget, [&](std::span<const std::size_t> idx) {
    double w = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      w *= mu.weight(idx[i]);
      pts[i] = mu.atom(idx[i]);
    }
    acc[TupleClass(mu.space(), pts)] += w;
  });
  std::vector<TupleClass> support;
  std::vector<double> weights;
  for (auto& [cls, w] : acc) {
    support.push_back(cls);
    weights.push_back(w);
  }
  return TupleMeasure(mu.space(), m, std::move(support), std::move(weights));
}

// ---------------------------------------------------------------------------
// Text format

void write_measure(std::ostream& os, const DiscreteMeasure& mu) {
  os << "# space: " << mu.space().describe() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, mu.weight(i));
    os << mu.space().format_point(mu.atom(i)) << ' ' << std::string_view(buf, end - buf) << '\n';
  }
}

DiscreteMeasure read_measure(std::istream& is) {
  GroundSpace space = GroundSpace::real_line();
  std::vector<Point> atoms;
  std::vector<double> weights;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view v(line);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
    if (v.empty()) continue;
    if (v.front() == '#') {
      v.remove_prefix(1);
      while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
      if (v.starts_with("space:")) {
        if (seen_data) throw InvalidInput("line " + std::to_string(lineno) + ": space header after data");
        space = GroundSpace::from_description(v.substr(6));
      }
      continue;
    }
    const auto cut = v.find_last_of(" \t");
    if (cut == std::string_view::npos) {
      throw InvalidInput("line " + std::to_string(lineno) + ": expected '<atom> <weight>'");
    }
    try {
      atoms.push_back(space.parse_point(v.substr(0, cut)));
      auto wtext = v.substr(cut + 1);
      double w = 0.0;
      const auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
      if (ec != std::errc{} || ptr != wtext.data() + wtext.size()) {
        throw InvalidInput("bad weight '" + std::string(wtext) + "'");
      }
      weights.push_back(w);
    } catch (const InvalidInput& e) {
      throw InvalidInput("line " + std::to_string(lineno) + ": " + e.what());
    }
    seen_data = true;
  }
  return DiscreteMeasure(std::move(space), std::move(atoms), std::move(weights));
}

}  // namespace exm
