#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "exmerge/space.hpp"

namespace exm {

/// Finite-support probability measure.
///
/// Atoms are kept in lexicographic order with duplicates merged and
/// zero-weight atoms dropped; weights are renormalized to sum to one.
class DiscreteMeasure {
 public:
  /// Input weights must be finite, nonnegative and sum to 1 within 1e-6.
  DiscreteMeasure(GroundSpace space, std::vector<Point> atoms, std::vector<double> weights);

  static DiscreteMeasure dirac(GroundSpace space, Point x);
  /// Dense weight vector indexed by label; the space must be finite.
  static DiscreteMeasure on_labels(GroundSpace space, std::span<const double> weights);

  const GroundSpace& space() const { return space_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Point>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }
  const Point& atom(std::size_t i) const { return atoms_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }

  double expectation(const std::function<double(const Point&)>& f) const;
  /// Label-indexed weights; the space must be finite.
  std::vector<double> label_weights() const;

  friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b);
  /// Lexicographic on (atoms, weights); used to canonicalize measures on measures.
  friend std::strong_ordering compare(const DiscreteMeasure& a, const DiscreteMeasure& b);

 private:
  GroundSpace space_;
  std::vector<Point> atoms_;
  std::vector<double> weights_;
};

/// Equivalence class of an m-tuple under coordinate permutations; the points
/// are stored sorted, so equal multisets compare equal.
class TupleClass {
 public:
  TupleClass(GroundSpace space, std::vector<Point> points);

  const GroundSpace& space() const { return space_; }
  std::size_t m() const { return points_.size(); }
  const std::vector<Point>& points() const { return points_; }
  /// The uniform measure (1/m) sum delta_{x_i}.
  DiscreteMeasure as_measure() const;

  friend bool operator==(const TupleClass& a, const TupleClass& b) { return a.points_ == b.points_; }
  friend auto operator<=>(const TupleClass& a, const TupleClass& b) { return a.points_ <=> b.points_; }

 private:
  GroundSpace space_;
  std::vector<Point> points_;
};

/// Probability measure on the quotient space of m-tuples.
class TupleMeasure {
 public:
  TupleMeasure(GroundSpace space, std::size_t m, std::vector<TupleClass> support,
               std::vector<double> weights);

  const GroundSpace& space() const { return space_; }
  std::size_t m() const { return m_; }
  std::size_t size() const { return support_.size(); }
  const std::vector<TupleClass>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Law of the first coordinate of the exchangeable ordered tuple.
  DiscreteMeasure marginal() const;

 private:
  GroundSpace space_;
  std::size_t m_;
  std::vector<TupleClass> support_;
  std::vector<double> weights_;
};

/// Finite-support probability measure on the space of probability measures.
class MeasureOnMeasures {
 public:
  MeasureOnMeasures(GroundSpace base_space, std::vector<DiscreteMeasure> support,
                    std::vector<double> weights);

  static MeasureOnMeasures dirac(DiscreteMeasure p);
  /// Uniform weights over the given draws (duplicates merged).
  static MeasureOnMeasures uniform(GroundSpace base_space, std::vector<DiscreteMeasure> draws);

  const GroundSpace& base_space() const { return base_space_; }
  std::size_t size() const { return support_.size(); }
  const std::vector<DiscreteMeasure>& support() const { return support_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Mean measure: integral of p over this law.
  DiscreteMeasure mean() const;

 private:
  GroundSpace base_space_;
  std::vector<DiscreteMeasure> support_;
  std::vector<double> weights_;
};

/// Uniform measure on the sample, duplicates merged.
DiscreteMeasure empirical(std::span<const Point> sample, const GroundSpace& space);
/// Empirical measure of a sample given as label counts (finite spaces).
DiscreteMeasure empirical_from_counts(const GroundSpace& space, std::span<const std::size_t> counts);

/// Right-continuous distribution function of a measure on the real line.
double cdf(const DiscreteMeasure& mu, double x);

DiscreteMeasure pushforward(const DiscreteMeasure& mu, const std::function<double(const Point&)>& g);

inline constexpr std::size_t kDefaultTupleBudget = 1'000'000;

/// m-fold product mu^m carried to the quotient of m-tuples. Throws
/// ResourceLimit when |support|^m exceeds `budget`.
TupleMeasure product_power(const DiscreteMeasure& mu, std::size_t m,
                           std::size_t budget = kDefaultTupleBudget);

/// Enumerate all ordered m-tuples over `k` symbols (odometer order); calls
/// `visit(indices)` for each. Throws ResourceLimit if k^m > budget.
void for_each_tuple(std::size_t k, std::size_t m, std::size_t budget,
                    const std::function<void(std::span<const std::size_t>)>& visit);

/// Line format: optional header "# space: <description>", then one
/// "<atom> <weight>" per line. Blank lines and other '#' lines are ignored.
/// Without a header the real line is assumed.
void write_measure(std::ostream& os, const DiscreteMeasure& mu);
DiscreteMeasure read_measure(std::istream& is);

}  // namespace exm
