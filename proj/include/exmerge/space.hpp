#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exm {

/// A point of a ground space. Real line: one coordinate. R^d: d coordinates.
/// Finite labeled set: one coordinate holding the label index.
using Point = std::vector<double>;

/// Metric-space descriptor shared by every measure and metric.
///
/// Cheap to copy: the label table and distance matrix of a finite space are
/// held behind a shared immutable block.
class GroundSpace {
 public:
  enum class Kind { RealLine, EuclideanRd, FiniteLabeled };

  GroundSpace();  // real line

  static GroundSpace real_line();
  static GroundSpace euclidean(std::size_t dim);
  /// `distance` is row-major K x K. Validated: zero diagonal, symmetry,
  /// nonnegativity, positivity off the diagonal, triangle inequality.
  static GroundSpace finite(std::vector<std::string> labels, std::vector<double> distance);
  /// Finite set with the 0/1 metric.
  static GroundSpace discrete(std::vector<std::string> labels);
  /// Discrete space on labels "0".."k-1".
  static GroundSpace discrete(std::size_t k);

  Kind kind() const { return kind_; }
  bool is_real_line() const { return kind_ == Kind::RealLine; }
  bool is_finite() const { return kind_ == Kind::FiniteLabeled; }
  /// Coordinates per point (1 for the real line and for finite spaces).
  std::size_t coords() const { return dim_; }

  std::size_t label_count() const;
  const std::vector<std::string>& labels() const;
  std::optional<std::size_t> label_index(std::string_view label) const;
  double label_distance(std::size_t i, std::size_t j) const;
  Point label_point(std::size_t i) const { return Point{static_cast<double>(i)}; }

  double distance(std::span<const double> a, std::span<const double> b) const;
  bool contains(std::span<const double> p) const;
  /// Throws InvalidInput if `p` is not a point of this space.
  void check(std::span<const double> p) const;

  std::string format_point(std::span<const double> p) const;
  Point parse_point(std::string_view text) const;

  /// One-line description, also used as the header of the measure text format.
  std::string describe() const;
  static GroundSpace from_description(std::string_view text);

  bool operator==(const GroundSpace& other) const;

 private:
  struct Finite {
    std::vector<std::string> labels;
    std::vector<double> distance;
  };

  GroundSpace(Kind kind, std::size_t dim, std::shared_ptr<const Finite> finite);

  Kind kind_;
  std::size_t dim_;
  std::shared_ptr<const Finite> finite_;
};

/// Throws InvalidInput unless both spaces are equal.
void require_same_space(const GroundSpace& a, const GroundSpace& b, std::string_view what);

}  // namespace exm
