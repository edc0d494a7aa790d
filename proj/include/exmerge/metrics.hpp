#pragma once

#include <cstddef>
#include <vector>

#include "exmerge/measure.hpp"
#include "exmerge/transport.hpp"

namespace exm {

/// Solver size limits. The defaults keep every exact solver at desk scale.
struct SolverBudget {
  std::size_t transport_side = 200;  // max support size per side for ot_cost
  std::size_t flow_side = 200;       // max support size per side for prokhorov
  std::size_t bruteforce_atoms = 15; // max |support(mu)| for prokhorov_bruteforce
  std::size_t lp_atoms = 40;         // max union support for fortet_mourier
};

/// Pairwise ground distances between the atoms of two measures.
Matrix ground_distances(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Integral of |F_mu - F_nu| over the real line (first-order transport cost
/// via the distribution-function identity).
double w1_real(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Transport cost of order p: (min_gamma sum gamma_ij d(x_i, y_j)^p)^(1/p).
double ot_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p = 1.0,
               const SolverBudget& budget = {});

/// Prokhorov distance (max-flow feasibility, exact over the distance breakpoints).
double prokhorov(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SolverBudget& budget = {});

/// Prokhorov distance straight from the subset definition, for small supports.
/// Evaluates g(eps) = max_B [mu(B) - nu(B^eps)] with closed eps-neighbourhoods
/// over every B within each support, at every pairwise-distance breakpoint,
/// in both orientations.
double prokhorov_bruteforce(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const SolverBudget& budget = {});

/// Bounded-Lipschitz (Fortet-Mourier) distance: sup of |int h d(mu - nu)|
/// over |h| <= 1 with Lipschitz constant <= 1, solved as a linear program on
/// the union support.
double fortet_mourier(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const SolverBudget& budget = {});

// ---------------------------------------------------------------------------
// Determining classes

/// Scored hat function g(x) = clamp(1 - d(x, center)/radius, 0, 1).
struct HatFunction {
  Point center;
  double radius;
};

/// Truncated value of a 2^-k weighted series and the analytic bound on the
/// omitted tail.
struct SeriesValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

/// Indexed family {g_k} of hat functions used by the determining-class metric.
///
/// Generator k (1-based) carries weight 2^-k and is normalized by
/// ||g_k||_BL = 1 + 1/r_k. Centers come from dyadic nets of the bounding box
/// (or from the labels of a finite space) with radii 2^0, 2^-1, ...; scales are
/// interleaved round-robin so every scale appears early in the enumeration.
class DeterminingClass {
 public:
  /// Hat functions over the box [lo, hi] (one entry per coordinate).
  static DeterminingClass dyadic(const GroundSpace& space, std::vector<double> lo, std::vector<double> hi,
                                 std::size_t truncation);
  /// Centers at the labels of a finite space.
  static DeterminingClass on_labels(const GroundSpace& space, std::size_t truncation);
  /// Finite spaces: on_labels. Otherwise a box covering the supports, padded by 1.
  static DeterminingClass covering(const std::vector<DiscreteMeasure>& measures, std::size_t truncation);

  const GroundSpace& space() const { return space_; }
  std::size_t truncation() const { return generators_.size(); }
  const std::vector<HatFunction>& generators() const { return generators_; }
  const std::vector<double>& bl_norms() const { return bl_norms_; }

  double value(std::size_t k, const Point& x) const;       // g_k(x), k 0-based
  double normalized(std::size_t k, const Point& x) const;  // g_k(x) / ||g_k||_BL
  /// (int g*_k d mu)_k.
  std::vector<double> embed(const DiscreteMeasure& mu) const;
  /// 2 * 2^-K.
  double tail_bound() const;
  /// Same class with the first `k` generators.
  DeterminingClass truncated(std::size_t k) const;
  std::string describe() const;

 private:
  DeterminingClass(GroundSpace space, std::vector<HatFunction> generators);

  GroundSpace space_;
  std::vector<HatFunction> generators_;
  std::vector<double> bl_norms_;
  std::vector<double> label_table_;  // finite spaces: g*_k(label) row-major K x labels
};

/// Series weight 2^-k of generator k (0-based index, so 2^-(k+1)).
double series_weight(std::size_t k);

/// Weighted l1 distance of two embeddings: sum_k 2^-k |a_k - b_k|.
double embedding_distance(std::span<const double> a, std::span<const double> b);

/// Determining-class distance between measures on the ground space.
SeriesValue dW(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DeterminingClass& cls);

/// Determining-class distance between measures on m-tuple classes, with the
/// tuple integrand prod_i g*_{k_i}(x_i) symmetrized over coordinate orderings.
/// Multi-indices run over {1..K}^m; tail bound 2 (1 - (1 - 2^-K)^m).
SeriesValue dW_product(const TupleMeasure& pm, const TupleMeasure& qm, const DeterminingClass& cls,
                       std::size_t m);

enum class QuotientMetric { G1, P };

/// Distance of two tuple classes through their uniform empirical measures.
double quotient_dist(const TupleClass& a, const TupleClass& b, QuotientMetric which,
                     const SolverBudget& budget = {});

/// First-order transport between two measures on tuple classes with the
/// quotient G1 distance as ground cost.
double tuple_transport(const TupleMeasure& pm, const TupleMeasure& qm, const SolverBudget& budget = {});

// ---------------------------------------------------------------------------
// Level two: measures on measures

enum class BaseMetric { G1, P, W };
enum class Level2Metric { G1, P, W };

/// Hat functions on ([S], d_base) centered at anchor measures, radii 2^-s,
/// with the same round-robin interleaving and normalization as the ground
/// class.
class AnchorClass {
 public:
  AnchorClass(std::vector<DiscreteMeasure> anchors, std::size_t truncation);

  const std::vector<DiscreteMeasure>& anchors() const { return anchors_; }
  std::size_t truncation() const { return anchor_of_.size(); }
  std::size_t anchor_of(std::size_t k) const { return anchor_of_[k]; }
  double radius(std::size_t k) const { return radius_[k]; }
  double bl_norm(std::size_t k) const { return 1.0 + 1.0 / radius_[k]; }
  /// G_k(p) / ||G_k||_BL given the base distance from p to anchor_of(k).
  double normalized(std::size_t k, double dist_to_anchor) const;
  double tail_bound() const;

 private:
  std::vector<DiscreteMeasure> anchors_;
  std::vector<std::size_t> anchor_of_;
  std::vector<double> radius_;
};

struct Level2Options {
  BaseMetric base = BaseMetric::G1;
  const DeterminingClass* ground_class = nullptr;  // required when base == W
  const AnchorClass* anchor_class = nullptr;       // required for level-2 W
  SolverBudget budget{};
};

/// Distance on [S] selected by `opts.base`.
double base_distance(const DiscreteMeasure& p, const DiscreteMeasure& q, const Level2Options& opts);

/// Level-two distance between two measures on measures.
double level2_dist(const MeasureOnMeasures& nu, const MeasureOnMeasures& target, Level2Metric which,
                   const Level2Options& opts);

/// Prokhorov distance from nu to the Dirac mass at e:
/// inf { eps >= 0 : nu({p : d_base(p, e) > eps}) <= eps }.
double prokhorov_to_dirac(const MeasureOnMeasures& nu, const DiscreteMeasure& e, const Level2Options& opts);

/// Same, from precomputed distances d_base(support_i, e) and weights.
double prokhorov_to_dirac(std::span<const double> weights, std::span<const double> distances);

}  // namespace exm
