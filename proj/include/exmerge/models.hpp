#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "exmerge/measure.hpp"
#include "exmerge/rng.hpp"

namespace exm {

/// Normal law sampled through its quantile function. For closed-form
/// predictive computations it is represented by `quadrature` equal-mass
/// atoms at the midpoint quantiles mean + sd * Phi^-1((j - 1/2) / Q).
struct NormalBase {
  double mean = 0.0;
  double sd = 1.0;
  std::size_t quadrature = 512;
};

/// Base measure P_0 of a Dirichlet process.
class BaseMeasure {
 public:
  static BaseMeasure discrete(DiscreteMeasure mu);
  static BaseMeasure normal(double mean = 0.0, double sd = 1.0, std::size_t quadrature = 512);

  const GroundSpace& space() const;
  bool is_normal() const { return std::holds_alternative<NormalBase>(impl_); }
  Point sample(Engine& eng) const;
  /// Finite-support stand-in used by every exact predictive formula.
  const DiscreteMeasure& representation() const { return representation_; }
  std::string describe() const;

 private:
  BaseMeasure(std::variant<DiscreteMeasure, NormalBase> impl, DiscreteMeasure representation);

  std::variant<DiscreteMeasure, NormalBase> impl_;
  DiscreteMeasure representation_;
  std::vector<double> cumulative_;  // discrete case
};

/// Finite-dimensional Dirichlet prior on the labels of a finite space.
struct FiniteDirichletModel {
  GroundSpace space;
  std::vector<double> concentration;

  double total() const;
};

/// Dirichlet-process prior DP(alpha, P_0); draws use stick-breaking truncated
/// after `truncation` sticks, with the leftover mass placed on one extra draw
/// from P_0.
struct DPModel {
  BaseMeasure base;
  double alpha = 1.0;
  std::size_t truncation = 200;
  double residual_bound = 1e-6;

  /// E[leftover stick mass] = (alpha / (alpha + 1))^T.
  double expected_residual() const;
};

using ExchangeableModel = std::variant<FiniteDirichletModel, DPModel>;

FiniteDirichletModel make_finite_dirichlet(GroundSpace space, std::vector<double> concentration);
DPModel make_dp(BaseMeasure base, double alpha, std::size_t truncation = 200, double residual_bound = 1e-6);

const GroundSpace& model_space(const ExchangeableModel& model);
/// Throws ConfigError when a DP truncation residual exceeds its bound.
void validate_truncation(const ExchangeableModel& model);

/// One draw of the random measure from the prior.
DiscreteMeasure prior_draw(const ExchangeableModel& model, Engine& eng);
/// Mean of the prior (the one-step predictive before any data).
DiscreteMeasure prior_mean(const ExchangeableModel& model);

struct SampledSequence {
  DiscreteMeasure directing;
  std::vector<Point> observations;
};

/// Draws the directing measure from the prior, then n i.i.d. observations from it.
SampledSequence sample_sequence(const ExchangeableModel& model, std::size_t n, std::uint64_t seed);
SampledSequence sample_sequence(const ExchangeableModel& model, std::size_t n, Engine& eng);

/// Inverse-CDF sampler over a measure's atoms.
class AtomSampler {
 public:
  explicit AtomSampler(const DiscreteMeasure& mu);
  std::size_t index(Engine& eng) const;
  const Point& operator()(Engine& eng) const { return mu_->atom(index(eng)); }

 private:
  const DiscreteMeasure* mu_;
  std::vector<double> cumulative_;
};

/// Sufficient statistics of the posterior after n observations: label counts
/// for the finite Dirichlet model, sorted distinct atoms with multiplicities
/// for the Dirichlet process. Both are invariant under reordering the data.
class PosteriorState {
 public:
  explicit PosteriorState(std::shared_ptr<const ExchangeableModel> model);

  const ExchangeableModel& model() const { return *model_; }
  const std::shared_ptr<const ExchangeableModel>& model_ptr() const { return model_; }
  const GroundSpace& space() const { return model_space(*model_); }
  std::size_t n() const { return n_; }
  bool is_dirichlet() const { return std::holds_alternative<FiniteDirichletModel>(*model_); }

  /// Finite Dirichlet: per-label counts.
  const std::vector<std::size_t>& counts() const { return counts_; }
  /// Dirichlet process: distinct observed atoms with multiplicities, sorted.
  const std::vector<std::pair<Point, std::size_t>>& observed() const { return observed_; }

  /// Finite Dirichlet posterior parameters a_j + n_j.
  std::vector<double> dirichlet_parameters() const;

  /// In-place update; the functional form is posterior_update().
  void add(const Point& x, std::size_t multiplicity = 1);

  friend bool operator==(const PosteriorState& a, const PosteriorState& b);

 private:
  std::shared_ptr<const ExchangeableModel> model_;
  std::size_t n_ = 0;
  std::vector<std::size_t> counts_;
  std::vector<std::pair<Point, std::size_t>> observed_;
};

PosteriorState posterior_update(const PosteriorState& state, const Point& x);
PosteriorState posterior_update(const PosteriorState& state, std::span<const Point> batch);

/// One draw from the posterior law of the random measure.
DiscreteMeasure posterior_draw(const PosteriorState& state, Engine& eng);
/// `count` i.i.d. posterior draws packaged as a uniform measure on measures.
MeasureOnMeasures posterior_sample(const PosteriorState& state, std::size_t count, std::uint64_t seed);

/// Exact one-step predictive law.
DiscreteMeasure predictive_one(const PosteriorState& state);

/// Exact m-step predictive on tuple classes by the Polya chain rule (finite spaces).
TupleMeasure predictive_m(const PosteriorState& state, std::size_t m,
                          std::size_t budget = kDefaultTupleBudget);

/// Posterior mean of int g dp, i.e. the mean of g under the one-step predictive.
double bayes_estimator(const PosteriorState& state, const std::function<double(const Point&)>& g);

/// Samples a Dirichlet vector with the given parameters.
std::vector<double> dirichlet_draw(std::span<const double> params, Engine& eng);

/// Truncated stick-breaking draw from DP(alpha, base).
DiscreteMeasure stick_breaking_draw(double alpha, const BaseMeasure& base, std::size_t truncation, Engine& eng);

}  // namespace exm
