#include "exmerge/models.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "exmerge/error.hpp"

namespace exm {

namespace {

double normal_quantile(double mean, double sd, double u) {
  return boost::math::quantile(boost::math::normal_distribution<>(mean, sd), u);
}

DiscreteMeasure normal_representation(const NormalBase& nb) {
  std::vector<Point> atoms;
  atoms.reserve(nb.quadrature);
  const double q = static_cast<double>(nb.quadrature);
  for (std::size_t j = 0; j < nb.quadrature; ++j) {
    atoms.push_back(Point{normal_quantile(nb.mean, nb.sd, (static_cast<double>(j) + 0.5) / q)});
  }
  return DiscreteMeasure(GroundSpace::real_line(), std::move(atoms), std::vector<double>(nb.quadrature, 1.0 / q));
}

// Beta(1, alpha) by inversion.
double stick_fraction(double alpha, Engine& eng) { return 1.0 - std::pow(open_uniform(eng), 1.0 / alpha); }

}  // namespace

// ---------------------------------------------------------------------------
// Base measures

BaseMeasure::BaseMeasure(std::variant<DiscreteMeasure, NormalBase> impl, DiscreteMeasure representation)
    : impl_(std::move(impl)), representation_(std::move(representation)) {
  if (const auto* d = std::get_if<DiscreteMeasure>(&impl_)) {
    cumulative_.resize(d->size());
    std::partial_sum(d->weights().begin(), d->weights().end(), cumulative_.begin());
  }
}

BaseMeasure BaseMeasure::discrete(DiscreteMeasure mu) {
  DiscreteMeasure rep = mu;
  return BaseMeasure(std::move(mu), std::move(rep));
}

BaseMeasure BaseMeasure::normal(double mean, double sd, std::size_t quadrature) {
  if (!std::isfinite(mean) || !(sd > 0.0) || !std::isfinite(sd)) throw ConfigError("normal base needs finite mean and sd > 0");
  if (quadrature < 1) throw ConfigError("normal base needs quadrature >= 1");
  NormalBase nb{mean, sd, quadrature};
  DiscreteMeasure rep = normal_representation(nb);
  return BaseMeasure(nb, std::move(rep));
}

const GroundSpace& BaseMeasure::space() const { return representation_.space(); }

Point BaseMeasure::sample(Engine& eng) const {
  if (const auto* nb = std::get_if<NormalBase>(&impl_)) {
    return Point{normal_quantile(nb->mean, nb->sd, open_uniform(eng))};
  }
  const auto& d = std::get<DiscreteMeasure>(impl_);
  const double u = open_uniform(eng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), d.size() - 1);
  return d.atom(idx);
}

std::string BaseMeasure::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* nb = std::get_if<NormalBase>(&impl_)) {
    os << "normal(mean=" << nb->mean << ",sd=" << nb->sd << ",quadrature=" << nb->quadrature << ")";
  } else {
    os << "discrete(" << representation_.size() << " atoms on " << representation_.space().describe() << ")";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Models

double FiniteDirichletModel::total() const {
  return std::accumulate(concentration.begin(), concentration.end(), 0.0);
}

double DPModel::expected_residual() const {
  return std::pow(alpha / (alpha + 1.0), static_cast<double>(truncation));
}

FiniteDirichletModel make_finite_dirichlet(GroundSpace space, std::vector<double> concentration) {
  if (!space.is_finite()) throw ConfigError("finite Dirichlet model needs a finite labeled space");
  if (space.label_count() < 2) throw ConfigError("finite Dirichlet model needs K >= 2 labels");
  if (concentration.size() != space.label_count()) throw ConfigError("one concentration per label required");
  for (double a : concentration)
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("concentrations must be positive and finite");
  return {std::move(space), std::move(concentration)};
}

DPModel make_dp(BaseMeasure base, double alpha, std::size_t truncation, double residual_bound) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("DP total mass alpha must be positive");
  if (truncation < 1) throw ConfigError("DP truncation must be >= 1");
  if (!(residual_bound > 0.0)) throw ConfigError("DP residual bound must be positive");
  return {std::move(base), alpha, truncation, residual_bound};
}

const GroundSpace& model_space(const ExchangeableModel& model) {
  if (const auto* fd = std::get_if<FiniteDirichletModel>(&model)) return fd->space;
  return std::get<DPModel>(model).base.space();
}

void validate_truncation(const ExchangeableModel& model) {
  if (const auto* dp = std::get_if<DPModel>(&model)) {
    if (dp->expected_residual() > dp->residual_bound) {
      std::ostringstream os;
      os << "stick-breaking truncation T=" << dp->truncation << " leaves expected residual "
         << dp->expected_residual() << " above bound " << dp->residual_bound;
      throw ConfigError(os.str());
    }
  }
}

std::vector<double> dirichlet_draw(std::span<const double> params, Engine& eng) {
  std::vector<double> g(params.size());
  double total = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::gamma_distribution<double> gamma(params[i], 1.0);
    g[i] = gamma(eng);
    total += g[i];
  }
  if (!(total > 0.0)) {
    // All gammas underflowed (tiny parameters): put the mass on the largest parameter.
    const auto it = std::max_element(params.begin(), params.end());
    std::fill(g.begin(), g.end(), 0.0);
    g[static_cast<std::size_t>(it - params.begin())] = 1.0;
    return g;
  }
  for (double& x : g) x /= total;
  return g;
}

DiscreteMeasure stick_breaking_draw(double alpha, const BaseMeasure& base, std::size_t truncation, Engine& eng) {
  std::vector<Point> atoms;
  std::vector<double> weights;
  atoms.reserve(truncation + 1);
  weights.reserve(truncation + 1);
  double remaining = 1.0;
  for (std::size_t k = 0; k < truncation; ++k) {
    const double v = stick_fraction(alpha, eng);
    weights.push_back(remaining * v);
    remaining *= 1.0 - v;
    atoms.push_back(base.sample(eng));
  }
  atoms.push_back(base.sample(eng));
  weights.push_back(remaining);
  return DiscreteMeasure(base.space(), std::move(atoms), std::move(weights));
}

DiscreteMeasure prior_draw(const ExchangeableModel& model, Engine& eng) {
  if (const auto* fd = std::get_if<FiniteDirichletModel>(&model)) {
    return DiscreteMeasure::on_labels(fd->space, dirichlet_draw(fd->concentration, eng));
  }
  const auto& dp = std::get<DPModel>(model);
  validate_truncation(model);
  return stick_breaking_draw(dp.alpha, dp.base, dp.truncation, eng);
}

DiscreteMeasure prior_mean(const ExchangeableModel& model) {
  return predictive_one(PosteriorState(std::make_shared<const ExchangeableModel>(model)));
}

AtomSampler::AtomSampler(const DiscreteMeasure& mu) : mu_(&mu), cumulative_(mu.size()) {
  std::partial_sum(mu.weights().begin(), mu.weights().end(), cumulative_.begin());
}

std::size_t AtomSampler::index(Engine& eng) const {
  const double u = open_uniform(eng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
}

SampledSequence sample_sequence(const ExchangeableModel& model, std::size_t n, Engine& eng) {
  if (n < 1) throw InvalidInput("sample_sequence needs n >= 1");
  validate_truncation(model);
  DiscreteMeasure directing = prior_draw(model, eng);
  std::vector<Point> obs;
  obs.reserve(n);
  const AtomSampler draw(directing);
  for (std::size_t i = 0; i < n; ++i) obs.push_back(draw(eng));
  return {std::move(directing), std::move(obs)};
}

SampledSequence sample_sequence(const ExchangeableModel& model, std::size_t n, std::uint64_t seed) {
  Engine eng(seed);
  return sample_sequence(model, n, eng);
}

// ---------------------------------------------------------------------------
// Posterior state

PosteriorState::PosteriorState(std::shared_ptr<const ExchangeableModel> model) : model_(std::move(model)) {
  if (!model_) throw InvalidInput("posterior state needs a model");
  if (const auto* fd = std::get_if<FiniteDirichletModel>(model_.get())) counts_.assign(fd->space.label_count(), 0);
}

std::vector<double> PosteriorState::dirichlet_parameters() const {
  const auto& fd = std::get<FiniteDirichletModel>(*model_);
  std::vector<double> p(fd.concentration);
  for (std::size_t j = 0; j < p.size(); ++j) p[j] += static_cast<double>(counts_[j]);
  return p;
}

void PosteriorState::add(const Point& x, std::size_t multiplicity) {
  space().check(x);
  if (is_dirichlet()) {
    counts_[static_cast<std::size_t>(x[0])] += multiplicity;
  } else {
    const auto it = std::lower_bound(observed_.begin(), observed_.end(), x,
                                     [](const auto& entry, const Point& p) { return entry.first < p; });
    if (it != observed_.end() && it->first == x) {
      it->second += multiplicity;
    } else {
      observed_.insert(it, {x, multiplicity});
    }
  }
  n_ += multiplicity;
}

bool operator==(const PosteriorState& a, const PosteriorState& b) {
  return a.model_ == b.model_ && a.n_ == b.n_ && a.counts_ == b.counts_ && a.observed_ == b.observed_;
}

PosteriorState posterior_update(const PosteriorState& state, const Point& x) {
  PosteriorState next = state;
  next.add(x);
  return next;
}

PosteriorState posterior_update(const PosteriorState& state, std::span<const Point> batch) {
  PosteriorState next = state;
  for (const auto& x : batch) next.add(x);
  return next;
}

DiscreteMeasure posterior_draw(const PosteriorState& state, Engine& eng) {
  if (state.is_dirichlet()) {
    const auto& fd = std::get<FiniteDirichletModel>(state.model());
    return DiscreteMeasure::on_labels(fd.space, dirichlet_draw(state.dirichlet_parameters(), eng));
  }
  const auto& dp = std::get<DPModel>(state.model());
  validate_truncation(state.model());
  // DP(alpha P0 + sum n_j delta_xj) = V0 * DP(alpha P0) + sum_j V_j delta_xj
  // with (V0, V1, ..., VJ) ~ Dirichlet(alpha, n_1, ..., n_J).
  const auto& obs = state.observed();
  std::vector<double> params;
  params.reserve(obs.size() + 1);
  params.push_back(dp.alpha);
  for (const auto& [x, c] : obs) params.push_back(static_cast<double>(c));
  const auto v = dirichlet_draw(params, eng);
  const DiscreteMeasure fresh = stick_breaking_draw(dp.alpha, dp.base, dp.truncation, eng);
  std::vector<Point> atoms;
  std::vector<double> weights;
  atoms.reserve(fresh.size() + obs.size());
  weights.reserve(fresh.size() + obs.size());
  for (std::size_t i = 0; i < fresh.size(); ++i) {
    atoms.push_back(fresh.atom(i));
    weights.push_back(v[0] * fresh.weight(i));
  }
  for (std::size_t j = 0; j < obs.size(); ++j) {
    atoms.push_back(obs[j].first);
    weights.push_back(v[j + 1]);
  }
  return DiscreteMeasure(state.space(), std::move(atoms), std::move(weights));
}

MeasureOnMeasures posterior_sample(const PosteriorState& state, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidInput("posterior_sample needs count >= 1");
  Engine eng(seed);
  std::vector<DiscreteMeasure> draws;
  draws.reserve(count);
  for (std::size_t i = 0; i < count; ++i) draws.push_back(posterior_draw(state, eng));
  return MeasureOnMeasures::uniform(state.space(), std::move(draws));
}

DiscreteMeasure predictive_one(const PosteriorState& state) {
  const double n = static_cast<double>(state.n());
  if (state.is_dirichlet()) {
    const auto params = state.dirichlet_parameters();
    const double total = std::get<FiniteDirichletModel>(state.model()).total() + n;
    std::vector<double> w(params.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = params[j] / total;
    return DiscreteMeasure::on_labels(state.space(), w);
  }
  const auto& dp = std::get<DPModel>(state.model());
  const auto& rep = dp.base.representation();
  const double total = dp.alpha + n;
  std::vector<Point> atoms(rep.atoms());
  std::vector<double> w;
  w.reserve(rep.size() + state.observed().size());
  for (double b : rep.weights()) w.push_back(dp.alpha * b / total);
  for (const auto& [x, c] : state.observed()) {
    atoms.push_back(x);
    w.push_back(static_cast<double>(c) / total);
  }
  return DiscreteMeasure(state.space(), std::move(atoms), std::move(w));
}

TupleMeasure predictive_m(const PosteriorState& state, std::size_t m, std::size_t budget) {
  if (m < 1) throw InvalidInput("predictive_m needs m >= 1");
  const GroundSpace& space = state.space();
  if (!space.is_finite()) throw Unsupported("exact m-step predictive needs a finite space; use Monte Carlo");
  const std::size_t L = space.label_count();

  // Polya urn: P(next = x | urn) = (prior_mass(x) + count(x)) / (prior_total + size).
  std::vector<double> urn(L, 0.0);
  double urn_total = 0.0;
  if (state.is_dirichlet()) {
    urn = state.dirichlet_parameters();
    urn_total = std::get<FiniteDirichletModel>(state.model()).total() + static_cast<double>(state.n());
  } else {
    const auto& dp = std::get<DPModel>(state.model());
    const auto& rep = dp.base.representation();
    for (std::size_t i = 0; i < rep.size(); ++i) urn[static_cast<std::size_t>(rep.atom(i)[0])] += dp.alpha * rep.weight(i);
    for (const auto& [x, c] : state.observed()) urn[static_cast<std::size_t>(x[0])] += static_cast<double>(c);
    urn_total = dp.alpha + static_cast<double>(state.n());
  }

  std::map<TupleClass, double> acc;
  std::vector<double> extra(L, 0.0);
  std::vector<Point> pts(m);
  for_each_tuple(L, m, budget, [&](std::span<const std::size_t> idx) {
    std::fill(extra.begin(), extra.end(), 0.0);
    double w = 1.0;
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t x = idx[t];
      w *= (urn[x] + extra[x]) / (urn_total + static_cast<double>(t));
      extra[x] += 1.0;
      pts[t] = space.label_point(x);
    }
    if (w > 0.0) acc[TupleClass(space, pts)] += w;
  });
  std::vector<TupleClass> support;
  std::vector<double> weights;
  for (auto& [cls, w] : acc) {
    support.push_back(cls);
    weights.push_back(w);
  }
  return TupleMeasure(space, m, std::move(support), std::move(weights));
}

double bayes_estimator(const PosteriorState& state, const std::function<double(const Point&)>& g) {
  return predictive_one(state).expectation(g);
}

}  // namespace exm
