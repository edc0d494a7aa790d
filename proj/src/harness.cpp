#include "exmerge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "exmerge/error.hpp"
#include "exmerge/metrics.hpp"

namespace exm {

namespace {

// Runs fn(0..count-1) on a pool. Results land by index, so the outcome does
// not depend on scheduling. The first failure (lowest index) is reported.
template <class R, class F>
std::vector<std::optional<R>> run_pool(std::size_t count, std::size_t workers, F&& fn,
                                       std::optional<std::string>& failure) {
  std::vector<std::optional<R>> out(count);
  std::vector<std::optional<std::string>> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto loop = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[i] = fn(i);
      } catch (const std::exception& e) {
        errors[i] = "replicate " + std::to_string(i) + ": " + e.what();
        stop.store(true);
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, count);
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) {
      failure = *e;
      break;
    }
  return out;
}

template <class R>
std::vector<R> completed(std::vector<std::optional<R>>& v) {
  std::vector<R> out;
  for (auto& x : v)
    if (x) out.push_back(std::move(*x));
  return out;
}

SampledSequence replicate_sequence(const ExperimentConfig& cfg, const ExchangeableModel& model, std::size_t rep) {
  Engine eng = make_engine(cfg.seed, StreamPurpose::Sequence, rep);
  return sample_sequence(model, cfg.n_hi, eng);
}

DiscreteMeasure empirical_of(const PosteriorState& st) {
  if (st.is_dirichlet()) return empirical_from_counts(st.space(), st.counts());
  std::vector<Point> atoms;
  std::vector<double> w;
  atoms.reserve(st.observed().size());
  w.reserve(st.observed().size());
  const double n = static_cast<double>(st.n());
  for (const auto& [x, c] : st.observed()) {
    atoms.push_back(x);
    w.push_back(static_cast<double>(c) / n);
  }
  return DiscreteMeasure(st.space(), std::move(atoms), std::move(w));
}

// Walks the schedule, feeding observations into the posterior state and
// calling visit(index, n, state) at each scheduled n.
template <class Visit>
void walk_schedule(const std::vector<std::size_t>& ns, const SampledSequence& seq, PosteriorState& st, Visit&& visit) {
  std::size_t fed = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    while (fed < ns[i]) st.add(seq.observations[fed++]);
    visit(i, ns[i], st);
  }
}

DeterminingClass ground_class(const ExperimentConfig& cfg, const GroundSpace& space) {
  if (space.is_finite()) return DeterminingClass::on_labels(space, cfg.level1_truncation);
  const double half = 8.0 * cfg.base_sd;
  return DeterminingClass::dyadic(space, {cfg.base_mean - half}, {cfg.base_mean + half}, cfg.level1_truncation);
}

double base_metric(Theorem t, const DiscreteMeasure& p, const DiscreteMeasure& q, const DeterminingClass& cls) {
  switch (t) {
    case Theorem::W: return dW(p, q, cls).value;
    case Theorem::G: return p.space().is_real_line() ? w1_real(p, q) : ot_cost(p, q, 1.0);
    case Theorem::P: return prokhorov(p, q);
  }
  return 0.0;
}

double std_error(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::size_t batch_of(std::size_t i, std::size_t count, std::size_t batches) { return i * batches / count; }

void finish_rows(Trajectory& t, const RateSchedule& sched) {
  for (auto& row : t.rows) {
    row.rate = rate(sched, static_cast<double>(row.n));
    row.normalized = row.rate * row.raw;
  }
}

void set_window(ExperimentResult& r, const ExperimentConfig& cfg) {
  r.window_hi = cfg.n_hi;
  r.window_lo = static_cast<std::size_t>(std::ceil(cfg.window * static_cast<double>(cfg.n_hi)));
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------

ExperimentResult run_simulation(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto model = cfg.make_model();
  const auto model_ptr = std::make_shared<const ExchangeableModel>(model);
  const auto ns = cfg.n_schedule();
  const auto sched = cfg.schedule();
  const auto cls = ground_class(cfg, model_space(model));

  ExperimentResult r;
  r.experiment = std::string("simulate_") + std::string(theorem_name(cfg.theorem));
  set_window(r, cfg);
  auto res = run_pool<Trajectory>(
      cfg.replicates, cfg.worker_count(),
      [&](std::size_t rep) {
        const auto seq = replicate_sequence(cfg, model, rep);
        PosteriorState st(model_ptr);
        Trajectory t;
        t.replicate = rep;
        walk_schedule(ns, seq, st, [&](std::size_t, std::size_t n, const PosteriorState& s) {
          TrajectoryRow row;
          row.n = n;
          row.raw = base_metric(cfg.theorem, seq.directing, empirical_of(s), cls);
          t.rows.push_back(std::move(row));
        });
        finish_rows(t, sched);
        return t;
      },
      r.failure);
  r.trajectories = completed(res);
  return r;
}

// ---------------------------------------------------------------------------

namespace {

// Level-two determining-class functional on [S]: per measure, the vector of
// normalized anchor-hat values, so the distance to a Dirac mass is the
// weighted l1 distance between the posterior mean vector and the target's.
struct AnchorEmbedding {
  const DeterminingClass* ground;
  const AnchorClass* anchors;
  std::vector<std::vector<double>> anchor_emb;

  AnchorEmbedding(const DeterminingClass& g, const AnchorClass& a) : ground(&g), anchors(&a) {
    for (const auto& m : a.anchors()) anchor_emb.push_back(g.embed(m));
  }

  void add_values(const DiscreteMeasure& p, std::vector<double>& acc) const {
    const auto e = ground->embed(p);
    std::vector<double> d(anchor_emb.size());
    for (std::size_t a = 0; a < d.size(); ++a) d[a] = embedding_distance(e, anchor_emb[a]);
    for (std::size_t k = 0; k < anchors->truncation(); ++k) acc[k] += anchors->normalized(k, d[anchors->anchor_of(k)]);
  }
};

std::vector<DiscreteMeasure> draw_anchors(const ExperimentConfig& cfg, const ExchangeableModel& model) {
  Engine eng = make_engine(cfg.seed, StreamPurpose::Anchors);
  std::vector<DiscreteMeasure> out{prior_mean(model)};
  while (out.size() < cfg.anchors) out.push_back(prior_draw(model, eng));
  return out;
}

}  // namespace

ExperimentResult run_posterior_rate(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto model = cfg.make_model();
  const auto& space = model_space(model);
  if (cfg.theorem == Theorem::G && !space.is_real_line())
    throw ConfigError("theorem G needs a model on the real line");
  const auto model_ptr = std::make_shared<const ExchangeableModel>(model);
  const auto ns = cfg.n_schedule();
  const auto sched = cfg.schedule();
  const auto cls = ground_class(cfg, space);
  const AnchorClass anchors(draw_anchors(cfg, model), cfg.level2_truncation);
  const AnchorEmbedding level2(cls, anchors);
  const std::size_t count = cfg.posterior_count;
  const std::size_t B = cfg.batches;

  ExperimentResult r;
  r.experiment = std::string("posterior_") + std::string(theorem_name(cfg.theorem));
  r.extra_columns = {"mc_se", "truth"};
  switch (cfg.theorem) {
    case Theorem::W: r.bound_columns = {"bound"}; break;
    case Theorem::G: r.bound_columns = {"gini", "moment"}; break;
    case Theorem::P: r.bound_columns = {"Y"}; break;
  }
  set_window(r, cfg);

  auto res = run_pool<Trajectory>(
      cfg.replicates, cfg.worker_count(),
      [&](std::size_t rep) {
        const auto seq = replicate_sequence(cfg, model, rep);
        PosteriorState st(model_ptr);
        Trajectory t;
        t.replicate = rep;
        walk_schedule(ns, seq, st, [&](std::size_t, std::size_t n, const PosteriorState& s) {
          const DiscreteMeasure e = empirical_of(s);
          Engine eng = make_engine(cfg.seed, StreamPurpose::Posterior, rep, n);
          TrajectoryRow row;
          row.n = n;
          std::vector<double> batch_stat(B);
          if (cfg.theorem == Theorem::W) {
            const std::size_t K = anchors.truncation();
            std::vector<std::vector<double>> sums(B, std::vector<double>(K, 0.0));
            std::vector<std::size_t> sizes(B, 0);
            for (std::size_t i = 0; i < count; ++i) {
              const std::size_t b = batch_of(i, count, B);
              level2.add_values(posterior_draw(s, eng), sums[b]);
              ++sizes[b];
            }
            std::vector<double> target(K, 0.0);
            level2.add_values(e, target);
            std::vector<double> total(K, 0.0);
            for (std::size_t b = 0; b < B; ++b) {
              std::vector<double> mean(K);
              for (std::size_t k = 0; k < K; ++k) {
                total[k] += sums[b][k];
                mean[k] = sums[b][k] / static_cast<double>(sizes[b]);
              }
              batch_stat[b] = embedding_distance(mean, target);
            }
            for (double& x : total) x /= static_cast<double>(count);
            row.raw = embedding_distance(total, target);
          } else {
            std::vector<double> d(count);
            for (std::size_t i = 0; i < count; ++i) d[i] = base_metric(cfg.theorem, posterior_draw(s, eng), e, cls);
            std::vector<std::size_t> starts(B + 1, count);
            for (std::size_t i = count; i-- > 0;) starts[batch_of(i, count, B)] = i;
            auto stat = [&](std::size_t lo, std::size_t hi) {
              const std::span<const double> part(d.data() + lo, hi - lo);
              if (cfg.theorem == Theorem::G)
                return std::accumulate(part.begin(), part.end(), 0.0) / static_cast<double>(part.size());
              const std::vector<double> w(part.size(), 1.0 / static_cast<double>(part.size()));
              return prokhorov_to_dirac(w, part);
            };
            for (std::size_t b = 0; b < B; ++b) batch_stat[b] = stat(starts[b], starts[b + 1]);
            row.raw = stat(0, count);
          }
          row.extra = {std_error(batch_stat), base_metric(cfg.theorem, seq.directing, e, cls)};
          t.rows.push_back(std::move(row));
        });
        finish_rows(t, sched);
        switch (cfg.theorem) {
          case Theorem::W:
            t.bounds = {std::sqrt(2.0)};
            t.threshold = std::sqrt(2.0) + cfg.slack;
            break;
          case Theorem::G: {
            const DiscreteMeasure e_hi = empirical_of(st);
            t.bounds = {gini_bound(e_hi), moment_bound(e_hi, cfg.moment_eps)};
            t.threshold = t.bounds[0] * (1.0 + cfg.gini_slack);
            break;
          }
          case Theorem::P: {
            std::vector<std::size_t> n;
            std::vector<double> truth;
            for (const auto& row : t.rows) {
              n.push_back(row.n);
              truth.push_back(row.extra[1]);
            }
            t.bounds = {y_estimator(n, truth, cfg.window).value};
            t.threshold = t.bounds[0] * (1.0 + cfg.y_slack);
            break;
          }
        }
        return t;
      },
      r.failure);
  r.trajectories = completed(res);

  if (cfg.theorem == Theorem::G) {
    std::size_t bad = 0;
    for (const auto& t : r.trajectories)
      if (t.bounds[0] > t.bounds[1] + 1e-9) ++bad;
    r.checks.push_back({"gini bound <= moment bound", bad == 0,
                        std::to_string(bad) + " of " + std::to_string(r.trajectories.size()) + " replicates violate"});
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<ExperimentResult> run_predictive_rate(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto model = cfg.make_model();
  const auto& space = model_space(model);
  if (!space.is_finite()) throw Unsupported("exact predictive rates need a finite space");
  const auto model_ptr = std::make_shared<const ExchangeableModel>(model);
  const auto ns = cfg.n_schedule();
  const auto sched = cfg.schedule();
  const auto cls = ground_class(cfg, space);
  const std::size_t count = cfg.posterior_count;
  const std::size_t B = cfg.batches;
  const std::size_t M = cfg.m.size();

  std::vector<ExperimentResult> results(M);
  for (std::size_t j = 0; j < M; ++j) {
    auto& r = results[j];
    r.experiment = "predictive_m" + std::to_string(cfg.m[j]);
    r.extra_columns = {"tail", "quotient_g1", "posterior_g1", "posterior_g1_se"};
    if (cfg.m[j] == 1) r.extra_columns.push_back("identity_gap");
    r.bound_columns = {"bound"};
    set_window(r, cfg);
  }

  std::optional<std::string> failure;
  auto res = run_pool<std::vector<Trajectory>>(
      cfg.replicates, cfg.worker_count(),
      [&](std::size_t rep) {
        const auto seq = replicate_sequence(cfg, model, rep);
        PosteriorState st(model_ptr);
        std::vector<Trajectory> ts(M);
        walk_schedule(ns, seq, st, [&](std::size_t, std::size_t n, const PosteriorState& s) {
          const DiscreteMeasure e = empirical_of(s);
          // E_q d^G1(p, e_n), shared by every m.
          Engine eng = make_engine(cfg.seed, StreamPurpose::Posterior, rep, n);
          std::vector<double> batch_sum(B, 0.0), batch_size(B, 0.0);
          for (std::size_t i = 0; i < count; ++i) {
            const std::size_t b = batch_of(i, count, B);
            batch_sum[b] += ot_cost(posterior_draw(s, eng), e, 1.0);
            batch_size[b] += 1.0;
          }
          std::vector<double> batch_mean(B);
          for (std::size_t b = 0; b < B; ++b) batch_mean[b] = batch_sum[b] / batch_size[b];
          const double post_g1 = std::accumulate(batch_sum.begin(), batch_sum.end(), 0.0) / static_cast<double>(count);
          const double post_se = std_error(batch_mean);
          for (std::size_t j = 0; j < M; ++j) {
            const std::size_t m = cfg.m[j];
            const TupleMeasure pm = predictive_m(s, m);
            const TupleMeasure em = product_power(e, m);
            const SeriesValue dv = dW_product(pm, em, cls, m);
            TrajectoryRow row;
            row.n = n;
            row.raw = dv.value;
            row.extra = {dv.tail_bound, tuple_transport(pm, em), post_g1, post_se};
            if (m == 1) row.extra.push_back(std::abs(dv.value - dW(predictive_one(s), e, cls).value));
            ts[j].rows.push_back(std::move(row));
          }
        });
        for (std::size_t j = 0; j < M; ++j) {
          const double mm = static_cast<double>(cfg.m[j]);
          ts[j].replicate = rep;
          finish_rows(ts[j], sched);
          ts[j].bounds = {std::sqrt(2.0) * mm};
          ts[j].threshold = std::sqrt(2.0) * mm + cfg.slack * mm;
        }
        return ts;
      },
      failure);

  for (auto& per_rep : res) {
    if (!per_rep) continue;
    for (std::size_t j = 0; j < M; ++j) results[j].trajectories.push_back(std::move((*per_rep)[j]));
  }
  for (std::size_t j = 0; j < M; ++j) {
    auto& r = results[j];
    r.failure = failure;
    std::size_t above = 0, cells = 0;
    double worst_identity = 0.0;
    for (const auto& t : r.trajectories)
      for (const auto& row : t.rows) {
        ++cells;
        if (row.extra[1] > row.extra[2] + 3.0 * row.extra[3] + 1e-12) ++above;
        if (cfg.m[j] == 1) worst_identity = std::max(worst_identity, row.extra[4]);
      }
    r.checks.push_back({"quotient G1 <= posterior G1 (3 MC s.e.)", above == 0,
                        std::to_string(above) + " of " + std::to_string(cells) + " cells above"});
    if (cfg.m[j] == 1)
      r.checks.push_back({"dW_product(m=1) == dW", worst_identity <= 1e-12,
                          "max gap " + format_number(worst_identity)});
  }
  return results;
}

// ---------------------------------------------------------------------------

ExperimentResult run_empirical_bayes(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto model = cfg.make_model();
  const auto model_ptr = std::make_shared<const ExchangeableModel>(model);
  const auto ns = cfg.n_schedule();
  const auto sched = cfg.schedule();
  const auto g = cfg.g_function();
  const double prior_total = std::holds_alternative<DPModel>(model) ? std::get<DPModel>(model).alpha
                                                                    : std::get<FiniteDirichletModel>(model).total();
  const double prior_g = prior_mean(model).expectation(g);

  ExperimentResult r;
  r.experiment = "eb";
  r.extra_columns = {"bayes", "plugin", "gap", "oracle_gap", "oracle_error", "violation"};
  r.bound_columns = {"gini_g"};
  set_window(r, cfg);

  auto res = run_pool<Trajectory>(
      cfg.replicates, cfg.worker_count(),
      [&](std::size_t rep) {
        const auto seq = replicate_sequence(cfg, model, rep);
        PosteriorState st(model_ptr);
        Trajectory t;
        t.replicate = rep;
        walk_schedule(ns, seq, st, [&](std::size_t, std::size_t n, const PosteriorState& s) {
          const DiscreteMeasure e = empirical_of(s);
          const double bayes = bayes_estimator(s, g);
          const double plugin = e.expectation(g);
          const double gap = bayes - plugin;
          const double w1 = w1_real(pushforward(predictive_one(s), g), pushforward(e, g));
          const double nn = static_cast<double>(n);
          const double oracle = prior_total / (prior_total + nn) * (prior_g - plugin);
          TrajectoryRow row;
          row.n = n;
          row.raw = w1;
          row.extra = {bayes, plugin, gap, oracle, std::abs(gap - oracle), std::abs(gap) > w1 + 1e-9 ? 1.0 : 0.0};
          t.rows.push_back(std::move(row));
        });
        finish_rows(t, sched);
        t.bounds = {gini_bound(pushforward(seq.directing, g))};
        t.threshold = t.bounds[0] * (1.0 + cfg.gini_slack);
        return t;
      },
      r.failure);
  r.trajectories = completed(res);

  std::size_t violations = 0, cells = 0;
  double worst_oracle = 0.0;
  for (const auto& t : r.trajectories)
    for (const auto& row : t.rows) {
      ++cells;
      if (row.extra[5] != 0.0) ++violations;
      worst_oracle = std::max(worst_oracle, row.extra[4]);
    }
  r.checks.push_back({"|B - g| <= d_G1 of pushforwards", violations == 0,
                      std::to_string(violations) + " of " + std::to_string(cells) + " cells violate"});
  r.checks.push_back({"closed-form gap matches Bayes estimate", worst_oracle <= 1e-9,
                      "max error " + format_number(worst_oracle)});
  return r;
}

// ---------------------------------------------------------------------------

double windowed_max(const Trajectory& t, std::size_t lo, std::size_t hi) {
  bool any = false;
  double best = 0.0;
  for (const auto& row : t.rows) {
    if (row.n < lo || row.n > hi) continue;
    best = any ? std::max(best, row.normalized) : row.normalized;
    any = true;
  }
  if (!any) throw InvalidInput("window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] holds no scheduled n");
  return best;
}

double finitary_statistic(const std::vector<Trajectory>& ts, double L, double eps, std::size_t lo, std::size_t hi) {
  if (ts.empty()) throw InvalidInput("finitary_statistic needs at least one trajectory");
  std::size_t hit = 0;
  for (const auto& t : ts)
    if (windowed_max(t, lo, hi) <= L + eps) ++hit;
  return static_cast<double>(hit) / static_cast<double>(ts.size());
}

double coverage(const ExperimentResult& r) {
  if (r.trajectories.empty()) throw InvalidInput("coverage needs at least one trajectory");
  std::size_t hit = 0;
  for (const auto& t : r.trajectories)
    if (windowed_max(t, r.window_lo, r.window_hi) <= t.threshold) ++hit;
  return static_cast<double>(hit) / static_cast<double>(r.trajectories.size());
}

namespace {

bool merged(const Trajectory& t) { return t.rows.back().raw <= 0.1 * t.rows.front().raw; }

}  // namespace

double merging_fraction(const ExperimentResult& r) {
  if (r.trajectories.empty()) throw InvalidInput("merging_fraction needs at least one trajectory");
  std::size_t hit = 0;
  for (const auto& t : r.trajectories)
    if (merged(t)) ++hit;
  return static_cast<double>(hit) / static_cast<double>(r.trajectories.size());
}

void add_acceptance_checks(ExperimentResult& r, const ExperimentConfig& cfg, bool check_coverage) {
  if (r.trajectories.empty()) {
    r.checks.push_back({"trajectories present", false, "no completed replicates"});
    return;
  }
  if (check_coverage) {
    const double c = coverage(r);
    r.checks.push_back({"coverage >= " + format_number(cfg.min_coverage), c >= cfg.min_coverage,
                        "coverage " + format_number(c)});
  }
  const double mf = merging_fraction(r);
  r.checks.push_back({"raw(n_hi) <= 0.1 raw(n_min) in >= " + format_number(cfg.min_merged), mf >= cfg.min_merged,
                      "fraction " + format_number(mf)});
}

}  // namespace exm
