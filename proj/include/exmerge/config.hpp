#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "exmerge/models.hpp"
#include "exmerge/rates.hpp"

namespace exm {

enum class ModelKind { Dirichlet, DP };
enum class BaseKind { Normal, Labels };
enum class Theorem { W, G, P };

std::string_view theorem_name(Theorem t);
Theorem parse_theorem(std::string_view name);

/// Experiment description read from a `key = value` file. Every field has a
/// default; see configs/ for complete examples.
struct ExperimentConfig {
  std::string name = "experiment";

  // model
  ModelKind model = ModelKind::Dirichlet;
  std::size_t labels = 3;
  std::vector<double> concentration{1.0};  // one value means symmetric
  double alpha = 1.0;
  BaseKind base = BaseKind::Normal;
  double base_mean = 0.0;
  double base_sd = 1.0;
  std::size_t base_quadrature = 512;
  std::size_t truncation = 200;
  double residual_bound = 1e-6;

  // schedule and sampling
  Theorem theorem = Theorem::W;
  std::string rate;  // empty: the theorem's default schedule
  std::uint64_t seed = 1;
  std::size_t replicates = 100;
  std::size_t n_min = 32;
  std::size_t n_hi = 100000;
  double ratio = 1.3;
  std::vector<std::size_t> m{1, 2};
  std::size_t posterior_count = 2000;
  std::size_t batches = 10;
  double window = 0.1;

  // metrics
  std::size_t level1_truncation = 24;
  std::size_t level2_truncation = 24;
  std::size_t anchors = 8;

  // empirical Bayes and bounds
  std::string g = "tanh";
  double moment_eps = 1.0;
  double slack = 0.1;           // additive, per unit of m, for the sqrt(2) bounds
  double gini_slack = 0.1;      // relative
  double y_slack = 0.2;         // relative
  double min_coverage = 0.95;
  double min_merged = 0.95;

  // execution
  std::size_t workers = 1;  // 0: one per hardware thread
  std::filesystem::path output = ".";

  RateKind rate_kind() const;
  RateSchedule schedule() const { return {rate_kind(), n_min}; }
  std::vector<std::size_t> n_schedule() const;
  ExchangeableModel make_model() const;
  std::function<double(const Point&)> g_function() const;
  std::size_t worker_count() const;
  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Geometric grid n_min, n_min * ratio, ... rounded, strictly increasing, ending at n_hi.
std::vector<std::size_t> geometric_schedule(std::size_t n_min, std::size_t n_hi, double ratio);

/// Named test functions for the empirical-Bayes experiment.
std::function<double(const Point&)> named_function(std::string_view name);

}  // namespace exm
