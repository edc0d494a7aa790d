// Command-line front end: experiments, oracle self-checks and one-off distances.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "exmerge/error.hpp"
#include "exmerge/harness.hpp"
#include "exmerge/metrics.hpp"
#include "exmerge/oracle.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kCheckFailed = 2;

// Writes outputs (also for partial results), prints checks. Returns false on any failure.
bool report(const exm::ExperimentResult& r, const exm::ExperimentConfig& cfg) {
  for (const auto& path : exm::emit_outputs(r, cfg)) std::cout << "wrote " << path.string() << "\n";
  if (r.failure) {
    std::cerr << "error: " << *r.failure << " (" << r.trajectories.size() << " completed replicates written)\n";
    throw exm::Error(*r.failure);
  }
  bool ok = true;
  for (const auto& c : r.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << r.experiment << ": " << c.name << " (" << c.detail << ")\n";
    ok = ok && c.passed;
  }
  return ok;
}

exm::DiscreteMeasure load_measure(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw exm::InvalidInput("cannot open " + path);
  try {
    return exm::read_measure(in);
  } catch (const exm::Error& e) {
    throw exm::InvalidInput(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Merging rates of posterior and predictive laws for exchangeable sequences"};
  app.require_subcommand(1);

  std::string config_path;
  auto* simulate = app.add_subcommand("simulate", "Sample sequences and track d(p, e_n)");
  simulate->add_option("--config", config_path, "experiment config file")->required();

  std::string theorem;
  auto* rates = app.add_subcommand("rates", "Posterior (and predictive) merging rates");
  rates->add_option("--config", config_path, "experiment config file")->required();
  rates->add_option("--theorem", theorem, "W, G or P")->required()->check(CLI::IsMember({"W", "G", "P"}));

  auto* eb = app.add_subcommand("eb", "Empirical-Bayes experiment");
  eb->add_option("--config", config_path, "experiment config file")->required();

  std::uint64_t seed = 1;
  auto* oracle = app.add_subcommand("oracle-check", "Cross-check metric solvers against independent routes");
  oracle->add_option("--seed", seed, "random seed");

  std::string metric = "w1";
  double p = 1.0;
  std::size_t truncation = 24;
  std::string mu_path, nu_path;
  auto* dist = app.add_subcommand("dist", "Distance between two measure files");
  dist->add_option("--metric", metric, "w1, prokhorov, fm or dW")
      ->check(CLI::IsMember({"w1", "prokhorov", "fm", "dW"}));
  dist->add_option("--p", p, "transport order for w1 (p >= 1)");
  dist->add_option("--truncation", truncation, "generators for dW");
  dist->add_option("mu", mu_path, "first measure file")->required();
  dist->add_option("nu", nu_path, "second measure file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const auto cfg = exm::load_config(config_path);
      const auto r = exm::run_simulation(cfg);
      return report(r, cfg) ? kOk : kCheckFailed;
    }
    if (*rates) {
      auto cfg = exm::load_config(config_path);
      cfg.theorem = exm::parse_theorem(theorem);
      cfg.validate();
      auto r = exm::run_posterior_rate(cfg);
      exm::add_acceptance_checks(r, cfg, true);
      bool ok = report(r, cfg);
      if (cfg.theorem == exm::Theorem::W && exm::model_space(cfg.make_model()).is_finite()) {
        for (auto& pr : exm::run_predictive_rate(cfg)) {
          exm::add_acceptance_checks(pr, cfg, true);
          ok = report(pr, cfg) && ok;
        }
      }
      return ok ? kOk : kCheckFailed;
    }
    if (*eb) {
      const auto cfg = exm::load_config(config_path);
      auto r = exm::run_empirical_bayes(cfg);
      exm::add_acceptance_checks(r, cfg, false);
      return report(r, cfg) ? kOk : kCheckFailed;
    }
    if (*oracle) {
      bool ok = true;
      for (const auto& item : exm::run_oracle_checks(seed)) {
        std::cout << (item.passed() ? "PASS " : "FAIL ") << item.name << ": " << item.cases << " cases, worst "
                  << exm::format_number(item.worst) << " (tolerance " << exm::format_number(item.tolerance) << ")\n";
        ok = ok && item.passed();
      }
      return ok ? kOk : kCheckFailed;
    }
    if (*dist) {
      const auto mu = load_measure(mu_path);
      const auto nu = load_measure(nu_path);
      double value = 0.0;
      if (metric == "w1") {
        value = p == 1.0 && mu.space().is_real_line() ? exm::w1_real(mu, nu) : exm::ot_cost(mu, nu, p);
      } else if (metric == "prokhorov") {
        value = exm::prokhorov(mu, nu);
      } else if (metric == "fm") {
        value = exm::fortet_mourier(mu, nu);
      } else {
        const auto cls = exm::DeterminingClass::covering({mu, nu}, truncation);
        value = exm::dW(mu, nu, cls).value;
      }
      std::printf("%.12g\n", value);
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kOk;
}
