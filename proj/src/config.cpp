#include "exmerge/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "exmerge/error.hpp"

namespace exm {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
    throw ConfigError("'" + key + "' expects a real number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(to_uint(key, v));
}

}  // namespace

std::string_view theorem_name(Theorem t) {
  switch (t) {
    case Theorem::W: return "W";
    case Theorem::G: return "G";
    case Theorem::P: return "P";
  }
  return "?";
}

Theorem parse_theorem(std::string_view name) {
  if (name == "W") return Theorem::W;
  if (name == "G") return Theorem::G;
  if (name == "P") return Theorem::P;
  throw ConfigError("theorem must be one of W, G, P; got '" + std::string(name) + "'");
}

RateKind ExperimentConfig::rate_kind() const {
  if (!rate.empty()) return parse_rate_kind(rate);
  return theorem == Theorem::P ? RateKind::NOverLogQuarter : RateKind::SqrtNOverLogLog;
}

std::vector<std::size_t> ExperimentConfig::n_schedule() const { return geometric_schedule(n_min, n_hi, ratio); }

ExchangeableModel ExperimentConfig::make_model() const {
  if (model == ModelKind::Dirichlet) {
    std::vector<double> a = concentration;
    if (a.size() == 1) a.assign(labels, concentration.front());
    return make_finite_dirichlet(GroundSpace::discrete(labels), std::move(a));
  }
  BaseMeasure b = base == BaseKind::Normal
                      ? BaseMeasure::normal(base_mean, base_sd, base_quadrature)
                      : BaseMeasure::discrete(DiscreteMeasure::on_labels(
                            GroundSpace::discrete(labels), std::vector<double>(labels, 1.0 / static_cast<double>(labels))));
  return make_dp(std::move(b), alpha, truncation, residual_bound);
}

std::function<double(const Point&)> ExperimentConfig::g_function() const { return named_function(g); }

std::size_t ExperimentConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\ ") != std::string::npos)
    throw ConfigError("name must be non-empty without spaces or slashes");
  if (replicates < 1) throw ConfigError("replicates (M) must be >= 1");
  if (n_min < 16) throw ConfigError("n_min must be >= 16");
  if (n_hi < 10 * n_min) throw ConfigError("n_hi must be at least 10 * n_min");
  if (!(ratio > 1.0)) throw ConfigError("ratio must exceed 1");
  if (posterior_count < 1) throw ConfigError("posterior_count must be >= 1");
  if (batches < 2 || batches > posterior_count) throw ConfigError("batches must lie in [2, posterior_count]");
  if (!(window > 0.0 && window < 1.0)) throw ConfigError("window must lie in (0, 1)");
  if (level1_truncation < 1 || level1_truncation > 60) throw ConfigError("level1_truncation must lie in [1, 60]");
  if (level2_truncation < 1 || level2_truncation > 60) throw ConfigError("level2_truncation must lie in [1, 60]");
  if (anchors < 1) throw ConfigError("anchors must be >= 1");
  if (m.empty()) throw ConfigError("m needs at least one value");
  for (auto mm : m)
    if (mm < 1 || mm > 4) throw ConfigError("each m must lie in [1, 4]");
  if (model == ModelKind::Dirichlet && concentration.size() != 1 && concentration.size() != labels)
    throw ConfigError("concentration needs one value or one per label");
  if (!(moment_eps > 0.0)) throw ConfigError("moment_eps must be positive");
  if (slack < 0.0 || gini_slack < 0.0 || y_slack < 0.0) throw ConfigError("slacks must be nonnegative");
  if (!(min_coverage >= 0.0 && min_coverage <= 1.0) || !(min_merged >= 0.0 && min_merged <= 1.0))
    throw ConfigError("coverage thresholds must lie in [0, 1]");
  const auto mdl = make_model();
  validate_truncation(mdl);
  (void)rate_kind();
  (void)g_function();
  const auto ns = n_schedule();
  exm::rate(schedule(), static_cast<double>(ns.front()));
}

std::vector<std::size_t> geometric_schedule(std::size_t n_min, std::size_t n_hi, double ratio) {
  if (n_min < 1 || n_hi < n_min || !(ratio > 1.0)) throw ConfigError("invalid geometric schedule");
  std::vector<std::size_t> out{n_min};
  for (int k = 1;; ++k) {
    const double v = std::round(static_cast<double>(n_min) * std::pow(ratio, k));
    if (v >= static_cast<double>(n_hi)) break;
    const auto n = static_cast<std::size_t>(v);
    if (n > out.back()) out.push_back(n);
  }
  if (out.back() != n_hi) out.push_back(n_hi);
  return out;
}

std::function<double(const Point&)> named_function(std::string_view name) {
  if (name == "tanh") return [](const Point& x) { return std::tanh(x[0]); };
  if (name == "sin") return [](const Point& x) { return std::sin(x[0]); };
  if (name == "identity") return [](const Point& x) { return x[0]; };
  if (name == "square") return [](const Point& x) { return x[0] * x[0]; };
  if (name == "positive") return [](const Point& x) { return x[0] > 0.0 ? 1.0 : 0.0; };
  if (name == "constant") return [](const Point&) { return 1.0; };
  throw ConfigError("unknown function g = '" + std::string(name) + "'");
}

ExperimentConfig parse_config(std::istream& is) {
  ExperimentConfig c;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(std::string_view(t).substr(0, eq));
    const auto v = trim(std::string_view(t).substr(eq + 1));
    if (seen.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    seen[key] = lineno;
    try {
      if (key == "name") c.name = v;
      else if (key == "model") {
        if (v == "dirichlet") c.model = ModelKind::Dirichlet;
        else if (v == "dp") c.model = ModelKind::DP;
        else throw ConfigError("model must be dirichlet or dp");
      } else if (key == "labels") c.labels = to_size(key, v);
      else if (key == "concentration") {
        c.concentration.clear();
        for (const auto& item : split_list(v)) c.concentration.push_back(to_double(key, item));
      } else if (key == "alpha") c.alpha = to_double(key, v);
      else if (key == "base") {
        if (v == "normal") c.base = BaseKind::Normal;
        else if (v == "labels") c.base = BaseKind::Labels;
        else throw ConfigError("base must be normal or labels");
      } else if (key == "base_mean") c.base_mean = to_double(key, v);
      else if (key == "base_sd") c.base_sd = to_double(key, v);
      else if (key == "base_quadrature") c.base_quadrature = to_size(key, v);
      else if (key == "truncation") c.truncation = to_size(key, v);
      else if (key == "residual_bound") c.residual_bound = to_double(key, v);
      else if (key == "theorem") c.theorem = parse_theorem(v);
      else if (key == "rate") c.rate = v;
      else if (key == "seed") c.seed = to_uint(key, v);
      else if (key == "replicates") c.replicates = to_size(key, v);
      else if (key == "n_min") c.n_min = to_size(key, v);
      else if (key == "n_hi") c.n_hi = to_size(key, v);
      else if (key == "ratio") c.ratio = to_double(key, v);
      else if (key == "m") {
        c.m.clear();
        for (const auto& item : split_list(v)) c.m.push_back(to_size(key, item));
      } else if (key == "posterior_count") c.posterior_count = to_size(key, v);
      else if (key == "batches") c.batches = to_size(key, v);
      else if (key == "window") c.window = to_double(key, v);
      else if (key == "level1_truncation") c.level1_truncation = to_size(key, v);
      else if (key == "level2_truncation") c.level2_truncation = to_size(key, v);
      else if (key == "anchors") c.anchors = to_size(key, v);
      else if (key == "g") c.g = v;
      else if (key == "moment_eps") c.moment_eps = to_double(key, v);
      else if (key == "slack") c.slack = to_double(key, v);
      else if (key == "gini_slack") c.gini_slack = to_double(key, v);
      else if (key == "y_slack") c.y_slack = to_double(key, v);
      else if (key == "min_coverage") c.min_coverage = to_double(key, v);
      else if (key == "min_merged") c.min_merged = to_double(key, v);
      else if (key == "workers") c.workers = to_size(key, v);
      else if (key == "output") c.output = v;
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace exm
