#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "exmerge/error.hpp"
#include "exmerge/harness.hpp"
#include "exmerge/metrics.hpp"
#include "exmerge/oracle.hpp"
#include "exmerge/rates.hpp"

namespace py = pybind11;
using namespace exm;

namespace {

py::dict to_dict(const ExperimentResult& r) {
  py::list trajectories;
  for (const auto& t : r.trajectories) {
    py::list rows;
    for (const auto& row : t.rows) {
      py::dict d;
      d["n"] = row.n;
      d["rate"] = row.rate;
      d["raw"] = row.raw;
      d["normalized"] = row.normalized;
      for (std::size_t i = 0; i < r.extra_columns.size(); ++i) d[py::str(r.extra_columns[i])] = row.extra[i];
      rows.append(d);
    }
    py::dict bounds;
    for (std::size_t i = 0; i < r.bound_columns.size(); ++i) bounds[py::str(r.bound_columns[i])] = t.bounds[i];
    py::dict td;
    td["replicate"] = t.replicate;
    td["rows"] = rows;
    td["bounds"] = bounds;
    td["threshold"] = t.threshold;
    trajectories.append(td);
  }
  py::list checks;
  for (const auto& c : r.checks) checks.append(py::make_tuple(c.name, c.passed, c.detail));
  py::dict out;
  out["experiment"] = r.experiment;
  out["trajectories"] = trajectories;
  out["checks"] = checks;
  out["window"] = py::make_tuple(r.window_lo, r.window_hi);
  out["coverage"] = r.trajectories.empty() ? py::none() : py::cast(coverage(r));
  out["merged"] = r.trajectories.empty() ? py::none() : py::cast(merging_fraction(r));
  out["failure"] = r.failure ? py::cast(*r.failure) : py::none();
  return out;
}

ExperimentConfig config_from(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Merging rates of posterior and predictive laws for exchangeable sequences";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<ResourceLimit>(m, "ResourceLimit", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<Unsupported>(m, "Unsupported", base.ptr());

  py::class_<GroundSpace>(m, "GroundSpace")
      .def_static("real_line", &GroundSpace::real_line)
      .def_static("euclidean", &GroundSpace::euclidean, py::arg("dim"))
      .def_static("finite", &GroundSpace::finite, py::arg("labels"), py::arg("distance"))
      .def_static("discrete", py::overload_cast<std::size_t>(&GroundSpace::discrete), py::arg("k"))
      .def_static("from_description", &GroundSpace::from_description)
      .def_property_readonly("is_finite", &GroundSpace::is_finite)
      .def_property_readonly("labels", [](const GroundSpace& s) { return s.is_finite() ? s.labels() : std::vector<std::string>{}; })
      .def("distance", [](const GroundSpace& s, const Point& a, const Point& b) { return s.distance(a, b); })
      .def("describe", &GroundSpace::describe)
      .def("__eq__", &GroundSpace::operator==)
      .def("__repr__", [](const GroundSpace& s) { return "GroundSpace(" + s.describe() + ")"; });

  py::class_<DiscreteMeasure>(m, "Measure")
      .def(py::init<GroundSpace, std::vector<Point>, std::vector<double>>(), py::arg("space"), py::arg("atoms"),
           py::arg("weights"))
      .def(py::init([](std::vector<double> xs, std::vector<double> ws) {
             std::vector<Point> atoms;
             for (double x : xs) atoms.push_back({x});
             return DiscreteMeasure(GroundSpace::real_line(), std::move(atoms), std::move(ws));
           }),
           py::arg("atoms"), py::arg("weights"))
      .def_static("dirac", &DiscreteMeasure::dirac)
      .def_static("on_labels",
                  [](GroundSpace s, std::vector<double> w) { return DiscreteMeasure::on_labels(std::move(s), w); })
      .def_property_readonly("space", &DiscreteMeasure::space)
      .def_property_readonly("atoms", &DiscreteMeasure::atoms)
      .def_property_readonly("weights", &DiscreteMeasure::weights)
      .def("__len__", &DiscreteMeasure::size)
      .def("__eq__", [](const DiscreteMeasure& a, const DiscreteMeasure& b) { return a == b; })
      .def("expectation", &DiscreteMeasure::expectation)
      .def("to_text",
           [](const DiscreteMeasure& mu) {
             std::ostringstream os;
             write_measure(os, mu);
             return os.str();
           })
      .def_static("from_text", [](const std::string& text) {
        std::istringstream is(text);
        return read_measure(is);
      });

  py::class_<SolverBudget>(m, "SolverBudget").def(py::init<>());

  m.def("empirical", [](const std::vector<Point>& xs, const GroundSpace& s) { return empirical(xs, s); });
  m.def("w1_real", &w1_real);
  m.def("ot_cost", &ot_cost, py::arg("mu"), py::arg("nu"), py::arg("p") = 1.0, py::arg("budget") = SolverBudget{});
  m.def("prokhorov", &prokhorov, py::arg("mu"), py::arg("nu"), py::arg("budget") = SolverBudget{});
  m.def("prokhorov_bruteforce", &prokhorov_bruteforce, py::arg("mu"), py::arg("nu"),
        py::arg("budget") = SolverBudget{});
  m.def("fortet_mourier", &fortet_mourier, py::arg("mu"), py::arg("nu"), py::arg("budget") = SolverBudget{});
  m.def(
      "dW",
      [](const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::size_t truncation) {
        const auto cls = DeterminingClass::covering({mu, nu}, truncation);
        const auto v = dW(mu, nu, cls);
        return py::make_tuple(v.value, v.tail_bound);
      },
      py::arg("mu"), py::arg("nu"), py::arg("truncation") = 24,
      "Determining-class distance and its truncation tail bound.");

  m.def("rate", [](const std::string& kind, double n, std::size_t n_min) {
    return rate(RateSchedule{parse_rate_kind(kind), n_min}, n);
  }, py::arg("kind"), py::arg("n"), py::arg("n_min") = 16);
  m.def("gini_bound", py::overload_cast<const DiscreteMeasure&>(&gini_bound));
  m.def("moment_bound", &moment_bound, py::arg("mu"), py::arg("eps") = 1.0);
  m.def(
      "pi_r",
      [](const DiscreteMeasure& p, double r, std::size_t max_level) {
        const auto rep = pi_r(p, r, max_level);
        return py::make_tuple(rep.value, rep.warning);
      },
      py::arg("p"), py::arg("r"), py::arg("max_level") = 64);
  m.def(
      "y_estimator",
      [](const std::vector<std::size_t>& ns, const std::vector<double>& d, double window) {
        return y_estimator(ns, d, window).value;
      },
      py::arg("ns"), py::arg("distances"), py::arg("window") = 0.1);

  m.def("oracle_check", [](std::uint64_t seed) {
    py::list out;
    for (const auto& it : run_oracle_checks(seed))
      out.append(py::make_tuple(it.name, it.cases, it.worst, it.passed()));
    return out;
  }, py::arg("seed") = 1);

  m.def(
      "simulate",
      [](const std::string& cfg) {
        const auto c = config_from(cfg);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_simulation(c);
        }
        return to_dict(r);
      },
      py::arg("config_text"));
  m.def(
      "posterior_rate",
      [](const std::string& cfg, const std::string& theorem) {
        auto c = config_from(cfg);
        if (!theorem.empty()) c.theorem = parse_theorem(theorem);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_posterior_rate(c);
          add_acceptance_checks(r, c, true);
        }
        return to_dict(r);
      },
      py::arg("config_text"), py::arg("theorem") = "");
  m.def(
      "predictive_rate",
      [](const std::string& cfg) {
        const auto c = config_from(cfg);
        std::vector<ExperimentResult> rs;
        {
          py::gil_scoped_release release;
          rs = run_predictive_rate(c);
          for (auto& r : rs) add_acceptance_checks(r, c, true);
        }
        py::list out;
        for (const auto& r : rs) out.append(to_dict(r));
        return out;
      },
      py::arg("config_text"));
  m.def(
      "empirical_bayes",
      [](const std::string& cfg) {
        const auto c = config_from(cfg);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_empirical_bayes(c);
          add_acceptance_checks(r, c, false);
        }
        return to_dict(r);
      },
      py::arg("config_text"));
}
