#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exmerge/measure.hpp"

namespace exm {

enum class RateKind { SqrtNOverLogLog, NOverLogQuarter, NOverLogEighth };

std::string_view rate_name(RateKind kind);
RateKind parse_rate_kind(std::string_view name);

struct RateSchedule {
  RateKind kind = RateKind::SqrtNOverLogLog;
  std::size_t n_min = 16;
};

/// b_n without the schedule's lower limit. Throws InvalidInput outside the
/// domain where b_n is positive (n > e^e for the loglog kind, n > 1 otherwise).
double rate_value(RateKind kind, double n);
/// b_n for n >= schedule.n_min.
double rate(const RateSchedule& schedule, double n);

struct BoundReport {
  std::string constant_name;
  double value = 0.0;
  bool per_replicate = false;
  bool warning = false;
  std::string note;
};

/// int sqrt(2 F (1 - F)) dx for the step CDF of mu, summed exactly gap by gap.
double gini_bound(const DiscreteMeasure& mu);

/// Trapezoid rule with step h for a numeric CDF on [lo, hi]. Warns when the
/// integrand has not decayed at either end of the grid.
BoundReport gini_bound(const std::function<double(double)>& F, double lo, double hi, double h);

/// (8 int (|x| + |x|^(2+eps) / (2+eps)) dmu)^(1/2).
double moment_bound(const DiscreteMeasure& mu, double eps);

struct PiRReport {
  double value = 0.0;
  std::vector<std::size_t> schedule;  // partition levels m visited
  std::vector<double> sums;           // partition sum at each level
  bool warning = false;
};

/// sum_A [p(A)(1 - p(A))]^(1/r) along refining partitions. On finite spaces
/// every label is its own cell and the value is exact. On R^d level m covers
/// [-m, m]^d by cubes of diameter <= 1/m plus the complement; the value is
/// the minimum over the trailing half of the levels, reported with the schedule.
PiRReport pi_r(const DiscreteMeasure& p, double r, std::size_t max_level = 64);

/// Plug-in estimate (1.5 * max_{n in window} sqrt(n / log n) d_n)^(1/2) over
/// the trailing window [window * n_hi, n_hi].
BoundReport y_estimator(std::span<const std::size_t> ns, std::span<const double> distances,
                        double window = 0.1);

}  // namespace exm
