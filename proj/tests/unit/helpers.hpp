#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "exmerge/measure.hpp"

namespace testing_helpers {

// Random measure on the real line with atoms on a half-integer grid (ties likely)
// or continuous in [-3, 3].
inline exm::DiscreteMeasure random_line_measure(std::mt19937_64& rng, std::size_t max_atoms, bool grid) {
  std::uniform_int_distribution<std::size_t> k(1, max_atoms);
  std::uniform_int_distribution<int> cell(-6, 6);
  std::uniform_real_distribution<double> x(-3.0, 3.0);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  const std::size_t n = k(rng);
  std::vector<exm::Point> atoms;
  std::vector<double> weights;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    atoms.push_back({grid ? 0.5 * cell(rng) : x(rng)});
    weights.push_back(w(rng));
    total += weights.back();
  }
  for (double& v : weights) v /= total;
  return exm::DiscreteMeasure(exm::GroundSpace::real_line(), atoms, weights);
}

inline exm::DiscreteMeasure random_label_measure(std::mt19937_64& rng, const exm::GroundSpace& space) {
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<double> weights(space.label_count());
  double total = 0.0;
  for (double& v : weights) {
    v = w(rng) < 0.3 ? 0.0 : w(rng);
    total += v;
  }
  if (total == 0.0) {
    weights[0] = 1.0;
    total = 1.0;
  }
  for (double& v : weights) v /= total;
  return exm::DiscreteMeasure::on_labels(space, weights);
}

}  // namespace testing_helpers
