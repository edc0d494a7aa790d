#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "exmerge/measure.hpp"
#include "exmerge/rng.hpp"

namespace exm {

struct OracleItem {
  std::string name;
  std::size_t cases = 0;
  double worst = 0.0;  // largest discrepancy or violation seen
  double tolerance = 0.0;
  bool passed() const { return worst <= tolerance; }
};

struct OracleCounts {
  std::size_t equivalence_pairs = 500;
  std::size_t axiom_triples = 300;
  std::size_t chain_pairs = 300;
  std::size_t max_atoms = 8;
};

/// Cross-checks between independent routes to the same metric values:
/// flow vs subset-enumeration Prokhorov, CDF vs transport-LP first-order cost,
/// metric axioms for P, G1, G2, FM and dW, and P <= sqrt(1.5 FM), FM <= G1.
std::vector<OracleItem> run_oracle_checks(std::uint64_t seed, const OracleCounts& counts = {});

/// Random finite-support measure with 1..max_atoms atoms. Real-line atoms are
/// drawn on a coarse grid half the time so that ties and equal gaps occur.
DiscreteMeasure random_measure(const GroundSpace& space, std::size_t max_atoms, Engine& eng);

/// Finite labeled space whose distances come from random points in the plane.
GroundSpace random_finite_space(std::size_t labels, Engine& eng);

}  // namespace exm
