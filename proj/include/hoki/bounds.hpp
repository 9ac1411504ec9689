#pragma once

#include <cstdint>

namespace hoki {

/// Inputs of the high-probability calibration-error bound.
struct BoundQuery {
  double ece_z = 0.0;     // observed test-set ECE, in [0, 1]
  std::size_t bins = 15;  // J
  std::uint64_t n = 1;    // test-set size
  double delta = 0.05;    // failure probability, in (0, 1]
};

/// Additive slack of the bound: (J * sqrt(2) / sqrt(N)) * sqrt(2 ln 2 - ln delta).
/// Strictly positive, decreasing in N, increasing in J and in 1/delta.
double ce_slack(std::size_t bins, std::uint64_t n, double delta);

/// With probability at least 1 - delta the true calibration error is at most
/// ece_z + ce_slack(J, N, delta).
double ce_bound(const BoundQuery& query);

/// Smallest N whose slack term is <= slack (for experiment sizing).
std::uint64_t n_for_slack(double slack, std::size_t bins, double delta);

}  // namespace hoki
