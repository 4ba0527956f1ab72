#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace unipid {

// Raw trivariate observations. The estimator refuses fewer than 50 rows.
struct Dataset {
  std::vector<double> y, x1, x2;

  std::size_t size() const { return y.size(); }
  /// Throws std::invalid_argument on length mismatch, non-finite entries or
  /// fewer than 50 rows.
  void validate() const;
};

// Observations mapped to the unit cube via per-column empirical CDFs,
// u = rank / (D + 1) with average ranks for ties. Strictly interior.
struct PseudoDataset {
  std::vector<double> u_y, u_1, u_2;
  std::size_t size() const { return u_y.size(); }
};

/// Rank-transform one column: rank / (D + 1), ties get average ranks.
std::vector<double> rank_to_unit(const std::vector<double>& column);

PseudoDataset pseudo_observations(const Dataset& data);

}  // namespace unipid
