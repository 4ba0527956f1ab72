#include "unipid/pseudoobs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace unipid {

void Dataset::validate() const {
  if (y.size() != x1.size() || y.size() != x2.size())
    throw std::invalid_argument("Dataset: column length mismatch");
  if (y.size() < 50)
    throw std::invalid_argument("Dataset: need at least 50 observations, got " +
                                std::to_string(y.size()));
  for (const auto* col : {&y, &x1, &x2})
    for (double v : *col)
      if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite entry");
}

std::vector<double> rank_to_unit(const std::vector<double>& column) {
  const std::size_t d = column.size();
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });

  std::vector<double> u(d);
  const double scale = 1.0 / (static_cast<double>(d) + 1.0);
  std::size_t i = 0;
  while (i < d) {
    std::size_t j = i;
    while (j + 1 < d && column[order[j + 1]] == column[order[i]]) ++j;
    // 1-based ranks i+1 .. j+1 share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) u[order[k]] = avg_rank * scale;
    i = j + 1;
  }
  return u;
}

PseudoDataset pseudo_observations(const Dataset& data) {
  data.validate();
  PseudoDataset p;
  p.u_y = rank_to_unit(data.y);
  p.u_1 = rank_to_unit(data.x1);
  p.u_2 = rank_to_unit(data.x2);
  return p;
}

}  // namespace unipid
