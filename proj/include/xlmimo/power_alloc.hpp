#pragma once

#include <span>
#include <vector>

namespace xlmimo {

struct PowerAllocation {
  std::vector<double> powers;  // W, same order as the input gains
  double water_level = 0.0;    // mu
};

// Waterfilling over effective gains: maximizes sum log2(1 + p_k g_k / noise)
// subject to sum p_k = budget. Exact finite algorithm: users are sorted by
// noise/g ascending and the weakest is dropped while the implied water level
// does not exceed its floor.
//
// Throws std::invalid_argument for an empty gain list, a nonpositive gain,
// noise or budget.
PowerAllocation waterfill(std::span<const double> gains, double noise, double budget);

// sum_k log2(1 + p_k g_k / noise), the interference-free rate of a ZF set.
double separable_rate(std::span<const double> gains, std::span<const double> powers,
                      double noise);

}  // namespace xlmimo
