#include "xlmimo/power_alloc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xlmimo {

PowerAllocation waterfill(std::span<const double> gains, double noise, double budget) {
  if (gains.empty()) throw std::invalid_argument("waterfill: empty gain list");
  if (!(noise > 0.0)) throw std::invalid_argument("waterfill: noise must be > 0");
  if (!(budget > 0.0)) throw std::invalid_argument("waterfill: budget must be > 0");
  for (double g : gains) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw std::invalid_argument("waterfill: gains must be positive and finite");
    }
  }

  const std::size_t n = gains.size();
  std::vector<double> floor(n);
  for (std::size_t k = 0; k < n; ++k) floor[k] = noise / gains[k];
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return floor[a] < floor[b]; });

  double prefix = 0.0;
  for (std::size_t k : order) prefix += floor[k];

  std::size_t active = n;
  double mu = (budget + prefix) / static_cast<double>(active);
  while (active > 1 && mu <= floor[order[active - 1]]) {
    prefix -= floor[order[active - 1]];
    --active;
    mu = (budget + prefix) / static_cast<double>(active);
  }

  PowerAllocation out;
  out.water_level = mu;
  out.powers.assign(n, 0.0);
  if (active == 1) {
    out.powers[order[0]] = budget;
    return out;
  }
  for (std::size_t i = 0; i < active; ++i) {
    const std::size_t k = order[i];
    out.powers[k] = mu - floor[k];
  }
  return out;
}

double separable_rate(std::span<const double> gains, std::span<const double> powers,
                      double noise) {
  if (gains.size() != powers.size()) throw std::invalid_argument("gain/power size mismatch");
  double rate = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) rate += std::log2(1.0 + powers[k] * gains[k] / noise);
  return rate;
}

}  // namespace xlmimo
