#pragma once

// Near-field power concentration and the far-field interference kernel
// between a near user k (at broadside, theta_k = 0) and a farther user j.
//
// For a near user most of the channel power lands on a few central
// elements (the effective aperture M'). Over those elements the far-field
// approximation holds and the MRT interference leaked towards angle
// theta_j is a Dirichlet kernel
//
//   i(theta_j) = beta_0 / (||a_k|| r_k r_j) * |sin(pi d M' s / lambda) / sin(pi d s / lambda)|,
//
// with s = sin(theta_j). Its zeros split [0, pi/2] into partitions A_q,
// from which an analytic estimate of P{i(theta_j) < alpha} is built and
// checked against Monte-Carlo sampling.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xlmimo/array_channel.hpp"

namespace xlmimo {

// phi = atan((Md - 2r sin t) / (2r cos t)) + atan((Md + 2r sin t) / (2r cos t)),
// the angle subtended by the array at the user, in [0, pi].
double aperture_phi(const UserPosition& user, const ArrayConfig& cfg);

// Storage index of the element closest to the user.
std::size_t nearest_element(const UserPosition& user, const ArrayConfig& cfg);

// Ratio between the mean per-element power ||a||^2 / M (closed form
// beta_0 phi / (M r d cos t)) and the strongest element power beta_0 / r_{k,n}^2.
double concentration_metric(const UserPosition& user, const ArrayConfig& cfg);

// Smallest odd number of strongest elements holding at least `fraction` of
// ||a||^2 under the spherical model. Capped at the largest odd count <= M.
std::size_t effective_aperture(const UserPosition& user, const ArrayConfig& cfg,
                               double fraction = 0.95);

struct KernelGeometry {
  double near_distance = 1.0;   // r_k
  double far_distance = 2.0;    // r_j
  std::size_t m_prime = 1;      // odd
  double near_norm = 1.0;       // ||a_k||

  // beta_0 / (||a_k|| r_k r_j)
  double scale(const ArrayConfig& cfg) const;
};

// Geometry with ||a_k|| taken from the full spherical array response of a
// broadside user at distance r_k.
KernelGeometry make_kernel_geometry(double near_distance, double far_distance,
                                    std::size_t m_prime, const ArrayConfig& cfg);

// |sin(N x) / sin(x)| with the removable singularities at x = k pi
// evaluated by their analytic limit.
double dirichlet_magnitude(std::size_t n, double x);

double interference_kernel(double theta_j, const KernelGeometry& geometry, const ArrayConfig& cfg);

struct PartitionRow {
  std::size_t q = 0;
  double lower = 0.0;           // l_{q,L}
  double upper = 0.0;           // l_{q,U}
  double crossing_lower = 0.0;  // phi_{q,L}
  double crossing_upper = 0.0;  // phi_{q,U}
  bool clamped = false;         // alpha' sin(pi q / M') >= 1: whole partition counted
};

struct PartitionTable {
  std::vector<PartitionRow> rows;
  double alpha_prime = 0.0;
  // The denominator bound behind the crossing angles assumes d / lambda = 1/2.
  bool spacing_supported = true;
};

// Rows q = 0 .. (M'-3)/2. Throws std::invalid_argument for even M' or M' < 3,
// alpha <= 0, or spacing/wavelength combinations that push partition
// boundaries past pi/2.
PartitionTable partition_table(double alpha, const KernelGeometry& geometry, const ArrayConfig& cfg);

// Symmetric uniform law for theta_j on [-half_width, half_width].
struct AngleModel {
  double half_width = 1.5707963267948966;

  static AngleModel full() { return {}; }
  static AngleModel quarter() { return {0.7853981633974483}; }

  void validate() const;
  // P{theta in [lo, hi]} for 0 <= lo <= hi.
  double probability(double lo, double hi) const;
  double sample(double unit) const { return (2.0 * unit - 1.0) * half_width; }
};

// 2 * sum_q (P{theta in [l_qL, phi_qL]} + P{theta in [phi_qU, l_qU]}),
// capped at 1. Returns 0 for M' = 1 (no partitions).
double semiorth_prob_bound(double alpha, const KernelGeometry& geometry, const ArrayConfig& cfg,
                           const AngleModel& angles = {});

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

inline constexpr std::size_t kMinMonteCarloSamples = 10000;
inline constexpr std::size_t kMonteCarloShards = 16;

// Fraction of theta_j draws with i(theta_j) < alpha, with its binomial
// standard error. Samples are split over kMonteCarloShards fixed substreams
// keyed by (seed, shard), so the estimate does not depend on `workers`.
MonteCarloEstimate semiorth_prob_mc(double alpha, const KernelGeometry& geometry,
                                    const ArrayConfig& cfg, const AngleModel& angles,
                                    std::size_t samples, std::uint64_t seed,
                                    std::size_t workers = 1);

}  // namespace xlmimo
