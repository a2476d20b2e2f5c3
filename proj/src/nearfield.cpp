#include "xlmimo/nearfield.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "xlmimo/random.hpp"

namespace xlmimo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_odd(std::size_t m_prime, std::size_t minimum) {
  if (m_prime % 2 == 0 || m_prime < minimum) {
    throw std::invalid_argument("effective aperture must be odd and >= " +
                                std::to_string(minimum) + ", got " + std::to_string(m_prime));
  }
}

}  // namespace

double aperture_phi(const UserPosition& user, const ArrayConfig& cfg) {
  user.validate();
  const double length = static_cast<double>(cfg.num_antennas) * cfg.element_spacing;
  const double s = std::sin(user.angle);
  const double c = std::cos(user.angle);
  const double r = user.distance;
  return std::atan((length - 2.0 * r * s) / (2.0 * r * c)) +
         std::atan((length + 2.0 * r * s) / (2.0 * r * c));
}

std::size_t nearest_element(const UserPosition& user, const ArrayConfig& cfg) {
  const double half = 0.5 * static_cast<double>(cfg.num_antennas - 1);
  const double pos = std::round(user.distance * std::sin(user.angle) / cfg.element_spacing + half);
  return static_cast<std::size_t>(std::clamp(pos, 0.0, 2.0 * half));
}

double concentration_metric(const UserPosition& user, const ArrayConfig& cfg) {
  cfg.validate();
  const double m = cfg.element_index(nearest_element(user, cfg));
  const double closest = element_distance(user, cfg, m);
  return closest * closest * aperture_phi(user, cfg) /
         (static_cast<double>(cfg.num_antennas) * user.distance * cfg.element_spacing *
          std::cos(user.angle));
}

std::size_t effective_aperture(const UserPosition& user, const ArrayConfig& cfg, double fraction) {
  cfg.validate();
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("aperture fraction must lie in (0, 1)");
  }
  const CVector a = steering_vector_sw(user, cfg);
  std::vector<double> power(static_cast<std::size_t>(a.size()));
  for (Eigen::Index i = 0; i < a.size(); ++i) power[static_cast<std::size_t>(i)] = std::norm(a[i]);
  std::sort(power.begin(), power.end(), std::greater<>());
  double total = 0.0;
  for (double p : power) total += p;

  std::size_t count = 0;
  double captured = 0.0;
  while (count < power.size() && captured < fraction * total) captured += power[count++];
  if (count % 2 == 0) ++count;
  const std::size_t max_odd = cfg.num_antennas % 2 == 1 ? cfg.num_antennas : cfg.num_antennas - 1;
  return std::min(std::max<std::size_t>(count, 1), max_odd);
}

double KernelGeometry::scale(const ArrayConfig& cfg) const {
  return cfg.ref_power / (near_norm * near_distance * far_distance);
}

KernelGeometry make_kernel_geometry(double near_distance, double far_distance,
                                    std::size_t m_prime, const ArrayConfig& cfg) {
  cfg.validate();
  require_odd(m_prime, 1);
  if (!(near_distance > 0.0) || !(far_distance > near_distance)) {
    throw std::invalid_argument("kernel geometry needs 0 < r_k < r_j");
  }
  KernelGeometry g;
  g.near_distance = near_distance;
  g.far_distance = far_distance;
  g.m_prime = m_prime;
  g.near_norm = steering_vector_sw(UserPosition{near_distance, 0.0}, cfg).norm();
  return g;
}

double dirichlet_magnitude(std::size_t n, double x) {
  const double nn = static_cast<double>(n);
  const double eps = x - kPi * std::round(x / kPi);
  if (std::abs(nn * eps) < 1e-4) {
    // sin(n e) / sin(e) = n (1 - (n^2 - 1) e^2 / 6 + O(n^4 e^4))
    return nn * (1.0 - (nn * nn - 1.0) * eps * eps / 6.0);
  }
  return std::abs(std::sin(nn * x) / std::sin(x));
}

double interference_kernel(double theta_j, const KernelGeometry& geometry, const ArrayConfig& cfg) {
  const double x = kPi * cfg.element_spacing * std::sin(theta_j) / cfg.wavelength;
  return geometry.scale(cfg) * dirichlet_magnitude(geometry.m_prime, x);
}

PartitionTable partition_table(double alpha, const KernelGeometry& geometry, const ArrayConfig& cfg) {
  cfg.validate();
  require_odd(geometry.m_prime, 3);
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  const double mp = static_cast<double>(geometry.m_prime);
  const double step = cfg.wavelength / (cfg.element_spacing * mp);
  const std::size_t last = (geometry.m_prime - 3) / 2;
  if (step * static_cast<double>(last + 1) > 1.0) {
    throw std::invalid_argument("partition boundaries exceed pi/2 for this spacing/wavelength");
  }

  PartitionTable table;
  table.alpha_prime = alpha / geometry.scale(cfg);
  table.spacing_supported = std::abs(cfg.element_spacing / cfg.wavelength - 0.5) < 1e-12;
  table.rows.reserve(last + 1);
  for (std::size_t q = 0; q <= last; ++q) {
    const double qd = static_cast<double>(q);
    PartitionRow row;
    row.q = q;
    row.lower = std::asin(step * qd);
    row.upper = std::asin(step * (qd + 1.0));
    const double level = table.alpha_prime * std::sin(kPi * qd / mp);
    row.clamped = level >= 1.0;
    const double offset = std::asin(std::min(level, 1.0)) / kPi;
    row.crossing_lower = std::asin(step * (qd + offset));
    row.crossing_upper = std::asin(step * (qd + 1.0 - offset));
    table.rows.push_back(row);
  }
  return table;
}

void AngleModel::validate() const {
  if (!(half_width > 0.0 && half_width <= kPi / 2 + 1e-15)) {
    throw std::invalid_argument("angle model half-width must lie in (0, pi/2]");
  }
}

double AngleModel::probability(double lo, double hi) const {
  const double a = std::clamp(lo, 0.0, half_width);
  const double b = std::clamp(hi, 0.0, half_width);
  return std::max(0.0, b - a) / (2.0 * half_width);
}

double semiorth_prob_bound(double alpha, const KernelGeometry& geometry, const ArrayConfig& cfg,
                           const AngleModel& angles) {
  angles.validate();
  require_odd(geometry.m_prime, 1);
  if (geometry.m_prime == 1) return 0.0;
  const PartitionTable table = partition_table(alpha, geometry, cfg);
  double half = 0.0;
  for (const PartitionRow& row : table.rows) {
    half += angles.probability(row.lower, row.crossing_lower) +
            angles.probability(row.crossing_upper, row.upper);
  }
  return std::min(1.0, 2.0 * half);
}

MonteCarloEstimate semiorth_prob_mc(double alpha, const KernelGeometry& geometry,
                                    const ArrayConfig& cfg, const AngleModel& angles,
                                    std::size_t samples, std::uint64_t seed,
                                    std::size_t workers) {
  angles.validate();
  cfg.validate();
  if (samples == 0) throw std::invalid_argument("Monte-Carlo needs at least one sample");
  if (samples < kMinMonteCarloSamples) {
    throw std::invalid_argument("Monte-Carlo needs at least " +
                                std::to_string(kMinMonteCarloSamples) + " samples");
  }

  std::vector<std::size_t> hits(kMonteCarloShards, 0);
  auto run_shard = [&](std::size_t shard) {
    const std::size_t count =
        samples / kMonteCarloShards + (shard < samples % kMonteCarloShards ? 1 : 0);
    KeyedStream stream{seed, shard, 0x6b65726e656cULL};
    std::size_t local = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (interference_kernel(angles.sample(stream.uniform()), geometry, cfg) < alpha) ++local;
    }
    hits[shard] = local;
  };

  workers = std::clamp<std::size_t>(workers, 1, kMonteCarloShards);
  if (workers == 1) {
    for (std::size_t s = 0; s < kMonteCarloShards; ++s) run_shard(s);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t s = next++; s < kMonteCarloShards; s = next++) run_shard(s);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::size_t total = 0;
  for (std::size_t h : hits) total += h;
  MonteCarloEstimate out;
  out.samples = samples;
  out.estimate = static_cast<double>(total) / static_cast<double>(samples);
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
  return out;
}

}  // namespace xlmimo
