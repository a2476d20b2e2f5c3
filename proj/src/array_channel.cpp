#include "xlmimo/array_channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace xlmimo {

void ArrayConfig::validate() const {
  if (num_antennas < 1) throw std::invalid_argument("num_antennas must be >= 1");
  if (!(element_spacing > 0.0)) throw std::invalid_argument("element_spacing must be > 0");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  if (!(ref_power > 0.0)) throw std::invalid_argument("ref_power must be > 0");
  if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be > 0");
  if (!(tx_power > 0.0)) throw std::invalid_argument("tx_power must be > 0");
}

ArrayConfig ArrayConfig::with_snr_db(std::size_t num_antennas, double snr_db,
                                     double element_spacing) {
  ArrayConfig cfg;
  cfg.num_antennas = num_antennas;
  cfg.element_spacing = element_spacing;
  cfg.wavelength = 2.0 * element_spacing;
  cfg.ref_power = 1.0;
  cfg.noise_power = cfg.ref_power * std::pow(10.0, -snr_db / 10.0);
  cfg.tx_power = 1.0;
  return cfg;
}

void UserPosition::validate() const {
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw std::invalid_argument("user distance must be positive and finite, got " +
                                std::to_string(distance));
  }
  if (!(std::abs(angle) < std::numbers::pi / 2)) {
    throw std::invalid_argument("user angle must lie in (-pi/2, pi/2), got " +
                                std::to_string(angle));
  }
}

std::string_view to_string(ChannelModel model) {
  return model == ChannelModel::kSpherical ? "sw" : "pw";
}

ChannelModel parse_channel_model(std::string_view text) {
  if (text == "sw") return ChannelModel::kSpherical;
  if (text == "pw") return ChannelModel::kPlane;
  throw std::invalid_argument("unknown channel model '" + std::string(text) + "'");
}

namespace {

// Squared distance normalized by r^2: 1 - 2 m d_k sin(theta) + (m d_k)^2.
double distance_unchecked(const UserPosition& user, double spacing, double m) {
  const double dk = spacing / user.distance;
  const double md = m * dk;
  return user.distance * std::sqrt(1.0 - 2.0 * md * std::sin(user.angle) + md * md);
}

}  // namespace

double element_distance(const UserPosition& user, const ArrayConfig& cfg, double m) {
  user.validate();
  const double half = 0.5 * static_cast<double>(cfg.num_antennas - 1);
  const double pos = m + half;
  if (!(pos >= -1e-9 && pos <= 2.0 * half + 1e-9) || std::abs(pos - std::round(pos)) > 1e-9) {
    throw std::invalid_argument("element index " + std::to_string(m) +
                                " is not on the array grid");
  }
  return distance_unchecked(user, cfg.element_spacing, m);
}

CVector steering_vector_sw(const UserPosition& user, const ArrayConfig& cfg) {
  user.validate();
  const std::size_t M = cfg.num_antennas;
  const double amp = std::sqrt(cfg.ref_power);
  const double k0 = 2.0 * std::numbers::pi / cfg.wavelength;
  CVector a(static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const double r = distance_unchecked(user, cfg.element_spacing, cfg.element_index(i));
    a[static_cast<Eigen::Index>(i)] = std::polar(amp / r, -k0 * r);
  }
  return a;
}

CVector steering_vector_pw(const UserPosition& user, const ArrayConfig& cfg) {
  user.validate();
  const std::size_t M = cfg.num_antennas;
  const double amp = std::sqrt(cfg.ref_power) / user.distance;
  const double k0 = 2.0 * std::numbers::pi / cfg.wavelength;
  const double s = std::sin(user.angle);
  CVector a(static_cast<Eigen::Index>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const double path = user.distance - cfg.element_index(i) * cfg.element_spacing * s;
    a[static_cast<Eigen::Index>(i)] = std::polar(amp, -k0 * path);
  }
  return a;
}

CVector steering_vector(const UserPosition& user, const ArrayConfig& cfg, ChannelModel model) {
  return model == ChannelModel::kSpherical ? steering_vector_sw(user, cfg)
                                           : steering_vector_pw(user, cfg);
}

double critical_distance(const ArrayConfig& cfg) {
  return 9.0 * static_cast<double>(cfg.num_antennas) * cfg.element_spacing;
}

ChannelSet build_channels(std::span<const UserPosition> users, const ArrayConfig& cfg,
                          ChannelModel model) {
  cfg.validate();
  ChannelSet set;
  set.model = model;
  set.users.assign(users.begin(), users.end());
  set.matrix.resize(static_cast<Eigen::Index>(cfg.num_antennas),
                    static_cast<Eigen::Index>(users.size()));
  for (std::size_t k = 0; k < users.size(); ++k) {
    set.matrix.col(static_cast<Eigen::Index>(k)) = steering_vector(users[k], cfg, model);
  }
  return set;
}

}  // namespace xlmimo
