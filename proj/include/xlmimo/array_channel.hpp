#pragma once

// Uniform linear array geometry and spherical/plane-wave array responses.
//
// The array lies on the ordinate axis, centered at the origin. Element i in
// {0, ..., M-1} sits at y_i = d * (i - (M-1)/2); the signed index
// m = i - (M-1)/2 is therefore half-integer when M is even. Users are
// described by polar coordinates (r, theta) where theta is measured from the
// abscissa (broadside).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace xlmimo {

using cd = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

struct ArrayConfig {
  std::size_t num_antennas = 256;
  double element_spacing = 0.0628;  // m
  double wavelength = 0.1256;       // m
  double ref_power = 1.0;           // beta_0, channel power at 1 m
  double noise_power = 1.0;         // W
  double tx_power = 1.0;            // W

  // Throws std::invalid_argument if any field is out of range.
  void validate() const;

  // Signed element index m for storage index i.
  double element_index(std::size_t i) const {
    return static_cast<double>(i) - 0.5 * static_cast<double>(num_antennas - 1);
  }

  // Half-wavelength defaults with sigma^2 = beta_0 * 10^(-snr/10), P_TX = 1.
  static ArrayConfig with_snr_db(std::size_t num_antennas, double snr_db,
                                 double element_spacing = 0.0628);
};

struct UserPosition {
  double distance = 1.0;  // m, > 0
  double angle = 0.0;     // rad, |angle| < pi/2

  void validate() const;
};

enum class ChannelModel { kSpherical, kPlane };

std::string_view to_string(ChannelModel model);
ChannelModel parse_channel_model(std::string_view text);

// Distance between the user and the element with signed index m. The index
// must lie on the configured grid.
double element_distance(const UserPosition& user, const ArrayConfig& cfg, double m);

CVector steering_vector_sw(const UserPosition& user, const ArrayConfig& cfg);

// Far-field approximation: constant amplitude sqrt(beta_0)/r, phase linear in m.
CVector steering_vector_pw(const UserPosition& user, const ArrayConfig& cfg);

CVector steering_vector(const UserPosition& user, const ArrayConfig& cfg, ChannelModel model);

// r_cri = 9 M d.
double critical_distance(const ArrayConfig& cfg);

// Column k of `matrix` is the array response of users[k].
struct ChannelSet {
  ChannelModel model = ChannelModel::kSpherical;
  std::vector<UserPosition> users;
  CMatrix matrix;

  std::size_t size() const { return users.size(); }
};

ChannelSet build_channels(std::span<const UserPosition> users, const ArrayConfig& cfg,
                          ChannelModel model);

}  // namespace xlmimo
