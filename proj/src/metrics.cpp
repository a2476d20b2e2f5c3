#include "xlmimo/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace xlmimo {

namespace {

void check_dimensions(const PrecoderSet& precoders, std::span<const double> powers,
                      const CMatrix& channels, double noise) {
  const auto n = static_cast<std::size_t>(channels.cols());
  if (precoders.size() != n || static_cast<std::size_t>(precoders.columns.cols()) != n ||
      powers.size() != n || precoders.columns.rows() != channels.rows()) {
    throw std::invalid_argument("dimension mismatch between precoders, powers and channels");
  }
  if (!(noise > 0.0)) throw std::invalid_argument("noise power must be > 0");
}

// |F^H A|^2 entrywise: coupling(j, k) = |f_j^H a_k|^2.
Eigen::MatrixXd coupling(const PrecoderSet& precoders, const CMatrix& channels) {
  return (precoders.columns.adjoint() * channels).cwiseAbs2();
}

double sinr_from_coupling(const Eigen::MatrixXd& c, std::span<const double> powers,
                          std::size_t k, double noise) {
  const auto kk = static_cast<Eigen::Index>(k);
  double interference = 0.0;
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    if (j != kk) interference += powers[static_cast<std::size_t>(j)] * c(j, kk);
  }
  return powers[k] * c(kk, kk) / (noise + interference);
}

}  // namespace

double sinr(std::size_t k, const PrecoderSet& precoders, std::span<const double> powers,
            const CMatrix& channels, double noise) {
  check_dimensions(precoders, powers, channels, noise);
  if (k >= powers.size()) throw std::invalid_argument("user index out of range");
  return sinr_from_coupling(coupling(precoders, channels), powers, k, noise);
}

RateReport rate_report(const PrecoderSet& precoders, std::span<const double> powers,
                       const CMatrix& channels, double noise) {
  check_dimensions(precoders, powers, channels, noise);
  const Eigen::MatrixXd c = coupling(precoders, channels);
  RateReport report;
  report.per_user_sinr.resize(powers.size());
  report.per_user_rate.resize(powers.size());
  for (std::size_t k = 0; k < powers.size(); ++k) {
    const double s = sinr_from_coupling(c, powers, k, noise);
    report.per_user_sinr[k] = s;
    report.per_user_rate[k] = std::log2(1.0 + s);
    report.sum_rate += report.per_user_rate[k];
    if (powers[k] > 0.0) ++report.served_count;
  }
  return report;
}

double sum_rate(const PrecoderSet& precoders, std::span<const double> powers,
                const CMatrix& channels, double noise) {
  return rate_report(precoders, powers, channels, noise).sum_rate;
}

CMatrix gather_columns(const CMatrix& all_channels, std::span<const std::size_t> ids) {
  CMatrix out(all_channels.rows(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t j = 0; j < ids.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = all_channels.col(static_cast<Eigen::Index>(ids[j]));
  }
  return out;
}

}  // namespace xlmimo
