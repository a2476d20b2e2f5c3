#pragma once

// SINR and sum-rate under the full interference model. Powers are in watts:
// the desired term is p_k |f_k^H a_k|^2 and user j leaks p_j |f_j^H a_k|^2
// into user k.

#include <cstddef>
#include <span>
#include <vector>

#include "xlmimo/array_channel.hpp"
#include "xlmimo/precoding.hpp"

namespace xlmimo {

struct RateReport {
  std::vector<double> per_user_sinr;
  std::vector<double> per_user_rate;  // bits/s/Hz
  double sum_rate = 0.0;
  std::size_t served_count = 0;       // users with p_k > 0
};

// `channels` column j belongs to the user that owns precoder column j.
double sinr(std::size_t k, const PrecoderSet& precoders, std::span<const double> powers,
            const CMatrix& channels, double noise);

double sum_rate(const PrecoderSet& precoders, std::span<const double> powers,
                const CMatrix& channels, double noise);

RateReport rate_report(const PrecoderSet& precoders, std::span<const double> powers,
                       const CMatrix& channels, double noise);

// Columns of `all_channels` selected by `ids`, in order.
CMatrix gather_columns(const CMatrix& all_channels, std::span<const std::size_t> ids);

}  // namespace xlmimo
