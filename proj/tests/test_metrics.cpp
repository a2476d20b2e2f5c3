#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xlmimo/metrics.hpp"
#include "xlmimo/power_alloc.hpp"

using namespace xlmimo;

TEST_CASE("zf sinr is interference free") {
  ArrayConfig cfg = ArrayConfig::with_snr_db(64, 10.0);
  KeyedStream rng{31};
  const auto users = oracle::random_users(rng, 6, 10.0, 60.0, 0.78);
  const CMatrix a = build_channels(users, cfg, ChannelModel::kSpherical).matrix;
  const PrecoderSet f = zf_precoders(a);
  const auto g = effective_gains(f, a);
  const auto p = waterfill(g, cfg.noise_power, cfg.tx_power);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(sinr(k, f, p.powers, a, cfg.noise_power) ==
          doctest::Approx(p.powers[k] * g[k] / cfg.noise_power).epsilon(1e-9));
  }
  CHECK(sum_rate(f, p.powers, a, cfg.noise_power) ==
        doctest::Approx(separable_rate(g, p.powers, cfg.noise_power)).epsilon(1e-9));
}

TEST_CASE("zero power gives zero sinr and rate") {
  CMatrix a = CMatrix::Identity(4, 2);
  const PrecoderSet f = zf_precoders(a);
  const std::vector<double> p{0.0, 0.5};
  CHECK(sinr(0, f, p, a, 1.0) == 0.0);
  const auto report = rate_report(f, p, a, 1.0);
  CHECK(report.served_count == 1);
  CHECK(sum_rate(f, std::vector<double>{0.0, 0.0}, a, 1.0) == 0.0);
}

TEST_CASE("mrt rates match a scalar evaluation") {
  ArrayConfig cfg = ArrayConfig::with_snr_db(8, 15.0);
  KeyedStream rng{33};
  for (int trial = 0; trial < 50; ++trial) {
    const auto users = oracle::random_users(rng, 2, 2.0, 10.0, 0.78);
    const CMatrix a = build_channels(users, cfg, ChannelModel::kSpherical).matrix;
    PrecoderSet f{CMatrix(8, 2), {0, 1}};
    for (Eigen::Index k = 0; k < 2; ++k) f.columns.col(k) = mrt_precoder(a.col(k));
    const std::vector<double> p{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};

    std::vector<std::vector<cd>> fa;
    std::vector<std::vector<cd>> aa;
    for (const auto& u : users) {
      auto ch = oracle::sw_channel(u.distance, u.angle, 8, cfg.element_spacing, cfg.wavelength);
      double n2 = 0.0;
      for (const auto& x : ch) n2 += std::norm(x);
      std::vector<cd> dir = ch;
      for (auto& x : dir) x /= std::sqrt(n2);
      aa.push_back(ch);
      fa.push_back(dir);
    }
    CHECK(sum_rate(f, p, a, cfg.noise_power) ==
          doctest::Approx(oracle::scalar_sum_rate(fa, aa, p, cfg.noise_power)).epsilon(1e-9));
  }
}

TEST_CASE("single-user mrt rate") {
  ArrayConfig cfg = ArrayConfig::with_snr_db(32, 5.0);
  const CMatrix a = steering_vector_sw({25.0, 0.3}, cfg);
  PrecoderSet f{mrt_precoder(a.col(0)), {0}};
  const std::vector<double> p{cfg.tx_power};
  CHECK(sum_rate(f, p, a, cfg.noise_power) ==
        doctest::Approx(std::log2(1.0 + cfg.tx_power * a.squaredNorm() / cfg.noise_power)));
}

TEST_CASE("report consistency and dimension checks") {
  ArrayConfig cfg = ArrayConfig::with_snr_db(16, 0.0);
  KeyedStream rng{35};
  const auto users = oracle::random_users(rng, 4, 3.0, 20.0, 0.78);
  const CMatrix a = build_channels(users, cfg, ChannelModel::kSpherical).matrix;
  PrecoderSet f{CMatrix(16, 4), {0, 1, 2, 3}};
  for (Eigen::Index k = 0; k < 4; ++k) f.columns.col(k) = mrt_precoder(a.col(k));
  const std::vector<double> p{0.25, 0.25, 0.5, 0.0};
  const auto r = rate_report(f, p, a, cfg.noise_power);
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(r.per_user_sinr[k] >= 0.0);
    total += r.per_user_rate[k];
  }
  CHECK(r.sum_rate == doctest::Approx(total).epsilon(1e-14));
  CHECK(r.served_count == 3);

  CHECK_THROWS_AS(sum_rate(f, std::vector<double>{1.0}, a, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sum_rate(f, p, a.leftCols(3), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sinr(4, f, p, a, 1.0), std::invalid_argument);
}

TEST_CASE("scaling invariance and monotonicity in transmit power") {
  KeyedStream rng{37};
  ArrayConfig cfg = ArrayConfig::with_snr_db(32, 10.0);
  const auto users = oracle::random_users(rng, 5, 3.0, 40.0, 0.78);
  const CMatrix a = build_channels(users, cfg, ChannelModel::kSpherical).matrix;
  const PrecoderSet f = zf_precoders(a);

  const double c = 37.0;
  const CMatrix scaled = a * std::sqrt(c);
  const auto g = effective_gains(f, a);
  const auto p = waterfill(g, cfg.noise_power, 1.0);
  CHECK(sum_rate(f, p.powers, a, cfg.noise_power) ==
        doctest::Approx(sum_rate(f, p.powers, scaled, c * cfg.noise_power)).epsilon(1e-12));

  double previous = 0.0;
  for (double budget : {0.01, 0.1, 0.5, 1.0, 4.0, 20.0}) {
    const auto alloc = waterfill(g, cfg.noise_power, budget);
    const double r = sum_rate(f, alloc.powers, a, cfg.noise_power);
    CHECK(r >= previous);
    previous = r;
  }
}
