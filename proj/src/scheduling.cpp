#include "xlmimo/scheduling.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>

namespace xlmimo {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kDbs: return "dbs";
    case Method::kDbsSimplified: return "dbs_s";
    case Method::kSus: return "sus";
    case Method::kMrt: return "mrt";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  if (text == "dbs") return Method::kDbs;
  if (text == "dbs_s") return Method::kDbsSimplified;
  if (text == "sus") return Method::kSus;
  if (text == "mrt") return Method::kMrt;
  throw std::invalid_argument("unknown method '" + std::string(text) + "'");
}

double equivalent_distance_from_interference(double distance, double interference,
                                             std::size_t num_antennas) {
  const double factor =
      1.0 - distance * distance / static_cast<double>(num_antennas) * interference;
  if (!(factor > 0.0)) return kInfiniteDistance;
  return distance / std::sqrt(factor);
}

double equivalent_distance(const UserPosition& user, const CVector& channel,
                           const PrecoderSet& served_precoders, const ArrayConfig& cfg) {
  if (served_precoders.columns.cols() > 0 && served_precoders.columns.rows() != channel.size()) {
    throw std::invalid_argument("precoder and channel dimensions differ");
  }
  double interference = 0.0;
  for (Eigen::Index j = 0; j < served_precoders.columns.cols(); ++j) {
    interference += std::norm(served_precoders.columns.col(j).dot(channel));
  }
  return equivalent_distance_from_interference(user.distance, interference, cfg.num_antennas);
}

namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(const ChannelSet& channels, const ArrayConfig& cfg) {
  cfg.validate();
  if (channels.size() == 0) throw std::invalid_argument("scheduler needs at least one user");
  if (channels.matrix.cols() != static_cast<Eigen::Index>(channels.size()) ||
      channels.matrix.rows() != static_cast<Eigen::Index>(cfg.num_antennas)) {
    throw std::invalid_argument("channel matrix does not match users/array");
  }
}

enum class Admission { kAccepted, kInfeasible, kStop };

// Shared greedy ZF state: admission with waterfilling and the rate-based
// stopping rule.
class GreedyZf {
 public:
  GreedyZf(const ChannelSet& channels, const ArrayConfig& cfg, const StoppingRule& stop,
           ScheduleResult& result)
      : channels_(channels),
        cfg_(cfg),
        stop_(stop),
        result_(result),
        zf_(channels.matrix, std::min(channels.size(), cfg.num_antennas)),
        start_(Clock::now()) {}

  const ZfAccumulator& zf() const { return zf_; }
  bool full() const { return zf_.size() >= cfg_.num_antennas; }

  Admission admit(std::size_t user, const CVector* cross = nullptr) {
    if (!zf_.try_push(user, cross)) return Admission::kInfeasible;
    ++result_.iterations;
    const std::vector<double> gains = zf_.gains();
    PowerAllocation alloc = waterfill(gains, cfg_.noise_power, cfg_.tx_power);
    const double rate = separable_rate(gains, alloc.powers, cfg_.noise_power);
    if (stop_.stop_on_rate_reduction && !(rate > current_rate_)) {
      zf_.pop();
      return Admission::kStop;
    }
    current_rate_ = rate;
    powers_ = std::move(alloc);
    result_.served.push_back(user);
    result_.rate_trajectory.push_back(rate);
    return Admission::kAccepted;
  }

  void finish() {
    result_.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start_).count();
    result_.precoders = zf_.precoders();
    result_.powers = powers_;
    const CMatrix served = gather_columns(channels_.matrix, result_.served);
    result_.report =
        rate_report(result_.precoders, result_.powers.powers, served, cfg_.noise_power);
  }

 private:
  const ChannelSet& channels_;
  const ArrayConfig& cfg_;
  const StoppingRule& stop_;
  ScheduleResult& result_;
  ZfAccumulator zf_;
  Clock::time_point start_;
  double current_rate_ = 0.0;
  PowerAllocation powers_;
};

}  // namespace

ScheduleResult dbs_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                            const StoppingRule& stop) {
  check_inputs(channels, cfg);
  ScheduleResult result;
  GreedyZf greedy(channels, cfg, stop, result);

  const std::size_t K = channels.size();
  const auto cap = static_cast<Eigen::Index>(std::min(K, cfg.num_antennas));
  std::vector<double> distance(K);
  std::vector<std::size_t> updated_at(K, 0);  // |S| when distance[k] was last computed
  std::vector<char> in_pool(K, 1);
  std::vector<CVector> cross(K);              // cached a_{S_j}^H a_k
  std::vector<Eigen::Index> cross_len(K, 0);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t k = 0; k < K; ++k) {
    distance[k] = channels.users[k].distance;
    queue.emplace(distance[k], k);
  }

  auto refresh_cross = [&](std::size_t k) {
    const auto n = static_cast<Eigen::Index>(greedy.zf().size());
    if (cross[k].size() == 0) cross[k].resize(cap);
    const auto a = channels.matrix.col(static_cast<Eigen::Index>(k));
    const auto& ids = greedy.zf().ids();
    for (Eigen::Index j = cross_len[k]; j < n; ++j) {
      cross[k][j] = channels.matrix.col(static_cast<Eigen::Index>(ids[static_cast<std::size_t>(j)])).dot(a);
    }
    cross_len[k] = n;
  };

  while (!queue.empty() && !greedy.full()) {
    const auto [value, k] = queue.top();
    queue.pop();
    if (!in_pool[k] || value != distance[k]) continue;

    const std::size_t n = greedy.zf().size();
    if (updated_at[k] != n) {
      // Stale against the current served set: update once, then re-check
      // the ordering.
      refresh_cross(k);
      const double interference = greedy.zf().interference_sum(cross[k]);
      distance[k] = equivalent_distance_from_interference(channels.users[k].distance,
                                                          interference, cfg.num_antennas);
      updated_at[k] = n;
      ++result.distance_updates;
      if (std::isinf(distance[k])) {
        in_pool[k] = 0;
      } else {
        queue.emplace(distance[k], k);
      }
      continue;
    }

    if (stop.max_equivalent_distance && distance[k] > *stop.max_equivalent_distance) break;
    refresh_cross(k);
    in_pool[k] = 0;
    const Admission outcome = greedy.admit(k, &cross[k]);
    if (outcome == Admission::kStop) break;
  }

  greedy.finish();
  return result;
}

ScheduleResult dbs_s_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                              const StoppingRule& stop) {
  check_inputs(channels, cfg);
  ScheduleResult result;
  GreedyZf greedy(channels, cfg, stop, result);

  std::vector<std::size_t> order(channels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return channels.users[a].distance < channels.users[b].distance;
  });

  for (std::size_t k : order) {
    if (greedy.full()) break;
    if (stop.max_equivalent_distance && channels.users[k].distance > *stop.max_equivalent_distance) {
      break;
    }
    if (greedy.admit(k) == Admission::kStop) break;
  }

  greedy.finish();
  return result;
}

ScheduleResult sus_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                            const StoppingRule& stop, double alpha) {
  check_inputs(channels, cfg);
  if (!(alpha > 0.0)) throw std::invalid_argument("SUS alpha must be > 0");
  ScheduleResult result;
  GreedyZf greedy(channels, cfg, stop, result);

  const std::size_t K = channels.size();
  const Eigen::VectorXd norms2 = channels.matrix.colwise().squaredNorm().transpose();
  Eigen::VectorXd residual2 = norms2;  // squared norm of the component orthogonal to span(S)
  std::vector<char> active(K, 1);
  const auto cap = static_cast<Eigen::Index>(std::min(K, cfg.num_antennas));
  CMatrix basis(channels.matrix.rows(), cap);
  Eigen::Index basis_size = 0;

  while (!greedy.full()) {
    std::size_t best = K;
    for (std::size_t k = 0; k < K; ++k) {
      if (active[k] && (best == K || residual2[static_cast<Eigen::Index>(k)] >
                                         residual2[static_cast<Eigen::Index>(best)])) {
        best = k;
      }
    }
    if (best == K) break;
    const auto b = static_cast<Eigen::Index>(best);
    active[best] = 0;
    if (!(residual2[b] > kRankTolerance * norms2[b])) continue;

    const Admission outcome = greedy.admit(best);
    if (outcome == Admission::kInfeasible) continue;
    if (outcome == Admission::kStop) break;

    // Orthonormal direction of the new user's residual (two Gram-Schmidt passes).
    CVector g = channels.matrix.col(b);
    for (int pass = 0; pass < 2; ++pass) {
      g -= basis.leftCols(basis_size) * (basis.leftCols(basis_size).adjoint() * g);
    }
    g.normalize();
    basis.col(basis_size++) = g;

    const CVector proj = channels.matrix.adjoint() * g;
    for (std::size_t k = 0; k < K; ++k) {
      if (!active[k]) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      const double p2 = std::norm(proj[kk]);
      residual2[kk] = std::max(0.0, residual2[kk] - p2);
      if (alpha < 1.0 && std::sqrt(p2 / norms2[kk]) >= alpha) active[k] = 0;
    }
  }

  greedy.finish();
  return result;
}

ScheduleResult mrt_schedule(const ChannelSet& channels, const ArrayConfig& cfg) {
  check_inputs(channels, cfg);
  ScheduleResult result;
  const auto start = Clock::now();

  const std::size_t K = channels.size();
  std::vector<double> gains(K);
  for (std::size_t k = 0; k < K; ++k) {
    gains[k] = channels.matrix.col(static_cast<Eigen::Index>(k)).squaredNorm();
  }
  const PowerAllocation alloc = waterfill(gains, cfg.noise_power, cfg.tx_power);
  std::vector<double> powers;
  for (std::size_t k = 0; k < K; ++k) {
    if (alloc.powers[k] > 0.0) {
      result.served.push_back(k);
      powers.push_back(alloc.powers[k]);
    }
  }
  result.iterations = 1;
  result.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  // Users without power neither receive nor leak, so the served subset
  // carries the full-interference sum-rate.
  const CMatrix served = gather_columns(channels.matrix, result.served);
  result.precoders.user_ids = result.served;
  result.precoders.columns = served;
  result.precoders.columns.colwise().normalize();
  result.powers.powers = std::move(powers);
  result.powers.water_level = alloc.water_level;
  result.report = rate_report(result.precoders, result.powers.powers, served, cfg.noise_power);
  result.rate_trajectory.push_back(result.report.sum_rate);
  return result;
}

std::optional<double> zf_waterfill_rate(const ChannelSet& channels, const ArrayConfig& cfg,
                                        std::span<const std::size_t> ids) {
  if (ids.empty()) return 0.0;
  const CMatrix stack = gather_columns(channels.matrix, ids);
  const auto precoders = try_zf_precoders(stack, {ids.begin(), ids.end()});
  if (!precoders) return std::nullopt;
  const std::vector<double> gains = effective_gains(*precoders, stack);
  const PowerAllocation alloc = waterfill(gains, cfg.noise_power, cfg.tx_power);
  return separable_rate(gains, alloc.powers, cfg.noise_power);
}

ScheduleResult exhaustive_schedule(const ChannelSet& channels, const ArrayConfig& cfg) {
  check_inputs(channels, cfg);
  const std::size_t K = channels.size();
  if (K > kExhaustiveMaxUsers) {
    throw std::invalid_argument("exhaustive search is capped at " +
                                std::to_string(kExhaustiveMaxUsers) + " users, got " +
                                std::to_string(K));
  }
  const auto start = Clock::now();
  ScheduleResult result;
  double best_rate = -1.0;
  std::vector<std::size_t> best;
  std::vector<std::size_t> ids;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << K); ++mask) {
    ids.clear();
    for (std::size_t k = 0; k < K; ++k) {
      if (mask & (std::uint32_t{1} << k)) ids.push_back(k);
    }
    if (ids.size() > cfg.num_antennas) continue;
    ++result.iterations;
    const auto rate = zf_waterfill_rate(channels, cfg, ids);
    if (rate && *rate > best_rate) {
      best_rate = *rate;
      best = ids;
    }
  }
  result.elapsed_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  result.served = best;
  const CMatrix stack = gather_columns(channels.matrix, best);
  result.precoders = zf_precoders(stack, best);
  result.powers = waterfill(effective_gains(result.precoders, stack), cfg.noise_power, cfg.tx_power);
  result.report = rate_report(result.precoders, result.powers.powers, stack, cfg.noise_power);
  result.rate_trajectory.push_back(result.report.sum_rate);
  return result;
}

ScheduleResult run_scheduler(Method method, const ChannelSet& channels, const ArrayConfig& cfg,
                             const SchedulerOptions& options) {
  switch (method) {
    case Method::kDbs: return dbs_schedule(channels, cfg, options.stop);
    case Method::kDbsSimplified: return dbs_s_schedule(channels, cfg, options.stop);
    case Method::kSus: return sus_schedule(channels, cfg, options.stop, options.sus_alpha);
    case Method::kMrt: return mrt_schedule(channels, cfg);
  }
  throw std::invalid_argument("unsupported method");
}

}  // namespace xlmimo
