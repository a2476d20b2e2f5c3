#pragma once

// User schedulers for the downlink: distance-based scheduling (DBS), its
// simplified variant (DBS-s), greedy ZFBF with semi-orthogonal user
// selection (SUS), MRT over all users, and an exhaustive subset search used
// as a test oracle.
//
// All ZF-based schedulers share the same admission step: the candidate is
// appended to the ZF set, waterfilling is rerun over the ZF gains, and the
// candidate is kept only if the sum-rate strictly increases. On the first
// non-increase the candidate is reverted and the scheduler stops.

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "xlmimo/array_channel.hpp"
#include "xlmimo/metrics.hpp"
#include "xlmimo/power_alloc.hpp"
#include "xlmimo/precoding.hpp"

namespace xlmimo {

enum class Method { kDbs, kDbsSimplified, kSus, kMrt };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct StoppingRule {
  bool stop_on_rate_reduction = true;
  // Distance-based schedulers stop once the accepted candidate's equivalent
  // distance exceeds this cap. Ignored by SUS.
  std::optional<double> max_equivalent_distance;
};

struct ScheduleResult {
  std::vector<std::size_t> served;  // user ids in admission order
  PrecoderSet precoders;            // columns follow `served`
  PowerAllocation powers;           // follows `served`
  RateReport report;                // full-interference evaluation
  std::size_t iterations = 0;       // admission attempts, including a reverted one
  std::size_t distance_updates = 0; // equivalent-distance evaluations (DBS only)
  std::vector<double> rate_trajectory;  // sum-rate after each accepted user
  // Wall time of the selection loop (per-iteration ZF gains and waterfilling
  // included; building the final precoder matrix and report excluded).
  double elapsed_seconds = 0.0;
};

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// r_k (1 - (r_k^2 / M) * interference)^(-1/2), or infinity when the
// parenthesized factor is <= 0.
double equivalent_distance_from_interference(double distance, double interference,
                                             std::size_t num_antennas);

// Equivalent distance of a user with channel `channel` given the normalized
// precoders of the served set.
double equivalent_distance(const UserPosition& user, const CVector& channel,
                           const PrecoderSet& served_precoders, const ArrayConfig& cfg);

ScheduleResult dbs_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                            const StoppingRule& stop = {});

ScheduleResult dbs_s_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                              const StoppingRule& stop = {});

// alpha >= 1 disables the semi-orthogonality filter.
ScheduleResult sus_schedule(const ChannelSet& channels, const ArrayConfig& cfg,
                            const StoppingRule& stop = {}, double alpha = 1.0);

// MRT precoders for every user, waterfilling over ||a_k||^2. `served` lists
// the users that receive nonzero power; it may exceed M.
ScheduleResult mrt_schedule(const ChannelSet& channels, const ArrayConfig& cfg);

inline constexpr std::size_t kExhaustiveMaxUsers = 16;

// Best ZF + waterfilling subset over all nonempty feasible subsets.
// Throws std::invalid_argument above kExhaustiveMaxUsers users.
ScheduleResult exhaustive_schedule(const ChannelSet& channels, const ArrayConfig& cfg);

// Interference-free ZF + waterfilling rate of a given set; nullopt if the
// set is rank deficient.
std::optional<double> zf_waterfill_rate(const ChannelSet& channels, const ArrayConfig& cfg,
                                        std::span<const std::size_t> ids);

struct SchedulerOptions {
  StoppingRule stop;
  double sus_alpha = 1.0;
};

ScheduleResult run_scheduler(Method method, const ChannelSet& channels, const ArrayConfig& cfg,
                             const SchedulerOptions& options = {});

}  // namespace xlmimo
