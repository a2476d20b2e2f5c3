#pragma once

// Monte-Carlo campaigns over (SNR, M, channel model, method) grids, timing
// benchmarks, and CSV / plot-script output.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xlmimo/array_channel.hpp"
#include "xlmimo/scheduling.hpp"

namespace xlmimo {

struct CampaignConfig {
  std::size_t num_users = 200;
  std::vector<std::size_t> antenna_counts{64, 128, 256};
  std::vector<double> snr_grid_db{0, 5, 10, 15, 20, 25};
  // Unset: [r_min, 2 r_cri - r_min] with r_min = 40 m, or r_cri / 2 when
  // r_cri <= 40 m (small arrays).
  std::optional<std::pair<double, double>> distance_range;
  std::pair<double, double> angle_range{-0.7853981633974483, 0.7853981633974483};
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::vector<ChannelModel> models{ChannelModel::kSpherical, ChannelModel::kPlane};
  std::vector<Method> methods{Method::kDbs, Method::kDbsSimplified, Method::kSus, Method::kMrt};
  double sus_alpha = 1.0;
  double aperture_eta = 0.95;
  double element_spacing = 0.0628;
  std::size_t workers = 1;
  // Timing benchmark: discarded warm-up calls and timed calls per trial.
  std::size_t bench_warmup = 3;
  std::size_t bench_repetitions = 1;

  void validate() const;
  std::pair<double, double> distance_range_for(std::size_t num_antennas) const;

  static CampaignConfig desk();
  static CampaignConfig paper();
  static CampaignConfig preset(std::string_view name);
};

// Flat "key = value" text; '#' starts a comment; list values are comma
// separated. Keys mirror CampaignConfig fields (distance_range and
// angle_range take "lo,hi"; distance_range also accepts "auto").
// Unknown keys and malformed values throw std::invalid_argument.
void apply_config_text(CampaignConfig& cfg, std::string_view text);
CampaignConfig load_config_file(const std::string& path, CampaignConfig base = {});
void apply_config_value(CampaignConfig& cfg, std::string_view key, std::string_view value);

struct Scenario {
  std::vector<UserPosition> users;
  std::size_t num_antennas = 0;
  std::uint64_t trial_id = 0;
  std::uint64_t seed_used = 0;
};

// Users drawn i.i.d. uniform in distance and angle from the stream keyed
// by (seed, M, trial_id).
Scenario generate_scenario(const CampaignConfig& cfg, std::size_t num_antennas,
                           std::uint64_t trial_id);

struct ResultRow {
  double snr_db = 0.0;
  std::size_t m = 0;
  ChannelModel model = ChannelModel::kSpherical;
  Method method = Method::kDbs;
  std::size_t trial = 0;
  double sum_rate = 0.0;
  std::size_t served_users = 0;
  double elapsed_ms = 0.0;
  std::size_t iterations = 0;
};

bool operator<(const ResultRow& a, const ResultRow& b);

struct TrialFailure {
  double snr_db = 0.0;
  std::size_t m = 0;
  std::size_t trial = 0;
  std::string message;
};

struct CampaignResult {
  std::vector<ResultRow> rows;  // sorted by (snr_db, m, model, method, trial)
  std::vector<TrialFailure> failures;
};

ArrayConfig array_config_for(const CampaignConfig& cfg, std::size_t num_antennas, double snr_db);

// Runs one scheduler on the chosen channel model of `scenario`.
ResultRow run_trial(const Scenario& scenario, const ChannelSet& channels, Method method,
                    const CampaignConfig& cfg, double snr_db);
ResultRow run_trial(const Scenario& scenario, Method method, ChannelModel model,
                    const CampaignConfig& cfg, double snr_db);

CampaignResult run_campaign(const CampaignConfig& cfg);

struct SummaryRow {
  double snr_db = 0.0;
  std::size_t m = 0;
  ChannelModel model = ChannelModel::kSpherical;
  Method method = Method::kDbs;
  std::size_t trials = 0;
  double mean_sum_rate = 0.0;
  double std_sum_rate = 0.0;
  double mean_served = 0.0;
  double std_served = 0.0;
  double mean_elapsed_ms = 0.0;
};

// Mean and sample standard deviation per grid point.
std::vector<SummaryRow> summarize(const CampaignResult& result);

struct TimingRow {
  Method method = Method::kDbs;
  double snr_db = 0.0;
  std::size_t m = 0;
  std::size_t num_users = 0;
  ChannelModel model = ChannelModel::kSpherical;
  double median_ms = 0.0;
  std::size_t samples = 0;
};

// Median scheduler wall time per (method, SNR, M, model). Requires
// workers == 1 and at least 20 timed samples per point.
std::vector<TimingRow> benchmark_timing(const CampaignConfig& cfg);

inline constexpr std::string_view kCampaignCsvHeader =
    "snr_db,m,model,method,trial,sum_rate_bps_hz,served_users,elapsed_ms,iterations";
inline constexpr std::string_view kBoundCsvHeader =
    "alpha,m_prime,r_k,r_j,bound,mc_estimate,mc_stderr,mc_samples";
inline constexpr std::string_view kTimingCsvHeader = "method,snr_db,m,k,model,median_ms,samples";
inline constexpr std::string_view kSummaryCsvHeader =
    "snr_db,m,model,method,trials,mean_sum_rate,std_sum_rate,mean_served,std_served,"
    "mean_elapsed_ms";

// Floats are written with 9 significant digits.
std::string format_float(double value);

void write_campaign_csv(const CampaignResult& result, std::ostream& out);
std::string campaign_csv(const CampaignResult& result);
CampaignResult parse_campaign_csv(std::istream& in);

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out);

struct BoundRow {
  double alpha = 0.0;
  std::size_t m_prime = 1;
  double r_k = 0.0;
  double r_j = 0.0;
  double bound = 0.0;
  double mc_estimate = 0.0;
  double mc_stderr = 0.0;
  std::size_t mc_samples = 0;
};

void write_bound_csv(const std::vector<BoundRow>& rows, std::ostream& out);

// Writes to `path`; throws std::runtime_error if the file cannot be opened.
void emit_csv(const CampaignResult& result, const std::string& path);

// Python/matplotlib script that reads the campaign CSV and draws sum-rate vs
// SNR, served users vs SNR and sum-rate vs M (solid = SW, dashed = PW).
std::string plot_script(std::string_view csv_path);
void emit_plot_script(std::string_view csv_path, const std::string& path);

}  // namespace xlmimo
