#include "xlmimo/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "xlmimo/random.hpp"

namespace xlmimo {

// ---------------------------------------------------------------------------
// Configuration

void CampaignConfig::validate() const {
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  if (antenna_counts.empty()) throw std::invalid_argument("antenna_counts must not be empty");
  for (std::size_t m : antenna_counts) {
    if (m < 1) throw std::invalid_argument("antenna counts must be >= 1");
  }
  if (snr_grid_db.empty()) throw std::invalid_argument("snr_grid_db must not be empty");
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (models.empty()) throw std::invalid_argument("models must not be empty");
  if (methods.empty()) throw std::invalid_argument("methods must not be empty");
  if (distance_range) {
    const auto [lo, hi] = *distance_range;
    if (!(lo > 0.0) || !(hi > lo)) {
      throw std::invalid_argument("distance_range needs 0 < r_min < r_max");
    }
  }
  const auto [alo, ahi] = angle_range;
  if (!(alo < ahi) || !(alo > -std::numbers::pi / 2) || !(ahi < std::numbers::pi / 2)) {
    throw std::invalid_argument("angle_range must satisfy -pi/2 < lo < hi < pi/2");
  }
  if (!(sus_alpha > 0.0)) throw std::invalid_argument("sus_alpha must be > 0");
  if (!(aperture_eta > 0.0 && aperture_eta < 1.0)) {
    throw std::invalid_argument("aperture_eta must lie in (0, 1)");
  }
  if (!(element_spacing > 0.0)) throw std::invalid_argument("element_spacing must be > 0");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (bench_repetitions < 1) throw std::invalid_argument("bench_repetitions must be >= 1");
}

std::pair<double, double> CampaignConfig::distance_range_for(std::size_t num_antennas) const {
  if (distance_range) return *distance_range;
  const double r_cri = 9.0 * static_cast<double>(num_antennas) * element_spacing;
  const double r_min = r_cri > 40.0 ? 40.0 : 0.5 * r_cri;
  return {r_min, 2.0 * r_cri - r_min};
}

CampaignConfig CampaignConfig::desk() { return {}; }

CampaignConfig CampaignConfig::paper() {
  CampaignConfig cfg;
  cfg.num_users = 1000;
  cfg.antenna_counts = {1000};
  cfg.trials = 1000;
  return cfg;
}

CampaignConfig CampaignConfig::preset(std::string_view name) {
  if (name == "desk") return desk();
  if (name == "paper") return paper();
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw std::invalid_argument("invalid value '" + std::string(text) + "' for " +
                                std::string(what));
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view what) {
  std::vector<T> out;
  for (auto item : split(text, ',')) out.push_back(parse_number<T>(item, what));
  if (out.empty()) throw std::invalid_argument("empty list for " + std::string(what));
  return out;
}

std::pair<double, double> parse_range(std::string_view text, std::string_view what) {
  const auto values = parse_list<double>(text, what);
  if (values.size() != 2) {
    throw std::invalid_argument(std::string(what) + " needs exactly two values");
  }
  return {values[0], values[1]};
}

}  // namespace

void apply_config_value(CampaignConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "num_users") {
    cfg.num_users = parse_number<std::size_t>(value, key);
  } else if (key == "antenna_counts") {
    cfg.antenna_counts = parse_list<std::size_t>(value, key);
  } else if (key == "snr_grid_db") {
    cfg.snr_grid_db = parse_list<double>(value, key);
  } else if (key == "distance_range") {
    if (value == "auto") {
      cfg.distance_range.reset();
    } else {
      cfg.distance_range = parse_range(value, key);
    }
  } else if (key == "angle_range") {
    cfg.angle_range = parse_range(value, key);
  } else if (key == "trials") {
    cfg.trials = parse_number<std::size_t>(value, key);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(value, key);
  } else if (key == "models") {
    cfg.models.clear();
    for (auto item : split(value, ',')) cfg.models.push_back(parse_channel_model(item));
  } else if (key == "methods") {
    cfg.methods.clear();
    for (auto item : split(value, ',')) cfg.methods.push_back(parse_method(item));
  } else if (key == "sus_alpha") {
    cfg.sus_alpha = parse_number<double>(value, key);
  } else if (key == "aperture_eta") {
    cfg.aperture_eta = parse_number<double>(value, key);
  } else if (key == "element_spacing") {
    cfg.element_spacing = parse_number<double>(value, key);
  } else if (key == "workers") {
    cfg.workers = parse_number<std::size_t>(value, key);
  } else if (key == "bench_warmup") {
    cfg.bench_warmup = parse_number<std::size_t>(value, key);
  } else if (key == "bench_repetitions") {
    cfg.bench_repetitions = parse_number<std::size_t>(value, key);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

void apply_config_text(CampaignConfig& cfg, std::string_view text) {
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    try {
      apply_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

CampaignConfig load_config_file(const std::string& path, CampaignConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  apply_config_text(base, buffer.str());
  return base;
}

// ---------------------------------------------------------------------------
// Scenarios and trials

Scenario generate_scenario(const CampaignConfig& cfg, std::size_t num_antennas,
                           std::uint64_t trial_id) {
  cfg.validate();
  const auto [r_lo, r_hi] = cfg.distance_range_for(num_antennas);
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("invalid distance range");
  const auto [a_lo, a_hi] = cfg.angle_range;

  Scenario s;
  s.num_antennas = num_antennas;
  s.trial_id = trial_id;
  s.seed_used = cfg.seed;
  KeyedStream stream{cfg.seed, num_antennas, trial_id};
  s.users.resize(cfg.num_users);
  for (auto& user : s.users) {
    user.distance = stream.uniform(r_lo, r_hi);
    user.angle = stream.uniform(a_lo, a_hi);
  }
  return s;
}

ArrayConfig array_config_for(const CampaignConfig& cfg, std::size_t num_antennas, double snr_db) {
  return ArrayConfig::with_snr_db(num_antennas, snr_db, cfg.element_spacing);
}

ResultRow run_trial(const Scenario& scenario, const ChannelSet& channels, Method method,
                    const CampaignConfig& cfg, double snr_db) {
  const ArrayConfig array = array_config_for(cfg, scenario.num_antennas, snr_db);
  SchedulerOptions options;
  options.sus_alpha = cfg.sus_alpha;
  ScheduleResult result;
  try {
    result = run_scheduler(method, channels, array, options);
  } catch (const std::exception& e) {
    throw std::runtime_error("trial " + std::to_string(scenario.trial_id) + " (M=" +
                             std::to_string(scenario.num_antennas) + ", snr=" +
                             format_float(snr_db) + ", " + std::string(to_string(method)) +
                             "/" + std::string(to_string(channels.model)) + "): " + e.what());
  }
  ResultRow row;
  row.snr_db = snr_db;
  row.m = scenario.num_antennas;
  row.model = channels.model;
  row.method = method;
  row.trial = scenario.trial_id;
  row.sum_rate = result.report.sum_rate;
  row.served_users = result.report.served_count;
  row.elapsed_ms = 1e3 * result.elapsed_seconds;
  row.iterations = result.iterations;
  return row;
}

ResultRow run_trial(const Scenario& scenario, Method method, ChannelModel model,
                    const CampaignConfig& cfg, double snr_db) {
  const ArrayConfig array = array_config_for(cfg, scenario.num_antennas, snr_db);
  const ChannelSet channels = build_channels(scenario.users, array, model);
  return run_trial(scenario, channels, method, cfg, snr_db);
}

bool operator<(const ResultRow& a, const ResultRow& b) {
  return std::tie(a.snr_db, a.m, a.model, a.method, a.trial) <
         std::tie(b.snr_db, b.m, b.model, b.method, b.trial);
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg) {
  cfg.validate();
  struct Unit {
    std::size_t m;
    std::size_t trial;
  };
  std::vector<Unit> units;
  for (std::size_t m : cfg.antenna_counts) {
    for (std::size_t t = 0; t < cfg.trials; ++t) units.push_back({m, t});
  }

  std::vector<std::vector<ResultRow>> rows(units.size());
  std::vector<std::vector<TrialFailure>> failures(units.size());
  parallel_for(units.size(), cfg.workers, [&](std::size_t u) {
    const auto [m, trial] = units[u];
    const Scenario scenario = generate_scenario(cfg, m, trial);
    // Channels do not depend on the noise level.
    const ArrayConfig geometry = array_config_for(cfg, m, 0.0);
    for (ChannelModel model : cfg.models) {
      const ChannelSet channels = build_channels(scenario.users, geometry, model);
      for (double snr : cfg.snr_grid_db) {
        for (Method method : cfg.methods) {
          try {
            rows[u].push_back(run_trial(scenario, channels, method, cfg, snr));
          } catch (const std::exception& e) {
            failures[u].push_back({snr, m, trial, e.what()});
          }
        }
      }
    }
  });

  CampaignResult result;
  for (auto& r : rows) result.rows.insert(result.rows.end(), r.begin(), r.end());
  for (auto& f : failures) result.failures.insert(result.failures.end(), f.begin(), f.end());
  std::sort(result.rows.begin(), result.rows.end());
  return result;
}

std::vector<SummaryRow> summarize(const CampaignResult& result) {
  using Key = std::tuple<double, std::size_t, ChannelModel, Method>;
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& row : result.rows) {
    groups[{row.snr_db, row.m, row.model, row.method}].push_back(&row);
  }
  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    std::tie(s.snr_db, s.m, s.model, s.method) = key;
    s.trials = members.size();
    const double n = static_cast<double>(members.size());
    for (const auto* r : members) {
      s.mean_sum_rate += r->sum_rate;
      s.mean_served += static_cast<double>(r->served_users);
      s.mean_elapsed_ms += r->elapsed_ms;
    }
    s.mean_sum_rate /= n;
    s.mean_served /= n;
    s.mean_elapsed_ms /= n;
    if (members.size() > 1) {
      double vr = 0.0;
      double vs = 0.0;
      for (const auto* r : members) {
        vr += (r->sum_rate - s.mean_sum_rate) * (r->sum_rate - s.mean_sum_rate);
        const double ds = static_cast<double>(r->served_users) - s.mean_served;
        vs += ds * ds;
      }
      s.std_sum_rate = std::sqrt(vr / (n - 1.0));
      s.std_served = std::sqrt(vs / (n - 1.0));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<TimingRow> benchmark_timing(const CampaignConfig& cfg) {
  cfg.validate();
  if (cfg.workers != 1) {
    throw std::invalid_argument("timing benchmark requires workers = 1 (sequential mode)");
  }
  const std::size_t samples_per_point = cfg.trials * cfg.bench_repetitions;
  if (samples_per_point < 20) {
    throw std::invalid_argument("timing benchmark needs trials * bench_repetitions >= 20");
  }

  SchedulerOptions options;
  options.sus_alpha = cfg.sus_alpha;
  using Key = std::tuple<std::size_t, ChannelModel, double, Method>;
  std::map<Key, std::vector<double>> samples;

  for (std::size_t m : cfg.antenna_counts) {
    const ArrayConfig geometry = array_config_for(cfg, m, 0.0);
    for (ChannelModel model : cfg.models) {
      for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const Scenario scenario = generate_scenario(cfg, m, trial);
        const ChannelSet channels = build_channels(scenario.users, geometry, model);
        for (double snr : cfg.snr_grid_db) {
          const ArrayConfig array = array_config_for(cfg, m, snr);
          for (Method method : cfg.methods) {
            if (trial == 0) {
              for (std::size_t w = 0; w < cfg.bench_warmup; ++w) {
                (void)run_scheduler(method, channels, array, options);
              }
            }
            auto& bucket = samples[{m, model, snr, method}];
            for (std::size_t rep = 0; rep < cfg.bench_repetitions; ++rep) {
              bucket.push_back(1e3 * run_scheduler(method, channels, array, options).elapsed_seconds);
            }
          }
        }
      }
    }
  }

  std::vector<TimingRow> out;
  for (auto& [key, values] : samples) {
    TimingRow row;
    std::tie(row.m, row.model, row.snr_db, row.method) = key;
    row.num_users = cfg.num_users;
    row.samples = values.size();
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    row.median_ms = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const TimingRow& a, const TimingRow& b) {
    return std::tie(a.method, a.m, a.model, a.snr_db) < std::tie(b.method, b.m, b.model, b.snr_db);
  });
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_float(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_campaign_csv(const CampaignResult& result, std::ostream& out) {
  out << kCampaignCsvHeader << '\n';
  for (const auto& r : result.rows) {
    out << format_float(r.snr_db) << ',' << r.m << ',' << to_string(r.model) << ','
        << to_string(r.method) << ',' << r.trial << ',' << format_float(r.sum_rate) << ','
        << r.served_users << ',' << format_float(r.elapsed_ms) << ',' << r.iterations << '\n';
  }
}

std::string campaign_csv(const CampaignResult& result) {
  std::ostringstream out;
  write_campaign_csv(result, out);
  return out.str();
}

CampaignResult parse_campaign_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCampaignCsvHeader) {
    throw std::invalid_argument("campaign CSV header mismatch");
  }
  CampaignResult result;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 9) {
      throw std::invalid_argument("campaign CSV line " + std::to_string(line_no) +
                                  ": expected 9 fields");
    }
    ResultRow r;
    r.snr_db = parse_number<double>(f[0], "snr_db");
    r.m = parse_number<std::size_t>(f[1], "m");
    r.model = parse_channel_model(f[2]);
    r.method = parse_method(f[3]);
    r.trial = parse_number<std::size_t>(f[4], "trial");
    r.sum_rate = parse_number<double>(f[5], "sum_rate_bps_hz");
    r.served_users = parse_number<std::size_t>(f[6], "served_users");
    r.elapsed_ms = parse_number<double>(f[7], "elapsed_ms");
    r.iterations = parse_number<std::size_t>(f[8], "iterations");
    result.rows.push_back(r);
  }
  return result;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << kSummaryCsvHeader << '\n';
  for (const auto& s : rows) {
    out << format_float(s.snr_db) << ',' << s.m << ',' << to_string(s.model) << ','
        << to_string(s.method) << ',' << s.trials << ',' << format_float(s.mean_sum_rate) << ','
        << format_float(s.std_sum_rate) << ',' << format_float(s.mean_served) << ','
        << format_float(s.std_served) << ',' << format_float(s.mean_elapsed_ms) << '\n';
  }
}

void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out) {
  out << kTimingCsvHeader << '\n';
  for (const auto& t : rows) {
    out << to_string(t.method) << ',' << format_float(t.snr_db) << ',' << t.m << ','
        << t.num_users << ',' << to_string(t.model) << ',' << format_float(t.median_ms) << ','
        << t.samples << '\n';
  }
}

void write_bound_csv(const std::vector<BoundRow>& rows, std::ostream& out) {
  out << kBoundCsvHeader << '\n';
  for (const auto& b : rows) {
    out << format_float(b.alpha) << ',' << b.m_prime << ',' << format_float(b.r_k) << ','
        << format_float(b.r_j) << ',' << format_float(b.bound) << ','
        << format_float(b.mc_estimate) << ',' << format_float(b.mc_stderr) << ','
        << b.mc_samples << '\n';
  }
}

void emit_csv(const CampaignResult& result, const std::string& path) {
  if (result.rows.empty()) throw std::invalid_argument("refusing to write an empty campaign");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_campaign_csv(result, out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string plot_script(std::string_view csv_path) {
  std::string script = R"PY(#!/usr/bin/env python3
"""Draws sum-rate / served-user curves from an xlmimo campaign CSV.

Usage: python3 plot.py [campaign.csv]
Solid lines: spherical-wavefront model. Dashed lines: plane-wave model.
"""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = sys.argv[1] if len(sys.argv) > 1 else "@CSV@"
STYLE = {"sw": "-", "pw": "--"}

groups = defaultdict(lambda: {"rate": [], "served": []})
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        key = (float(row["snr_db"]), int(row["m"]), row["model"], row["method"])
        groups[key]["rate"].append(float(row["sum_rate_bps_hz"]))
        groups[key]["served"].append(float(row["served_users"]))


def mean(values):
    return sum(values) / len(values)


ms = sorted({k[1] for k in groups})
snrs = sorted({k[0] for k in groups})
curves = sorted({(k[3], k[2]) for k in groups})


def versus_snr(metric, ylabel, filename):
    m = ms[-1]
    fig, ax = plt.subplots()
    for method, model in curves:
        xs = [s for s in snrs if (s, m, model, method) in groups]
        ys = [mean(groups[(s, m, model, method)][metric]) for s in xs]
        ax.plot(xs, ys, STYLE.get(model, "-"), marker="o", label=f"{method} ({model})")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.set_title(f"M = {m}")
    ax.grid(True)
    ax.legend()
    fig.savefig(filename, dpi=150)


def versus_m(filename):
    snr = snrs[-1]
    fig, ax = plt.subplots()
    for method, model in curves:
        xs = [m for m in ms if (snr, m, model, method) in groups]
        ys = [mean(groups[(snr, m, model, method)]["rate"]) for m in xs]
        ax.plot(xs, ys, STYLE.get(model, "-"), marker="o", label=f"{method} ({model})")
    ax.set_xlabel("Number of antennas M")
    ax.set_ylabel("Sum rate (bit/s/Hz)")
    ax.set_title(f"SNR = {snr:g} dB")
    ax.grid(True)
    ax.legend()
    fig.savefig(filename, dpi=150)


versus_snr("rate", "Sum rate (bit/s/Hz)", "sum_rate_vs_snr.png")
versus_snr("served", "Served users", "served_users_vs_snr.png")
versus_m("sum_rate_vs_m.png")
)PY";
  const std::string marker = "@CSV@";
  script.replace(script.find(marker), marker.size(), csv_path);
  return script;
}

void emit_plot_script(std::string_view csv_path, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << plot_script(csv_path);
}

}  // namespace xlmimo
