// xlmimo: campaign simulation, timing benchmark and interference-bound
// validation from the command line.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xlmimo/nearfield.hpp"
#include "xlmimo/simharness.hpp"

namespace {

using namespace xlmimo;

struct CampaignFlags {
  std::string config_path;
  std::string out_path;
  std::string preset = "desk";
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_campaign_flags(CLI::App* cmd, CampaignFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Config file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out_path, "Output CSV path")->required();
  cmd->add_option("--preset", flags.preset, "Base preset")->check(CLI::IsMember({"desk", "paper"}));
  for (const char* key : {"seed", "trials", "methods", "models", "workers"}) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); },
        std::string("Override config key '") + key + "'");
  }
}

CampaignConfig resolve_config(const CampaignFlags& flags) {
  CampaignConfig cfg = CampaignConfig::preset(flags.preset);
  if (!flags.config_path.empty()) cfg = load_config_file(flags.config_path, cfg);
  for (const auto& [key, value] : flags.overrides) apply_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

int run_simulate(const CampaignFlags& flags, const std::string& summary_path,
                 const std::string& plot_path) {
  const CampaignConfig cfg = resolve_config(flags);
  const CampaignResult result = run_campaign(cfg);
  for (const auto& f : result.failures) {
    std::cerr << "warning: M=" << f.m << " snr=" << format_float(f.snr_db) << " trial="
              << f.trial << ": " << f.message << '\n';
  }
  emit_csv(result, flags.out_path);
  if (!summary_path.empty()) {
    auto out = open_output(summary_path);
    write_summary_csv(summarize(result), out);
  }
  if (!plot_path.empty()) emit_plot_script(flags.out_path, plot_path);
  std::cerr << "wrote " << result.rows.size() << " rows to " << flags.out_path << '\n';
  return result.failures.empty() ? 0 : 2;
}

int run_bench(const CampaignFlags& flags) {
  CampaignConfig cfg = resolve_config(flags);
  const auto rows = benchmark_timing(cfg);
  auto out = open_output(flags.out_path);
  write_timing_csv(rows, out);
  for (const auto& r : rows) {
    std::printf("%-6s M=%-5zu K=%-5zu %s snr=%5s dB  median %.4f ms (%zu samples)\n",
                std::string(to_string(r.method)).c_str(), r.m, r.num_users,
                std::string(to_string(r.model)).c_str(), format_float(r.snr_db).c_str(),
                r.median_ms, r.samples);
  }
  return 0;
}

struct BoundFlags {
  std::vector<double> alphas;
  std::vector<std::size_t> m_primes;
  std::string out_path;
  double r_k = 40.0;
  double r_j = 80.0;
  std::size_t antennas = 256;
  double element_spacing = 0.0628;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::string angle_model = "full";
  std::size_t workers = 1;
};

int run_bound(const BoundFlags& flags) {
  ArrayConfig cfg;
  cfg.num_antennas = flags.antennas;
  cfg.element_spacing = flags.element_spacing;
  cfg.wavelength = 2.0 * flags.element_spacing;
  const AngleModel angles = flags.angle_model == "full" ? AngleModel::full() : AngleModel::quarter();

  std::vector<BoundRow> rows;
  for (std::size_t m_prime : flags.m_primes) {
    const KernelGeometry geometry = make_kernel_geometry(flags.r_k, flags.r_j, m_prime, cfg);
    for (double alpha : flags.alphas) {
      BoundRow row;
      row.alpha = alpha;
      row.m_prime = m_prime;
      row.r_k = flags.r_k;
      row.r_j = flags.r_j;
      row.bound = semiorth_prob_bound(alpha, geometry, cfg, angles);
      const auto mc = semiorth_prob_mc(alpha, geometry, cfg, angles, flags.samples, flags.seed,
                                       flags.workers);
      row.mc_estimate = mc.estimate;
      row.mc_stderr = mc.standard_error;
      row.mc_samples = mc.samples;
      rows.push_back(row);
    }
  }
  auto out = open_output(flags.out_path);
  write_bound_csv(rows, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"XL-MIMO downlink scheduling simulator"};
  app.require_subcommand(1);

  CampaignFlags sim_flags;
  std::string summary_path;
  std::string plot_path;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo campaign and write its CSV");
  add_campaign_flags(simulate, sim_flags);
  simulate->add_option("--summary", summary_path, "Also write per-point mean/std CSV");
  simulate->add_option("--plot-script", plot_path, "Also write a matplotlib script for the CSV");

  CampaignFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "Median scheduler wall time per method and SNR");
  add_campaign_flags(bench, bench_flags);

  BoundFlags bound_flags;
  auto* bound = app.add_subcommand("bound", "Interference bound vs Monte-Carlo estimate");
  bound->add_option("--alpha", bound_flags.alphas, "Interference thresholds")->required()->delimiter(',');
  bound->add_option("--m-prime", bound_flags.m_primes, "Odd effective apertures")->required()->delimiter(',');
  bound->add_option("--out", bound_flags.out_path, "Output CSV path")->required();
  bound->add_option("--r-k", bound_flags.r_k, "Near user distance (m)");
  bound->add_option("--r-j", bound_flags.r_j, "Far user distance (m)");
  bound->add_option("--antennas", bound_flags.antennas, "Array size used for ||a_k||");
  bound->add_option("--element-spacing", bound_flags.element_spacing, "Element spacing (m)");
  bound->add_option("--samples", bound_flags.samples, "Monte-Carlo samples per point");
  bound->add_option("--seed", bound_flags.seed, "Monte-Carlo seed");
  bound->add_option("--angle-model", bound_flags.angle_model, "Angle law of theta_j")
      ->check(CLI::IsMember({"full", "quarter"}));
  bound->add_option("--workers", bound_flags.workers, "Monte-Carlo worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return run_simulate(sim_flags, summary_path, plot_path);
    if (*bench) return run_bench(bench_flags);
    if (*bound) return run_bound(bound_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
