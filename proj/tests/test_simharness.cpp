#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "xlmimo/simharness.hpp"

using namespace xlmimo;

namespace {

CampaignConfig small_config() {
  CampaignConfig cfg;
  cfg.num_users = 30;
  cfg.antenna_counts = {32};
  cfg.snr_grid_db = {0, 20};
  cfg.trials = 3;
  cfg.seed = 99;
  return cfg;
}

// Kolmogorov-Smirnov distance between the sample and the uniform law on [lo, hi].
double ks_uniform(std::vector<double> x, double lo, double hi) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = (x[i] - lo) / (hi - lo);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

std::string strip_elapsed(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.erase(cells.begin() + 7);
    for (const auto& c : cells) out << c << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("scenario generation") {
  CampaignConfig cfg;
  cfg.num_users = 1000;

  SUBCASE("replayable from its key") {
    const Scenario a = generate_scenario(cfg, 256, 17);
    const Scenario b = generate_scenario(cfg, 256, 17);
    REQUIRE(a.users.size() == 1000);
    for (std::size_t k = 0; k < a.users.size(); ++k) {
      CHECK(a.users[k].distance == b.users[k].distance);
      CHECK(a.users[k].angle == b.users[k].angle);
    }
    const Scenario c = generate_scenario(cfg, 256, 18);
    CHECK(c.users[0].distance != a.users[0].distance);
    CHECK(a.trial_id == 17);
    CHECK(a.seed_used == cfg.seed);
  }

  SUBCASE("default range at paper scale") {
    const auto range = cfg.distance_range_for(1000);
    CHECK(range.first == doctest::Approx(40.0));
    CHECK(range.second == doctest::Approx(1090.4));
    const Scenario s = generate_scenario(cfg, 1000, 0);
    for (const auto& u : s.users) {
      CHECK(u.distance >= 40.0);
      CHECK(u.distance <= 1090.4);
    }
  }

  SUBCASE("marginals and near-field share") {
    std::vector<double> r;
    std::vector<double> theta;
    for (std::uint64_t t = 0; t < 100; ++t) {
      for (const auto& u : generate_scenario(cfg, 1000, t).users) {
        r.push_back(u.distance);
        theta.push_back(u.angle);
      }
    }
    const double n = static_cast<double>(r.size());
    const double near = static_cast<double>(std::count_if(r.begin(), r.end(), [](double x) { return x < 565.2; }));
    CHECK(near / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(near / n - 0.5) <= 0.01);
    const double critical = 1.628 / std::sqrt(n);
    CHECK(ks_uniform(r, 40.0, 1090.4) < critical);
    CHECK(ks_uniform(theta, cfg.angle_range.first, cfg.angle_range.second) < critical);
  }

  SUBCASE("small arrays fall back to a nonempty range") {
    const auto range = cfg.distance_range_for(64);
    CHECK(range.first > 0.0);
    CHECK(range.second > range.first);
    cfg.distance_range = std::pair{10.0, 5.0};
    CHECK_THROWS_AS(generate_scenario(cfg, 64, 0), std::invalid_argument);
  }
}

TEST_CASE("single-user trial is identical across methods") {
  CampaignConfig cfg = small_config();
  cfg.num_users = 1;
  const Scenario s = generate_scenario(cfg, 32, 0);
  const ResultRow ref = run_trial(s, Method::kDbs, ChannelModel::kSpherical, cfg, 10.0);
  for (Method m : {Method::kDbsSimplified, Method::kSus, Method::kMrt}) {
    const ResultRow row = run_trial(s, m, ChannelModel::kSpherical, cfg, 10.0);
    CHECK(row.sum_rate == doctest::Approx(ref.sum_rate).epsilon(1e-12));
    CHECK(row.served_users == 1);
  }
}

TEST_CASE("campaign shape, ordering and determinism") {
  CampaignConfig cfg = small_config();
  const CampaignResult a = run_campaign(cfg);
  CHECK(a.failures.empty());
  CHECK(a.rows.size() == 2 * 1 * 2 * 4 * 3);
  CHECK(std::is_sorted(a.rows.begin(), a.rows.end()));

  cfg.workers = 3;
  const CampaignResult b = run_campaign(cfg);
  CHECK(strip_elapsed(campaign_csv(a)) == strip_elapsed(campaign_csv(b)));

  CampaignConfig one = small_config();
  one.trials = 1;
  one.snr_grid_db = {5};
  one.models = {ChannelModel::kPlane};
  one.methods = {Method::kSus};
  const CampaignResult single = run_campaign(one);
  REQUIRE(single.rows.size() == 1);
  CHECK(single.rows[0].model == ChannelModel::kPlane);
  CHECK(single.rows[0].method == Method::kSus);
}

TEST_CASE("csv output") {
  const CampaignResult result = run_campaign(small_config());
  const std::string csv = campaign_csv(result);
  CHECK(csv.substr(0, csv.find('\n')) == kCampaignCsvHeader);
  CHECK(kBoundCsvHeader == "alpha,m_prime,r_k,r_j,bound,mc_estimate,mc_stderr,mc_samples");

  std::istringstream in(csv);
  const CampaignResult parsed = parse_campaign_csv(in);
  REQUIRE(parsed.rows.size() == result.rows.size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    const ResultRow& p = parsed.rows[i];
    const ResultRow& r = result.rows[i];
    CHECK(p.snr_db == r.snr_db);
    CHECK(p.m == r.m);
    CHECK(p.model == r.model);
    CHECK(p.method == r.method);
    CHECK(p.trial == r.trial);
    CHECK(p.served_users == r.served_users);
    CHECK(p.iterations == r.iterations);
    CHECK(p.sum_rate == doctest::Approx(r.sum_rate).epsilon(1e-8));
  }
  CHECK(campaign_csv(parsed) == csv);

  CHECK(format_float(0.1) == "0.1");
  CHECK(format_float(123456789.123) == "123456789");
  CHECK(format_float(1.0 / 3.0) == "0.333333333");

  std::istringstream bad("snr_db,m\n");
  CHECK_THROWS_AS(parse_campaign_csv(bad), std::invalid_argument);
}

TEST_CASE("file emission") {
  const auto dir = std::filesystem::temp_directory_path() / "xlmimo_test_emit";
  std::filesystem::create_directories(dir);
  const CampaignResult result = run_campaign(small_config());
  const std::string path = (dir / "out.csv").string();
  emit_csv(result, path);
  std::ifstream in(path);
  std::stringstream content;
  content << in.rdbuf();
  CHECK(content.str() == campaign_csv(result));

  CHECK_THROWS_AS(emit_csv(CampaignResult{}, path), std::invalid_argument);
  CHECK_THROWS_AS(emit_csv(result, (dir / "missing" / "x.csv").string()), std::runtime_error);

  const std::string script = plot_script(path);
  CHECK(script.find(path) != std::string::npos);
  for (const char* name : {"sum_rate_vs_snr.png", "served_users_vs_snr.png", "sum_rate_vs_m.png"}) {
    CHECK(script.find(name) != std::string::npos);
  }
  emit_plot_script(path, (dir / "plot.py").string());
  CHECK(std::filesystem::exists(dir / "plot.py"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("summary means are recomputable from raw rows") {
  const CampaignResult result = run_campaign(small_config());
  const auto summary = summarize(result);
  CHECK(summary.size() == 2 * 2 * 4);
  for (const SummaryRow& s : summary) {
    double total = 0.0;
    double served = 0.0;
    std::size_t n = 0;
    for (const ResultRow& r : result.rows) {
      if (r.snr_db == s.snr_db && r.m == s.m && r.model == s.model && r.method == s.method) {
        total += r.sum_rate;
        served += static_cast<double>(r.served_users);
        ++n;
      }
    }
    CHECK(n == s.trials);
    CHECK(std::abs(s.mean_sum_rate - total / static_cast<double>(n)) <= 1e-12);
    CHECK(std::abs(s.mean_served - served / static_cast<double>(n)) <= 1e-12);
    CHECK(s.std_sum_rate >= 0.0);
  }
}

TEST_CASE("sum-rate grows with snr") {
  CampaignConfig cfg;
  cfg.num_users = 100;
  cfg.antenna_counts = {64, 128};
  cfg.trials = 15;
  cfg.models = {ChannelModel::kSpherical};
  const auto summary = summarize(run_campaign(cfg));
  std::map<std::tuple<std::size_t, Method>, double> last;
  for (const SummaryRow& s : summary) {
    const auto key = std::tuple{s.m, s.method};
    if (last.count(key)) CHECK(s.mean_sum_rate >= last[key]);
    last[key] = s.mean_sum_rate;
  }
}

TEST_CASE("config text") {
  CampaignConfig cfg;
  apply_config_text(cfg, R"(
# comment
num_users = 12
antenna_counts = 16, 32
snr_grid_db = 0,10
distance_range = 5, 50
angle_range = -0.5,0.5
trials = 4
seed = 123456789012
models = pw
methods = dbs, mrt
sus_alpha = 0.4
aperture_eta = 0.9
element_spacing = 0.05
workers = 2
bench_warmup = 1
bench_repetitions = 5
)");
  CHECK(cfg.num_users == 12);
  CHECK(cfg.antenna_counts == std::vector<std::size_t>{16, 32});
  CHECK(cfg.snr_grid_db == std::vector<double>{0, 10});
  CHECK(cfg.distance_range == std::pair{5.0, 50.0});
  CHECK(cfg.angle_range == std::pair{-0.5, 0.5});
  CHECK(cfg.trials == 4);
  CHECK(cfg.seed == 123456789012ULL);
  CHECK(cfg.models == std::vector<ChannelModel>{ChannelModel::kPlane});
  CHECK(cfg.methods == std::vector<Method>{Method::kDbs, Method::kMrt});
  CHECK(cfg.sus_alpha == 0.4);
  CHECK(cfg.aperture_eta == 0.9);
  CHECK(cfg.element_spacing == 0.05);
  CHECK(cfg.workers == 2);
  CHECK(cfg.bench_warmup == 1);
  CHECK(cfg.bench_repetitions == 5);
  CHECK_NOTHROW(cfg.validate());

  apply_config_value(cfg, "distance_range", "auto");
  CHECK_FALSE(cfg.distance_range.has_value());

  CampaignConfig fresh;
  CHECK_THROWS_AS(apply_config_text(fresh, "colour = red\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(fresh, "trials 4\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(fresh, "trials = four\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(fresh, "models = sw, xx\n"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_text(fresh, "angle_range = 1\n"), std::invalid_argument);

  CampaignConfig invalid;
  invalid.trials = 0;
  CHECK_THROWS_AS(invalid.validate(), std::invalid_argument);
  invalid = {};
  invalid.angle_range = {-2.0, 0.0};
  CHECK_THROWS_AS(invalid.validate(), std::invalid_argument);

  CHECK(CampaignConfig::preset("paper").antenna_counts == std::vector<std::size_t>{1000});
  CHECK(CampaignConfig::preset("desk").num_users == 200);
  CHECK_THROWS_AS(CampaignConfig::preset("huge"), std::invalid_argument);
  CHECK_THROWS_AS(load_config_file("/nonexistent/cfg.txt"), std::runtime_error);
}

TEST_CASE("timing benchmark guards") {
  CampaignConfig cfg = small_config();
  cfg.trials = 20;
  cfg.models = {ChannelModel::kSpherical};
  cfg.methods = {Method::kDbs, Method::kSus};
  cfg.snr_grid_db = {10};
  cfg.bench_warmup = 1;
  const auto rows = benchmark_timing(cfg);
  CHECK(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.samples == 20);
    CHECK(r.median_ms > 0.0);
    CHECK(r.num_users == cfg.num_users);
  }
  cfg.workers = 2;
  CHECK_THROWS_AS(benchmark_timing(cfg), std::invalid_argument);
  cfg.workers = 1;
  cfg.trials = 19;
  CHECK_THROWS_AS(benchmark_timing(cfg), std::invalid_argument);
}
