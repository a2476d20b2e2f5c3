#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "xlmimo/nearfield.hpp"
#include "xlmimo/simharness.hpp"

namespace py = pybind11;
using namespace xlmimo;

namespace {

ChannelSet channel_set(const std::vector<UserPosition>& users, const ArrayConfig& cfg,
                       ChannelModel model) {
  return build_channels(users, cfg, model);
}

}  // namespace

PYBIND11_MODULE(_xlmimo, m) {
  m.doc() = "XL-MIMO downlink user scheduling: channels, precoders, schedulers, near-field analysis.";

  py::enum_<ChannelModel>(m, "ChannelModel")
      .value("SW", ChannelModel::kSpherical)
      .value("PW", ChannelModel::kPlane);

  py::enum_<Method>(m, "Method")
      .value("DBS", Method::kDbs)
      .value("DBS_S", Method::kDbsSimplified)
      .value("SUS", Method::kSus)
      .value("MRT", Method::kMrt);

  py::class_<ArrayConfig>(m, "ArrayConfig")
      .def(py::init<>())
      .def_readwrite("num_antennas", &ArrayConfig::num_antennas)
      .def_readwrite("element_spacing", &ArrayConfig::element_spacing)
      .def_readwrite("wavelength", &ArrayConfig::wavelength)
      .def_readwrite("ref_power", &ArrayConfig::ref_power)
      .def_readwrite("noise_power", &ArrayConfig::noise_power)
      .def_readwrite("tx_power", &ArrayConfig::tx_power)
      .def("validate", &ArrayConfig::validate)
      .def_static("with_snr_db", &ArrayConfig::with_snr_db, py::arg("num_antennas"),
                  py::arg("snr_db"), py::arg("element_spacing") = 0.0628);

  py::class_<UserPosition>(m, "UserPosition")
      .def(py::init<>())
      .def(py::init([](double r, double theta) { return UserPosition{r, theta}; }),
           py::arg("distance"), py::arg("angle"))
      .def_readwrite("distance", &UserPosition::distance)
      .def_readwrite("angle", &UserPosition::angle)
      .def("__repr__", [](const UserPosition& u) {
        return "UserPosition(distance=" + std::to_string(u.distance) +
               ", angle=" + std::to_string(u.angle) + ")";
      });

  m.def("element_distance", &element_distance, py::arg("user"), py::arg("cfg"), py::arg("m"));
  m.def("steering_vector", &steering_vector, py::arg("user"), py::arg("cfg"),
        py::arg("model") = ChannelModel::kSpherical);
  m.def("critical_distance", &critical_distance, py::arg("cfg"));
  m.def(
      "channel_matrix",
      [](const std::vector<UserPosition>& users, const ArrayConfig& cfg, ChannelModel model) {
        return channel_set(users, cfg, model).matrix;
      },
      py::arg("users"), py::arg("cfg"), py::arg("model") = ChannelModel::kSpherical);

  m.def(
      "zf_precoders",
      [](const CMatrix& channels) { return zf_precoders(channels).columns; },
      py::arg("channels"), "Unit-norm ZF precoders as columns; raises on rank deficiency.");
  m.def("mrt_precoder", &mrt_precoder, py::arg("channel"));
  m.def(
      "waterfill",
      [](const std::vector<double>& gains, double noise, double budget) {
        const PowerAllocation a = waterfill(gains, noise, budget);
        return py::make_tuple(a.powers, a.water_level);
      },
      py::arg("gains"), py::arg("noise"), py::arg("budget"), "Returns (powers, water_level).");
  m.def(
      "sum_rate",
      [](const CMatrix& precoders, const std::vector<double>& powers, const CMatrix& channels,
         double noise) {
        PrecoderSet set{precoders, {}};
        for (Eigen::Index j = 0; j < precoders.cols(); ++j) set.user_ids.push_back(static_cast<std::size_t>(j));
        return sum_rate(set, powers, channels, noise);
      },
      py::arg("precoders"), py::arg("powers"), py::arg("channels"), py::arg("noise"));
  m.def("equivalent_distance", &equivalent_distance_from_interference, py::arg("distance"),
        py::arg("interference"), py::arg("num_antennas"));

  py::register_exception<RankDeficientError>(m, "RankDeficientError", PyExc_ValueError);

  py::class_<ScheduleResult>(m, "ScheduleResult")
      .def_readonly("served", &ScheduleResult::served)
      .def_property_readonly("powers", [](const ScheduleResult& r) { return r.powers.powers; })
      .def_property_readonly("precoders", [](const ScheduleResult& r) { return r.precoders.columns; })
      .def_property_readonly("sum_rate", [](const ScheduleResult& r) { return r.report.sum_rate; })
      .def_property_readonly("per_user_rate", [](const ScheduleResult& r) { return r.report.per_user_rate; })
      .def_readonly("iterations", &ScheduleResult::iterations)
      .def_readonly("rate_trajectory", &ScheduleResult::rate_trajectory)
      .def_readonly("elapsed_seconds", &ScheduleResult::elapsed_seconds);

  m.def(
      "schedule",
      [](Method method, const std::vector<UserPosition>& users, const ArrayConfig& cfg,
         ChannelModel model, double sus_alpha) {
        SchedulerOptions options;
        options.sus_alpha = sus_alpha;
        return run_scheduler(method, channel_set(users, cfg, model), cfg, options);
      },
      py::arg("method"), py::arg("users"), py::arg("cfg"),
      py::arg("model") = ChannelModel::kSpherical, py::arg("sus_alpha") = 1.0);
  m.def(
      "exhaustive_schedule",
      [](const std::vector<UserPosition>& users, const ArrayConfig& cfg, ChannelModel model) {
        return exhaustive_schedule(channel_set(users, cfg, model), cfg);
      },
      py::arg("users"), py::arg("cfg"), py::arg("model") = ChannelModel::kSpherical);

  m.def("aperture_phi", &aperture_phi, py::arg("user"), py::arg("cfg"));
  m.def("concentration_metric", &concentration_metric, py::arg("user"), py::arg("cfg"));
  m.def("effective_aperture", &effective_aperture, py::arg("user"), py::arg("cfg"),
        py::arg("fraction") = 0.95);

  py::class_<KernelGeometry>(m, "KernelGeometry")
      .def(py::init(&make_kernel_geometry), py::arg("near_distance"), py::arg("far_distance"),
           py::arg("m_prime"), py::arg("cfg"))
      .def_readonly("near_distance", &KernelGeometry::near_distance)
      .def_readonly("far_distance", &KernelGeometry::far_distance)
      .def_readonly("m_prime", &KernelGeometry::m_prime)
      .def_readonly("near_norm", &KernelGeometry::near_norm);

  py::class_<AngleModel>(m, "AngleModel")
      .def(py::init([](double half_width) { return AngleModel{half_width}; }),
           py::arg("half_width") = 1.5707963267948966)
      .def_readonly("half_width", &AngleModel::half_width);

  m.def("interference_kernel", &interference_kernel, py::arg("theta_j"), py::arg("geometry"),
        py::arg("cfg"));
  m.def("semiorth_prob_bound", &semiorth_prob_bound, py::arg("alpha"), py::arg("geometry"),
        py::arg("cfg"), py::arg("angles") = AngleModel{});
  m.def(
      "semiorth_prob_mc",
      [](double alpha, const KernelGeometry& g, const ArrayConfig& cfg, const AngleModel& angles,
         std::size_t samples, std::uint64_t seed) {
        const auto e = semiorth_prob_mc(alpha, g, cfg, angles, samples, seed);
        return py::make_tuple(e.estimate, e.standard_error);
      },
      py::arg("alpha"), py::arg("geometry"), py::arg("cfg"), py::arg("angles") = AngleModel{},
      py::arg("samples") = 100000, py::arg("seed") = 1, "Returns (estimate, standard_error).");

  py::class_<CampaignConfig>(m, "CampaignConfig")
      .def(py::init<>())
      .def_static("preset", &CampaignConfig::preset, py::arg("name"))
      .def_readwrite("num_users", &CampaignConfig::num_users)
      .def_readwrite("antenna_counts", &CampaignConfig::antenna_counts)
      .def_readwrite("snr_grid_db", &CampaignConfig::snr_grid_db)
      .def_readwrite("distance_range", &CampaignConfig::distance_range)
      .def_readwrite("angle_range", &CampaignConfig::angle_range)
      .def_readwrite("trials", &CampaignConfig::trials)
      .def_readwrite("seed", &CampaignConfig::seed)
      .def_readwrite("models", &CampaignConfig::models)
      .def_readwrite("methods", &CampaignConfig::methods)
      .def_readwrite("sus_alpha", &CampaignConfig::sus_alpha)
      .def_readwrite("workers", &CampaignConfig::workers)
      .def("set", [](CampaignConfig& c, const std::string& key, const std::string& value) {
        apply_config_value(c, key, value);
      });

  m.def(
      "generate_users",
      [](const CampaignConfig& cfg, std::size_t num_antennas, std::uint64_t trial) {
        return generate_scenario(cfg, num_antennas, trial).users;
      },
      py::arg("cfg"), py::arg("num_antennas"), py::arg("trial"));
  m.def(
      "run_campaign_csv",
      [](const CampaignConfig& cfg) {
        CampaignResult result;
        {
          py::gil_scoped_release release;
          result = run_campaign(cfg);
        }
        return campaign_csv(result);
      },
      py::arg("cfg"), "Runs the campaign and returns the CSV text.");
  m.attr("CAMPAIGN_CSV_HEADER") = std::string(kCampaignCsvHeader);
}
