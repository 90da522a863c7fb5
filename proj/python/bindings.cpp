#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>
#include <vector>

#include "vtoldock/config.hpp"
#include "vtoldock/errors.hpp"
#include "vtoldock/harness.hpp"
#include "vtoldock/jonswap.hpp"
#include "vtoldock/landing_env.hpp"
#include "vtoldock/mlp.hpp"

namespace py = pybind11;
using namespace vtoldock;

namespace {

RunConfig config_from(const std::string& json) {
  return json.empty() ? RunConfig{} : parse_config(json);
}

py::dict step_dict(const env::StepResult& r) {
  py::dict d;
  d["e_z"] = r.state.e_z;
  d["zdot"] = r.state.zdot;
  d["reward"] = r.reward;
  d["done"] = r.done;
  d["landed"] = r.landed;
  d["aborted"] = r.aborted;
  d["impact_velocity"] = r.impact_velocity;
  d["control"] = r.control;
  return d;
}

py::dict report_dict(const harness::EvalReport& r) {
  py::dict d;
  d["mean_impact_velocity"] = r.mean_impact_velocity;
  d["mean_time_to_land"] = r.mean_time_to_land;
  d["success_rate"] = r.success_rate;
  d["landed_rate"] = r.landed_rate;
  d["median_inference_ms"] = r.median_inference_ms;
  py::list eps;
  for (const auto& e : r.episodes) {
    py::dict x;
    x["episode"] = e.episode;
    x["landed"] = e.landed;
    x["success"] = e.success;
    x["impact_velocity"] = e.impact_velocity;
    x["time_to_land"] = e.time_to_land;
    x["steps"] = e.steps;
    x["total_reward"] = e.total_reward;
    eps.append(x);
  }
  d["episodes"] = eps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core: wave synthesis, landing environment, training and evaluation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericalFault>(m, "NumericalFault", PyExc_RuntimeError);

  m.def("default_config", [] { return to_json(RunConfig{}); },
        "Default configuration as JSON text.");
  m.def("normalize_config", [](const std::string& json) { return to_json(parse_config(json)); },
        py::arg("config_json"), "Parse, fill in defaults and re-serialize.");

  m.def(
      "spectral_density",
      [](const std::vector<double>& f, const std::string& json) {
        const auto cfg = config_from(json);
        std::vector<double> out;
        out.reserve(f.size());
        for (double x : f) out.push_back(wave::spectral_density(cfg.env.wave.spectrum, x));
        return out;
      },
      py::arg("f"), py::arg("config_json") = "");

  m.def(
      "simulate_wave",
      [](const std::string& json, std::uint64_t seed, double duration) {
        const auto cfg = config_from(json);
        cfg.env.validate();
        if (!(duration > 0.0)) throw ConfigError("duration must be positive");
        const auto samples = static_cast<std::size_t>(duration / cfg.env.dt) + 1;
        const auto w = env::make_platform_wave(cfg.env.wave, (samples - 1) * cfg.env.dt,
                                               cfg.env.dt, seed);
        std::vector<double> t(w.size());
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = static_cast<double>(k) * w.dt;
        return py::make_tuple(t, w.z_w, w.zdot_w);
      },
      py::arg("config_json"), py::arg("seed"), py::arg("duration"),
      "Platform realization as (t, z_w, zdot_w) lists.");

  m.def(
      "moving_average",
      [](const std::vector<double>& x, int window) {
        auto s = harness::moving_average(x, window);
        return py::make_tuple(s.mean, s.std);
      },
      py::arg("series"), py::arg("window"));

  py::class_<env::LandingEnv>(m, "LandingEnv")
      .def(py::init([](const std::string& json) { return env::LandingEnv(config_from(json).env); }),
           py::arg("config_json") = "")
      .def("reset",
           [](env::LandingEnv& e, std::uint64_t seed) {
             const auto s = e.reset(seed);
             return py::make_tuple(s.e_z, s.zdot);
           },
           py::arg("seed"))
      .def("step", [](env::LandingEnv& e, double u) { return step_dict(e.step(u)); },
           py::arg("control"))
      .def("step_discrete", [](env::LandingEnv& e, int a) { return step_dict(e.step_discrete(a)); },
           py::arg("action"))
      .def("discrete_control", &env::LandingEnv::discrete_control, py::arg("action"))
      .def_property_readonly("time", &env::LandingEnv::time)
      .def_property_readonly("done", &env::LandingEnv::done)
      .def_property_readonly("steps", &env::LandingEnv::step_index);

  py::class_<nn::Mlp>(m, "Network")
      .def_static("load", [](const std::filesystem::path& p) { return nn::load(p); },
                  py::arg("path"))
      .def("forward",
           [](const nn::Mlp& net, double e_z, double zdot) {
             const std::array<double, 2> x{e_z, zdot};
             const Eigen::VectorXd y = net.forward(x);
             return std::vector<double>(y.data(), y.data() + y.size());
           },
           py::arg("e_z"), py::arg("zdot"))
      .def_property_readonly("head", [](const nn::Mlp& n) { return nn::to_string(n.head().type); })
      .def_property_readonly("parameter_count", &nn::Mlp::parameter_count)
      .def("save", [](const nn::Mlp& n, const std::filesystem::path& p) { nn::save(n, p); },
           py::arg("path"));

  m.def(
      "train",
      [](const std::string& json, std::uint64_t seed) {
        const auto cfg = config_from(json);
        harness::TrainOutputs out;
        {
          py::gil_scoped_release release;
          out = harness::run_training(cfg, seed);
        }
        py::dict d;
        d["log_csv"] = out.log_csv;
        d["weights"] = out.weights;
        d["critic_weights"] = out.critic_weights.empty() ? py::object(py::none())
                                                         : py::cast(out.critic_weights);
        d["config_json"] = out.config_json;
        py::list rewards;
        for (const auto& r : out.log) rewards.append(r.total_reward);
        d["rewards"] = rewards;
        return d;
      },
      py::arg("config_json"), py::arg("seed"),
      "Train one seed and write its artifacts to the configured output directory.");

  m.def(
      "evaluate",
      [](const std::filesystem::path& weights, const std::string& json, int episodes) {
        auto cfg = config_from(json);
        if (episodes > 0) cfg.evaluation.episodes = episodes;
        cfg.validate();
        const nn::Mlp net = nn::load(weights);
        harness::EvalReport r;
        {
          py::gil_scoped_release release;
          r = harness::evaluate(net, cfg.env, cfg.evaluation);
        }
        return report_dict(r);
      },
      py::arg("weights"), py::arg("config_json") = "", py::arg("episodes") = 0);

  m.def(
      "export_plots",
      [](const std::filesystem::path& run_dir, const std::filesystem::path& out, int window) {
        return harness::export_plots(run_dir, out, window);
      },
      py::arg("run_dir"), py::arg("out_dir"), py::arg("window") = 20);
}
