#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vtoldock/config.hpp"
#include "vtoldock/errors.hpp"
#include "vtoldock/harness.hpp"
#include "vtoldock/io.hpp"
#include "vtoldock/mlp.hpp"

using namespace vtoldock;
namespace fs = std::filesystem;

namespace {

// Exit codes: 0 ok, 1 runtime failure, 2 invalid configuration or input.
constexpr int kRuntimeFailure = 1;
constexpr int kBadInput = 2;

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

int train(const std::string& config_path, const std::optional<std::string>& agent,
          const std::optional<std::uint64_t>& seed, const std::optional<int>& episodes,
          const std::optional<std::string>& out, bool quiet) {
  RunConfig cfg = config_or_default(config_path);
  if (agent) cfg.agent = parse_agent(*agent);
  if (seed) cfg.seeds = {*seed};
  if (episodes) cfg.episodes = *episodes;
  if (out) cfg.output_dir = *out;
  cfg.validate();
  for (const std::uint64_t s : cfg.seeds) {
    const auto progress = [&](const EpisodeRecord& r) {
      if (quiet || (r.episode % 50 != 0 && r.episode != cfg.episodes)) return;
      std::fprintf(stderr, "%s seed %llu episode %d/%d reward %.3f steps %d%s\n",
                   to_string(cfg.agent), static_cast<unsigned long long>(s), r.episode,
                   cfg.episodes, r.total_reward, r.steps, r.landed ? " landed" : "");
    };
    const auto result = harness::run_training(cfg, s, progress);
    std::cout << result.log_csv.string() << '\n' << result.weights.string() << '\n';
    if (!result.critic_weights.empty()) std::cout << result.critic_weights.string() << '\n';
  }
  return 0;
}

int evaluate(const std::string& weights, const std::string& config_path,
             const std::optional<int>& episodes, const std::optional<std::uint64_t>& seed,
             const std::string& csv_out) {
  RunConfig cfg = config_or_default(config_path);
  if (episodes) cfg.evaluation.episodes = *episodes;
  if (seed) cfg.evaluation.seed = *seed;
  cfg.validate();
  const nn::Mlp net = nn::load(weights);
  const auto report = harness::evaluate(net, cfg.env, cfg.evaluation);
  if (!csv_out.empty()) io::write_file_atomic(csv_out, harness::eval_csv(report));
  std::cout << harness::eval_summary_json(report);
  return 0;
}

int simulate_wave(const std::string& config_path, std::uint64_t seed, double duration,
                  const std::string& out) {
  const RunConfig cfg = config_or_default(config_path);
  cfg.env.validate();
  const auto tables = harness::simulate_wave(cfg.env, seed, duration);
  fs::create_directories(out);
  const fs::path wave = fs::path(out) / "wave.csv";
  const fs::path spectrum = fs::path(out) / "spectrum.csv";
  io::write_file_atomic(wave, tables.wave_csv);
  io::write_file_atomic(spectrum, tables.spectrum_csv);
  std::cout << wave.string() << '\n' << spectrum.string() << '\n';
  return 0;
}

int export_plots(const std::string& run_dir, const std::string& out, int window) {
  const fs::path dest = out.empty() ? fs::path(run_dir) / "plots" : fs::path(out);
  for (const auto& p : harness::export_plots(run_dir, dest, window)) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wave-disturbed VTOL landing: training, evaluation and wave synthesis"};
  app.require_subcommand(1);

  auto* tr = app.add_subcommand("train", "train one agent for every configured seed");
  std::string tr_config;
  std::optional<std::string> tr_agent, tr_out;
  std::optional<std::uint64_t> tr_seed;
  std::optional<int> tr_episodes;
  bool tr_quiet = false;
  tr->add_option("--config", tr_config, "JSON configuration (defaults when omitted)")
      ->check(CLI::ExistingFile);
  tr->add_option("--agent", tr_agent, "dqn, double, dueling or ppo");
  tr->add_option("--seed", tr_seed, "single seed, replaces the configured list");
  tr->add_option("--episodes", tr_episodes, "training episodes");
  tr->add_option("--out", tr_out, "output directory");
  tr->add_flag("--quiet", tr_quiet, "suppress progress lines");

  auto* ev = app.add_subcommand("evaluate", "run a frozen network on fresh waves");
  std::string ev_weights, ev_config, ev_csv;
  std::optional<int> ev_episodes;
  std::optional<std::uint64_t> ev_seed;
  ev->add_option("--weights", ev_weights, "weights file")->required()->check(CLI::ExistingFile);
  ev->add_option("--config", ev_config, "JSON configuration")->check(CLI::ExistingFile);
  ev->add_option("--episodes", ev_episodes, "evaluation episodes");
  ev->add_option("--seed", ev_seed, "evaluation seed");
  ev->add_option("--csv", ev_csv, "write the per-episode table here");

  auto* sw = app.add_subcommand("simulate-wave", "write one platform realization and its spectrum");
  std::string sw_config, sw_out = ".";
  std::uint64_t sw_seed = 1;
  double sw_duration = 60.0;
  sw->add_option("--config", sw_config, "JSON configuration")->check(CLI::ExistingFile);
  sw->add_option("--seed", sw_seed, "realization seed");
  sw->add_option("--duration", sw_duration, "duration [s]");
  sw->add_option("--out", sw_out, "directory for wave.csv and spectrum.csv");

  auto* ep = app.add_subcommand("export-plots", "smooth training logs into figure-ready CSVs");
  std::string ep_dir, ep_out;
  int ep_window = 20;
  ep->add_option("dir", ep_dir, "directory holding training logs")->required()
      ->check(CLI::ExistingDirectory);
  ep->add_option("--out", ep_out, "output directory (default <dir>/plots)");
  ep->add_option("--window", ep_window, "moving-average window")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tr) return train(tr_config, tr_agent, tr_seed, tr_episodes, tr_out, tr_quiet);
    if (*ev) return evaluate(ev_weights, ev_config, ev_episodes, ev_seed, ev_csv);
    if (*sw) return simulate_wave(sw_config, sw_seed, sw_duration, sw_out);
    if (*ep) return export_plots(ep_dir, ep_out, ep_window);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return 0;
}
