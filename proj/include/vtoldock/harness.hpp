#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vtoldock/config.hpp"
#include "vtoldock/landing_env.hpp"
#include "vtoldock/mlp.hpp"
#include "vtoldock/records.hpp"

namespace vtoldock::harness {

// ---------------------------------------------------------------------------
// Training

struct TrainOutputs {
  std::filesystem::path log_csv;
  std::filesystem::path weights;         // prediction net or PPO actor
  std::filesystem::path critic_weights;  // PPO only, empty otherwise
  std::filesystem::path config_json;     // effective configuration
  std::vector<EpisodeRecord> log;
};

// File stem "<agent>_seed<seed>" shared by every artifact of one run.
std::string run_stem(AgentKind agent, std::uint64_t seed);

// Trains one seed and writes its artifacts under config.output_dir. Every
// file is written atomically; if any write fails the files already written
// by this call are removed before the exception propagates.
TrainOutputs run_training(const RunConfig& config, std::uint64_t seed,
                          const agents::EpisodeCallback& on_episode = {});

// ---------------------------------------------------------------------------
// Evaluation

// Maps the current environment state to a control U.
using Policy = std::function<double(const env::EnvState&, const env::LandingEnv&)>;

// Greedy policy for value nets (epsilon = 0), mean action for Gaussian actors.
Policy frozen_policy(const nn::Mlp& net);

struct EpisodeEval {
  int episode = 0;
  bool landed = false;
  bool success = false;
  double impact_velocity = 0.0;  // NaN unless landed
  double time_to_land = 0.0;     // contact integration step * dt; NaN unless landed
  int steps = 0;
  double total_reward = 0.0;
};

struct EvalReport {
  double mean_impact_velocity = 0.0;  // over landed episodes, NaN if none
  double mean_time_to_land = 0.0;     // over landed episodes, NaN if none
  double success_rate = 0.0;
  double landed_rate = 0.0;
  double median_inference_ms = 0.0;   // NaN when no network was timed
  std::vector<EpisodeEval> episodes;
};

// Runs settings.episodes fresh-wave episodes. Episode k uses the platform
// realization episode_wave_seed(settings.seed, k).
EvalReport evaluate_policy(const Policy& policy, const env::EnvConfig& env_config,
                           const EvalSettings& settings);

// evaluate_policy with frozen_policy(net) plus inference timing.
EvalReport evaluate(const nn::Mlp& net, const env::EnvConfig& env_config,
                    const EvalSettings& settings);

// Median wall-clock time of `passes` single-state forward calls [ms].
double median_inference_ms(const nn::Mlp& net, int passes);

// Per-episode table; deterministic (timing is kept out of it).
std::string eval_csv(const EvalReport& report);
// Aggregates as a JSON object.
std::string eval_summary_json(const EvalReport& report);

// ---------------------------------------------------------------------------
// Reporting

struct Smoothed {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation of the window
};

// Centered window covering [i - (w-1)/2, i + w/2], truncated at the edges.
// NaN samples are skipped; a window without finite samples yields NaN.
// Throws std::invalid_argument for window < 1.
Smoothed moving_average(std::span<const double> series, int window);

// Writes per-figure CSVs (x, mean, std) for every training log found in
// `run_dir` into `out_dir`, plus a long-format reward comparison keyed by
// agent and the wave/spectrum panels. Everything is computed before the
// first file is written, so a failure leaves out_dir untouched. Returns the
// files written.
std::vector<std::filesystem::path> export_plots(const std::filesystem::path& run_dir,
                                                const std::filesystem::path& out_dir,
                                                int window = 20);

struct WaveTables {
  std::string wave_csv;      // t, z_w, zdot_w
  std::string spectrum_csv;  // f, S, S_platform (S scaled as the platform signal)
};

// Platform realization (as seen by the environment) and the spectrum.
WaveTables simulate_wave(const env::EnvConfig& env_config, std::uint64_t seed,
                         double duration);

}  // namespace vtoldock::harness
