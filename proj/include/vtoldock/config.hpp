#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vtoldock/landing_env.hpp"
#include "vtoldock/ppo.hpp"
#include "vtoldock/value_agents.hpp"

namespace vtoldock {

enum class AgentKind { dqn, double_dqn, dueling, ppo };

const char* to_string(AgentKind agent);
// Accepts "dqn", "double", "dueling" or "ppo"; throws ConfigError otherwise.
AgentKind parse_agent(const std::string& name);

struct EvalSettings {
  int episodes = 50;
  std::uint64_t seed = 20240101;
  double success_threshold = 2.5;  // impact velocity bound for a success [m/s]
  int timing_passes = 10000;

  void validate() const;
};

// Everything a training or evaluation invocation needs. The DQN variant is
// taken from `agent` when the run is dispatched.
struct RunConfig {
  AgentKind agent = AgentKind::ppo;
  int episodes = 500;
  std::vector<std::uint64_t> seeds = {1};
  std::filesystem::path output_dir = "runs";
  env::EnvConfig env;
  agents::DqnConfig dqn;
  agents::PpoConfig ppo;
  EvalSettings evaluation;

  // Throws ConfigError naming every offending field.
  void validate() const;
  agents::DqnConfig dqn_for_agent() const;
};

// JSON text with every field present (defaults filled in).
std::string to_json(const RunConfig& config);

// Starts from the defaults and overrides the keys present in `text`.
// Unknown keys and type mismatches raise ConfigError naming the key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace vtoldock
