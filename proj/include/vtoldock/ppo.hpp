#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vtoldock/landing_env.hpp"
#include "vtoldock/mlp.hpp"
#include "vtoldock/records.hpp"
#include "vtoldock/rng.hpp"
#include "vtoldock/value_agents.hpp"

namespace vtoldock::agents {

struct PpoConfig {
  double lr_actor = 3e-4;
  double lr_critic = 3e-3;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip = 0.2;
  int horizon = 20;      // transitions collected between update phases
  int epochs = 4;
  int minibatch_size = 5;
  int capacity = 10000;
  double entropy_coef = 0.0;
  // Standardize advantages over each rollout before the update phase.
  bool normalize_advantages = false;
  double init_log_std = std::log(0.5 * 9.81);
  std::vector<int> hidden = {32, 32, 16};
  std::array<double, 2> input_scale = {0.2, 0.5};  // multiplies (e_z, zdot)

  void validate() const;
};

struct ActionSample {
  double control = 0.0;   // clamped to the actor's action range
  double raw = 0.0;       // pre-clamp Gaussian draw
  double log_prob = 0.0;  // log-density of `raw`
};

double gaussian_log_prob(double x, double mean, double log_std);

ActionSample sample_action(const nn::Mlp& actor, std::span<const double> obs,
                           Rng& rng);

// Deterministic action: the actor mean, clamped.
double mean_action(const nn::Mlp& actor, std::span<const double> obs);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> targets;  // advantages + values
};

// Backward recursion A_k = delta_k + gamma lambda (1 - done_k) A_{k+1} with
// delta_k = r_k + gamma (1 - done_k) V_{k+1} - V_k; `bootstrap` is V of the
// state following the last transition.
GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      const std::vector<bool>& dones, double bootstrap,
                      double gamma, double lambda);

struct RolloutBatch {
  Eigen::MatrixXd states;  // 2 x n
  std::vector<double> actions;  // raw (pre-clamp) actions
  std::vector<double> rewards;
  std::vector<double> log_probs;  // under the behavior policy
  std::vector<double> values;
  std::vector<bool> dones;
  std::vector<double> advantages;
  std::vector<double> targets;

  std::size_t size() const { return actions.size(); }
};

struct LossAndGrad {
  double loss = 0.0;
  nn::Gradients grads;
};

// Negated clipped surrogate over `indices`, ratio exp(logp_new - logp_old),
// minus entropy_coef times the policy entropy.
LossAndGrad ppo_loss(const nn::Mlp& actor, const RolloutBatch& batch,
                     std::span<const std::size_t> indices, double clip,
                     double entropy_coef = 0.0);

// Mean squared error between critic outputs and value targets.
LossAndGrad critic_loss(const nn::Mlp& critic, const RolloutBatch& batch,
                        std::span<const std::size_t> indices);

nn::Mlp make_actor(const PpoConfig& config, const env::EnvConfig& env_config,
                   std::uint64_t seed);
nn::Mlp make_critic(const PpoConfig& config, std::uint64_t seed);

struct UpdateStats {
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  int updates = 0;
};

// Computes GAE for `batch` and runs the epoch/minibatch update phase.
UpdateStats ppo_update(const PpoConfig& config, nn::Mlp& actor,
                       nn::Mlp& critic, RolloutBatch& batch,
                       double bootstrap, Rng& rng);

struct PpoRun {
  nn::Mlp actor;
  nn::Mlp critic;
  std::vector<EpisodeRecord> log;
};

PpoRun train_ppo(const PpoConfig& config, const env::EnvConfig& env_config,
                 int episodes, std::uint64_t seed,
                 const EpisodeCallback& on_episode = {});

}  // namespace vtoldock::agents
