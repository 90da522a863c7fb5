#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "vtoldock/landing_env.hpp"
#include "vtoldock/mlp.hpp"
#include "vtoldock/records.hpp"
#include "vtoldock/replay_buffer.hpp"
#include "vtoldock/rng.hpp"

namespace vtoldock::agents {

enum class DqnVariant { dqn, double_dqn, dueling };

const char* to_string(DqnVariant v);

// epsilon(e) = max(eps_f, eps0 * decay_rate^e) for episode index e >= 0.
struct EpsilonSchedule {
  double eps0 = 1.0;
  double eps_f = 0.05;
  double decay_rate = 0.96324;  // reaches eps_f after ~80 episodes

  double value(int episode) const;
  void validate() const;
  // Decay rate such that eps0 * rate^episodes == eps_f.
  static EpsilonSchedule reaching(double eps0, double eps_f, int episodes);
};

struct DqnConfig {
  DqnVariant variant = DqnVariant::dqn;
  double lr = 1e-3;
  int batch_size = 64;
  double gamma = 0.995;
  int capacity = 10000;
  int sync_every = 10;    // learner steps between target blends
  double soft_tau = 0.8;
  double grad_clip = 1.0;  // <= 0 disables clipping
  int warm_start = 200;
  EpsilonSchedule epsilon = EpsilonSchedule::reaching(1.0, 0.05, 80);
  std::vector<int> hidden = {32, 32, 16};
  std::array<double, 2> input_scale = {0.2, 0.5};  // multiplies (e_z, zdot)

  void validate() const;
};

struct DiscreteTransition {
  std::array<double, 2> s;
  int a = 0;
  double r = 0.0;
  std::array<double, 2> s_next;
  bool done = false;
};

// First index of the maximum; ties resolve to the lowest index.
int greedy_action(const Eigen::VectorXd& q);

int select_action(const nn::Mlp& net, std::span<const double> obs,
                  double epsilon, Rng& rng);

// Bootstrap targets. Terminal: r. dqn/dueling: r + gamma max_a' Q_target(s', a').
// double: r + gamma Q_target(s', argmax_a' Q_prediction(s', a')).
Eigen::VectorXd compute_targets(std::span<const DiscreteTransition> batch,
                                const nn::Mlp& prediction,
                                const nn::Mlp& target, double gamma,
                                DqnVariant variant);

struct BatchLoss {
  double loss = 0.0;
  nn::Gradients grads;
};

// Mean squared error between `targets` and Q(s_j, a_j); the gradient flows
// only through the taken action's output.
BatchLoss td_loss(const nn::Mlp& prediction,
                  std::span<const DiscreteTransition> batch,
                  const Eigen::VectorXd& targets);

// One clipped SGD step on a given batch. Returns the pre-update loss.
double fit_batch(const DqnConfig& config, nn::Mlp& prediction,
                 const nn::Mlp& target,
                 std::span<const DiscreteTransition> batch);

// Samples a minibatch and calls fit_batch. Returns nullopt (and leaves the
// network untouched) while the buffer holds fewer than warm_start items.
std::optional<double> learn_step(const DqnConfig& config,
                                 const ReplayBuffer<DiscreteTransition>& buffer,
                                 nn::Mlp& prediction, const nn::Mlp& target,
                                 Rng& rng);

nn::Mlp make_q_network(const DqnConfig& config, std::uint64_t seed);

struct DqnRun {
  nn::Mlp network;
  std::vector<EpisodeRecord> log;
  std::size_t learn_steps = 0;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

DqnRun train_dqn(const DqnConfig& config, const env::EnvConfig& env_config,
                 int episodes, std::uint64_t seed,
                 const EpisodeCallback& on_episode = {});

// Seed of the platform realization used for `episode` of a run seeded `seed`.
std::uint64_t episode_wave_seed(std::uint64_t seed, int episode);

}  // namespace vtoldock::agents
