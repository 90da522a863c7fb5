#include "vtoldock/value_agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vtoldock/errors.hpp"

namespace vtoldock::agents {

const char* to_string(DqnVariant v) {
  switch (v) {
    case DqnVariant::dqn: return "dqn";
    case DqnVariant::double_dqn: return "double";
    case DqnVariant::dueling: return "dueling";
  }
  return "unknown";
}

double EpsilonSchedule::value(int episode) const {
  return std::max(eps_f, eps0 * std::pow(decay_rate, episode));
}

void EpsilonSchedule::validate() const {
  std::ostringstream bad;
  if (!(eps0 > 0.0 && eps0 <= 1.0)) bad << " epsilon.eps0=" << eps0;
  if (!(eps_f > 0.0 && eps_f <= eps0)) bad << " epsilon.eps_f=" << eps_f;
  if (!(decay_rate > 0.0 && decay_rate <= 1.0)) bad << " epsilon.decay_rate=" << decay_rate;
  if (!bad.str().empty()) throw ConfigError("invalid epsilon schedule:" + bad.str());
}

EpsilonSchedule EpsilonSchedule::reaching(double eps0, double eps_f, int episodes) {
  EpsilonSchedule s;
  s.eps0 = eps0;
  s.eps_f = eps_f;
  s.decay_rate = std::pow(eps_f / eps0, 1.0 / std::max(episodes, 1));
  return s;
}

void DqnConfig::validate() const {
  epsilon.validate();
  std::ostringstream bad;
  if (!(lr > 0.0)) bad << " dqn.lr=" << lr;
  if (batch_size < 1) bad << " dqn.batch_size=" << batch_size;
  if (!(gamma > 0.0 && gamma <= 1.0)) bad << " dqn.gamma=" << gamma;
  if (capacity < 1) bad << " dqn.capacity=" << capacity;
  if (sync_every < 1) bad << " dqn.sync_every=" << sync_every;
  if (!(soft_tau > 0.0 && soft_tau <= 1.0)) bad << " dqn.soft_tau=" << soft_tau;
  if (!(batch_size <= warm_start && warm_start <= capacity))
    bad << " dqn.warm_start=" << warm_start << " (need batch_size <= warm_start <= capacity)";
  if (hidden.empty()) bad << " dqn.hidden=[]";
  for (int h : hidden)
    if (h < 1) bad << " dqn.hidden=" << h;
  if (!(input_scale[0] > 0.0 && input_scale[1] > 0.0)) bad << " dqn.input_scale";
  if (!bad.str().empty()) throw ConfigError("invalid DQN configuration:" + bad.str());
}

int greedy_action(const Eigen::VectorXd& q) {
  int best = 0;
  for (int i = 1; i < q.size(); ++i)
    if (q(i) > q(best)) best = i;
  return best;
}

int select_action(const nn::Mlp& net, std::span<const double> obs,
                  double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, net.action_dim() - 1);
    return pick(rng);
  }
  return greedy_action(net.forward(obs));
}

namespace {

Eigen::MatrixXd stack_states(std::span<const DiscreteTransition> batch, bool next) {
  Eigen::MatrixXd m(2, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto& s = next ? batch[j].s_next : batch[j].s;
    m(0, static_cast<Eigen::Index>(j)) = s[0];
    m(1, static_cast<Eigen::Index>(j)) = s[1];
  }
  return m;
}

}  // namespace

Eigen::VectorXd compute_targets(std::span<const DiscreteTransition> batch,
                                const nn::Mlp& prediction,
                                const nn::Mlp& target, double gamma,
                                DqnVariant variant) {
  if (batch.empty()) throw std::invalid_argument("compute_targets: empty batch");
  const Eigen::MatrixXd next = stack_states(batch, true);
  const Eigen::MatrixXd q_target = target.forward_batch(next);
  Eigen::MatrixXd q_pred;
  if (variant == DqnVariant::double_dqn) q_pred = prediction.forward_batch(next);

  Eigen::VectorXd y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto& t = batch[j];
    if (t.done) {
      y(jj) = t.r;
      continue;
    }
    double bootstrap;
    if (variant == DqnVariant::double_dqn) {
      const int a_star = greedy_action(q_pred.col(jj));
      bootstrap = q_target(a_star, jj);
    } else {
      bootstrap = q_target.col(jj).maxCoeff();
    }
    y(jj) = t.r + gamma * bootstrap;
  }
  return y;
}

BatchLoss td_loss(const nn::Mlp& prediction,
                  std::span<const DiscreteTransition> batch,
                  const Eigen::VectorXd& targets) {
  const Eigen::MatrixXd states = stack_states(batch, false);
  const Eigen::MatrixXd q = prediction.forward_batch(states);
  const double n = static_cast<double>(batch.size());
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), q.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double err = targets(jj) - q(batch[j].a, jj);
    loss += err * err;
    upstream(batch[j].a, jj) = -2.0 * err / n;
  }
  return {loss / n, prediction.backward(states, upstream)};
}

double fit_batch(const DqnConfig& config, nn::Mlp& prediction,
                 const nn::Mlp& target,
                 std::span<const DiscreteTransition> batch) {
  const Eigen::VectorXd y =
      compute_targets(batch, prediction, target, config.gamma, config.variant);
  auto [loss, grads] = td_loss(prediction, batch, y);
  if (!std::isfinite(loss) || !grads.all_finite())
    throw NumericalFault("non-finite DQN loss or gradient");
  std::optional<double> clip;
  if (config.grad_clip > 0.0) clip = config.grad_clip;
  nn::sgd_step(prediction, std::move(grads), config.lr, clip);
  return loss;
}

std::optional<double> learn_step(const DqnConfig& config,
                                 const ReplayBuffer<DiscreteTransition>& buffer,
                                 nn::Mlp& prediction, const nn::Mlp& target,
                                 Rng& rng) {
  if (buffer.size() < static_cast<std::size_t>(config.warm_start)) return std::nullopt;
  const auto batch = buffer.sample(static_cast<std::size_t>(config.batch_size), rng);
  return fit_batch(config, prediction, target, batch);
}

nn::Mlp make_q_network(const DqnConfig& config, std::uint64_t seed) {
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(env::kNumDiscreteActions);
  nn::HeadSpec head;
  head.type = config.variant == DqnVariant::dueling ? nn::HeadType::dueling
                                                    : nn::HeadType::linear;
  nn::Mlp net(sizes, head, seed);
  net.set_input_scale(Eigen::Vector2d(config.input_scale[0], config.input_scale[1]));
  return net;
}

std::uint64_t episode_wave_seed(std::uint64_t seed, int episode) {
  return mix_seed(mix_seed(seed, 4), static_cast<std::uint64_t>(episode));
}

DqnRun train_dqn(const DqnConfig& config, const env::EnvConfig& env_config,
                 int episodes, std::uint64_t seed,
                 const EpisodeCallback& on_episode) {
  config.validate();
  if (episodes < 1) throw ConfigError("invalid run: episodes must be >= 1");

  env::LandingEnv env(env_config);
  nn::Mlp prediction = make_q_network(config, mix_seed(seed, 1));
  nn::Mlp target = prediction;
  ReplayBuffer<DiscreteTransition> buffer(static_cast<std::size_t>(config.capacity));
  Rng action_rng(mix_seed(seed, 2));
  Rng replay_rng(mix_seed(seed, 3));

  DqnRun run;
  run.log.reserve(static_cast<std::size_t>(episodes));

  for (int e = 0; e < episodes; ++e) {
    const double eps = config.epsilon.value(e);
    env::EnvState state = env.reset(episode_wave_seed(seed, e));

    EpisodeRecord rec;
    rec.episode = e + 1;
    rec.epsilon = eps;
    rec.actor_loss = rec.critic_loss = std::numeric_limits<double>::quiet_NaN();
    rec.impact_velocity = std::numeric_limits<double>::quiet_NaN();
    double loss_sum = 0.0;
    int loss_count = 0;

    while (!env.done()) {
      const auto obs = state.observation();
      const int a = select_action(prediction, obs, eps, action_rng);
      const env::StepResult r = env.step_discrete(a);
      buffer.push({obs, a, r.reward, r.state.observation(), r.done});
      rec.total_reward += r.reward;
      ++rec.steps;
      state = r.state;
      if (r.done) {
        rec.landed = r.landed;
        rec.aborted = r.aborted;
        if (r.landed) rec.impact_velocity = r.impact_velocity;
      }

      std::optional<double> loss;
      try {
        loss = learn_step(config, buffer, prediction, target, replay_rng);
      } catch (const NumericalFault&) {
        rec.aborted = true;
        break;
      }
      if (loss) {
        loss_sum += *loss;
        ++loss_count;
        ++run.learn_steps;
        if (run.learn_steps % static_cast<std::size_t>(config.sync_every) == 0)
          nn::soft_update(target, prediction, config.soft_tau);
      }
    }
    rec.mean_loss = loss_count > 0 ? loss_sum / loss_count
                                   : std::numeric_limits<double>::quiet_NaN();
    run.log.push_back(rec);
    if (on_episode) on_episode(rec);
  }
  run.network = std::move(prediction);
  return run;
}

}  // namespace vtoldock::agents
