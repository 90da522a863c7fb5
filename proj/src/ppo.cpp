#include "vtoldock/ppo.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vtoldock/errors.hpp"

namespace vtoldock::agents {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)

Eigen::MatrixXd gather_states(const RolloutBatch& batch,
                              std::span<const std::size_t> indices) {
  Eigen::MatrixXd m(batch.states.rows(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j)
    m.col(static_cast<Eigen::Index>(j)) = batch.states.col(static_cast<Eigen::Index>(indices[j]));
  return m;
}

}  // namespace

void PpoConfig::validate() const {
  std::ostringstream bad;
  if (!(lr_actor > 0.0)) bad << " ppo.lr_actor=" << lr_actor;
  if (!(lr_critic > 0.0)) bad << " ppo.lr_critic=" << lr_critic;
  if (!(gamma > 0.0 && gamma <= 1.0)) bad << " ppo.gamma=" << gamma;
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) bad << " ppo.gae_lambda=" << gae_lambda;
  if (!(clip > 0.0)) bad << " ppo.clip=" << clip;
  if (horizon < 1) bad << " ppo.horizon=" << horizon;
  if (epochs < 1) bad << " ppo.epochs=" << epochs;
  if (!(minibatch_size >= 1 && minibatch_size <= horizon))
    bad << " ppo.minibatch_size=" << minibatch_size << " (need 1 <= minibatch_size <= horizon)";
  if (capacity < horizon) bad << " ppo.capacity=" << capacity;
  if (!(entropy_coef >= 0.0)) bad << " ppo.entropy_coef=" << entropy_coef;
  if (!std::isfinite(init_log_std)) bad << " ppo.init_log_std=" << init_log_std;
  if (hidden.empty()) bad << " ppo.hidden=[]";
  for (int h : hidden)
    if (h < 1) bad << " ppo.hidden=" << h;
  if (!(input_scale[0] > 0.0 && input_scale[1] > 0.0)) bad << " ppo.input_scale";
  if (!bad.str().empty()) throw ConfigError("invalid PPO configuration:" + bad.str());
}

double gaussian_log_prob(double x, double mean, double log_std) {
  const double z = (x - mean) * std::exp(-log_std);
  return -0.5 * z * z - log_std - kHalfLog2Pi;
}

ActionSample sample_action(const nn::Mlp& actor, std::span<const double> obs,
                           Rng& rng) {
  const Eigen::VectorXd out = actor.forward(obs);
  const double mean = out(0);
  const double log_std = out(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample s;
  s.raw = mean + std::exp(log_std) * normal(rng);
  s.log_prob = gaussian_log_prob(s.raw, mean, log_std);
  s.control = std::clamp(s.raw, actor.head().action_low, actor.head().action_high);
  return s;
}

double mean_action(const nn::Mlp& actor, std::span<const double> obs) {
  const Eigen::VectorXd out = actor.forward(obs);
  return std::clamp(out(0), actor.head().action_low, actor.head().action_high);
}

GaeResult compute_gae(std::span<const double> rewards,
                      std::span<const double> values,
                      const std::vector<bool>& dones, double bootstrap,
                      double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n)
    throw std::invalid_argument("compute_gae: input lengths differ");
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double next_value = bootstrap;
  double next_adv = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * live * next_value - values[k];
    next_adv = delta + gamma * lambda * live * next_adv;
    out.advantages[k] = next_adv;
    out.targets[k] = next_adv + values[k];
    next_value = values[k];
  }
  return out;
}

LossAndGrad ppo_loss(const nn::Mlp& actor, const RolloutBatch& batch,
                     std::span<const std::size_t> indices, double clip,
                     double entropy_coef) {
  if (indices.empty()) throw std::invalid_argument("ppo_loss: empty minibatch");
  const Eigen::MatrixXd states = gather_states(batch, indices);
  const Eigen::MatrixXd out = actor.forward_batch(states);
  const double n = static_cast<double>(indices.size());
  Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(out.rows(), out.cols());

  double objective = 0.0;
  double entropy = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const std::size_t k = indices[j];
    const double mean = out(0, jj);
    const double log_std = out(1, jj);
    const double a = batch.actions[k];
    const double adv = batch.advantages[k];
    const double ratio = std::exp(gaussian_log_prob(a, mean, log_std) - batch.log_probs[k]);
    const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
    objective += std::min(ratio * adv, clipped * adv);
    entropy += log_std + 0.5 + kHalfLog2Pi;

    const bool saturated = (adv > 0.0 && ratio > 1.0 + clip) || (adv < 0.0 && ratio < 1.0 - clip);
    // d(-obj/n)/d logp = -adv * ratio / n on the unclipped branch.
    const double dlogp = saturated ? 0.0 : -adv * ratio / n;
    const double inv_var = std::exp(-2.0 * log_std);
    const double diff = a - mean;
    upstream(0, jj) = dlogp * diff * inv_var;
    upstream(1, jj) = dlogp * (diff * diff * inv_var - 1.0) - entropy_coef / n;
  }
  return {-objective / n - entropy_coef * entropy / n, actor.backward(states, upstream)};
}

LossAndGrad critic_loss(const nn::Mlp& critic, const RolloutBatch& batch,
                        std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("critic_loss: empty minibatch");
  const Eigen::MatrixXd states = gather_states(batch, indices);
  const Eigen::MatrixXd v = critic.forward_batch(states);
  const double n = static_cast<double>(indices.size());
  Eigen::MatrixXd upstream(1, v.cols());
  double loss = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double err = v(0, jj) - batch.targets[indices[j]];
    loss += err * err;
    upstream(0, jj) = 2.0 * err / n;
  }
  return {loss / n, critic.backward(states, upstream)};
}

nn::Mlp make_actor(const PpoConfig& config, const env::EnvConfig& env_config,
                   std::uint64_t seed) {
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  nn::HeadSpec head;
  head.type = nn::HeadType::gaussian;
  head.action_low = env_config.u_min;
  head.action_high = env_config.u_max;
  head.init_log_std = config.init_log_std;
  nn::Mlp net(sizes, head, seed);
  net.set_input_scale(Eigen::Vector2d(config.input_scale[0], config.input_scale[1]));
  return net;
}

nn::Mlp make_critic(const PpoConfig& config, std::uint64_t seed) {
  std::vector<int> sizes{2};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(1);
  nn::Mlp net(sizes, nn::HeadSpec{}, seed);
  net.set_input_scale(Eigen::Vector2d(config.input_scale[0], config.input_scale[1]));
  return net;
}

UpdateStats ppo_update(const PpoConfig& config, nn::Mlp& actor,
                       nn::Mlp& critic, RolloutBatch& batch,
                       double bootstrap, Rng& rng) {
  UpdateStats stats;
  const std::size_t n = batch.size();
  if (n == 0) return stats;

  const Eigen::MatrixXd v = critic.forward_batch(batch.states);
  batch.values.assign(v.data(), v.data() + n);
  auto gae = compute_gae(batch.rewards, batch.values, batch.dones, bootstrap,
                         config.gamma, config.gae_lambda);
  batch.advantages = std::move(gae.advantages);
  batch.targets = std::move(gae.targets);
  if (config.normalize_advantages && n > 1) {
    double mean = 0.0;
    for (double a : batch.advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double a : batch.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : batch.advantages) a = (a - mean) / (sd + 1e-8);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = std::min<std::size_t>(static_cast<std::size_t>(config.minibatch_size), n);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += mb) {
      const std::size_t len = std::min(mb, n - start);
      std::span<const std::size_t> idx(order.data() + start, len);

      auto c = critic_loss(critic, batch, idx);
      auto a = ppo_loss(actor, batch, idx, config.clip, config.entropy_coef);
      if (!std::isfinite(c.loss) || !std::isfinite(a.loss) || !c.grads.all_finite() ||
          !a.grads.all_finite())
        throw NumericalFault("non-finite PPO loss or gradient");
      nn::sgd_step(critic, std::move(c.grads), config.lr_critic);
      nn::sgd_step(actor, std::move(a.grads), config.lr_actor);
      stats.critic_loss += c.loss;
      stats.actor_loss += a.loss;
      ++stats.updates;
    }
  }
  return stats;
}

PpoRun train_ppo(const PpoConfig& config, const env::EnvConfig& env_config,
                 int episodes, std::uint64_t seed,
                 const EpisodeCallback& on_episode) {
  config.validate();
  if (episodes < 1) throw ConfigError("invalid run: episodes must be >= 1");

  env::LandingEnv env(env_config);
  PpoRun run;
  run.actor = make_actor(config, env_config, mix_seed(seed, 1));
  run.critic = make_critic(config, mix_seed(seed, 5));
  Rng action_rng(mix_seed(seed, 2));
  Rng shuffle_rng(mix_seed(seed, 3));
  const auto horizon = static_cast<std::size_t>(config.horizon);

  for (int e = 0; e < episodes; ++e) {
    env::EnvState state = env.reset(episode_wave_seed(seed, e));
    EpisodeRecord rec;
    rec.episode = e + 1;
    rec.epsilon = std::numeric_limits<double>::quiet_NaN();
    rec.impact_velocity = std::numeric_limits<double>::quiet_NaN();
    UpdateStats totals;

    RolloutBatch batch;
    std::vector<std::array<double, 2>> obs_buf;
    auto flush = [&](const env::EnvState& next, bool terminal) {
      if (obs_buf.empty()) return;
      batch.states.resize(2, static_cast<Eigen::Index>(obs_buf.size()));
      for (std::size_t j = 0; j < obs_buf.size(); ++j) {
        batch.states(0, static_cast<Eigen::Index>(j)) = obs_buf[j][0];
        batch.states(1, static_cast<Eigen::Index>(j)) = obs_buf[j][1];
      }
      const auto next_obs = next.observation();
      const double bootstrap = terminal ? 0.0 : run.critic.forward(next_obs)(0);
      const auto s = ppo_update(config, run.actor, run.critic, batch, bootstrap, shuffle_rng);
      totals.actor_loss += s.actor_loss;
      totals.critic_loss += s.critic_loss;
      totals.updates += s.updates;
      batch = RolloutBatch{};
      obs_buf.clear();
    };

    try {
      while (!env.done()) {
        const auto obs = state.observation();
        const ActionSample act = sample_action(run.actor, obs, action_rng);
        const env::StepResult r = env.step(act.control);
        obs_buf.push_back(obs);
        batch.actions.push_back(act.raw);
        batch.log_probs.push_back(act.log_prob);
        batch.rewards.push_back(r.reward);
        batch.dones.push_back(r.done);
        rec.total_reward += r.reward;
        ++rec.steps;
        state = r.state;
        if (r.done) {
          rec.landed = r.landed;
          rec.aborted = r.aborted;
          if (r.landed) rec.impact_velocity = r.impact_velocity;
        }
        if (r.done || obs_buf.size() >= horizon) flush(r.state, r.done);
      }
    } catch (const NumericalFault&) {
      rec.aborted = true;
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (totals.updates > 0) {
      rec.actor_loss = totals.actor_loss / totals.updates;
      rec.critic_loss = totals.critic_loss / totals.updates;
      rec.mean_loss = rec.actor_loss + rec.critic_loss;
    } else {
      rec.actor_loss = rec.critic_loss = rec.mean_loss = nan;
    }
    run.log.push_back(rec);
    if (on_episode) on_episode(rec);
  }
  return run;
}

}  // namespace vtoldock::agents
