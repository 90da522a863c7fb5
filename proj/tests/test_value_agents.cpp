#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "vtoldock/errors.hpp"
#include "vtoldock/replay_buffer.hpp"
#include "vtoldock/value_agents.hpp"

using namespace vtoldock;
using namespace vtoldock::agents;

namespace {

// Network whose output is the constant vector q for every input.
nn::Mlp constant_q(const Eigen::Vector3d& q) {
  nn::Mlp net({2, 4, 3}, nn::HeadSpec{}, 1);
  net.layers().back().weight.setZero();
  net.layers().back().bias = q;
  return net;
}

DiscreteTransition tr(double r, int a, bool done) {
  return {{1.0, 0.0}, a, r, {0.5, -0.5}, done};
}

std::vector<DiscreteTransition> random_batch(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_int_distribution<int> act(0, 2);
  std::bernoulli_distribution done(0.2);
  std::vector<DiscreteTransition> b;
  for (std::size_t i = 0; i < n; ++i)
    b.push_back({{3 * n01(rng), 2 * n01(rng)}, act(rng), n01(rng), {3 * n01(rng), 2 * n01(rng)}, done(rng)});
  return b;
}

}  // namespace

TEST(Greedy, PicksArgmaxWithLowestIndexTies) {
  EXPECT_EQ(greedy_action(Eigen::Vector3d(1, 3, 2)), 1);
  EXPECT_EQ(greedy_action(Eigen::Vector3d(5, 5, 1)), 0);
  EXPECT_EQ(greedy_action(Eigen::Vector3d(-1, 2, 2)), 1);
}

TEST(SelectAction, ZeroEpsilonIsGreedy) {
  const auto net = constant_q({1, 3, 2});
  Rng rng(1);
  const std::array<double, 2> s{0.0, 0.0};
  for (int i = 0; i < 50; ++i) EXPECT_EQ(select_action(net, s, 0.0, rng), 1);
}

TEST(SelectAction, UnitEpsilonIsUniform) {
  const auto net = constant_q({1, 3, 2});
  Rng rng(2);
  const std::array<double, 2> s{0.0, 0.0};
  int counts[3] = {0, 0, 0};
  const int n = 3000;
  for (int i = 0; i < n; ++i) ++counts[select_action(net, s, 1.0, rng)];
  const double sigma = std::sqrt(n * (1.0 / 3) * (2.0 / 3));
  for (int c : counts) EXPECT_LT(std::abs(c - n / 3.0), 3 * sigma);
}

TEST(Epsilon, ScheduleDecaysToFloor) {
  const auto s = EpsilonSchedule::reaching(1.0, 0.05, 80);
  EXPECT_DOUBLE_EQ(s.value(0), 1.0);
  EXPECT_NEAR(s.value(80), 0.05, 1e-12);
  EXPECT_EQ(s.value(400), 0.05);
  for (int e = 1; e < 100; ++e) EXPECT_LE(s.value(e), s.value(e - 1));
  EpsilonSchedule bad;
  bad.decay_rate = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

// Fixed 4-transition batch against constant networks:
// target Q(s', .) = (4, 1, 2), prediction Q(s', .) = (0, 5, 1), gamma 0.995.
TEST(Targets, HandComputedBatch) {
  const auto target = constant_q({4, 1, 2});
  const auto pred = constant_q({0, 5, 1});
  const std::vector<DiscreteTransition> batch{tr(-1.0, 0, false), tr(0.5, 1, true),
                                              tr(-2.5, 2, false), tr(0.0, 1, false)};
  const auto y = compute_targets(batch, pred, target, 0.995, DqnVariant::dqn);
  EXPECT_EQ(y(0), -1.0 + 0.995 * 4.0);  // 2.98
  EXPECT_EQ(y(1), 0.5);
  EXPECT_EQ(y(2), -2.5 + 0.995 * 4.0);
  EXPECT_EQ(y(3), 0.995 * 4.0);
  EXPECT_NEAR(y(0), 2.98, 1e-15);

  // Double: the prediction net selects action 1, the target net evaluates it.
  const auto yd = compute_targets(batch, pred, target, 0.995, DqnVariant::double_dqn);
  EXPECT_EQ(yd(0), -1.0 + 0.995 * 1.0);
  EXPECT_EQ(yd(1), 0.5);
  EXPECT_EQ(yd(2), -2.5 + 0.995 * 1.0);
  EXPECT_EQ(yd(3), 0.995 * 1.0);

  // Dueling uses the plain max over its aggregated target outputs.
  const auto ydu = compute_targets(batch, pred, target, 0.995, DqnVariant::dueling);
  EXPECT_EQ(ydu(0), y(0));
}

TEST(Targets, DoubleNeverExceedsPlainOnRandomBatches) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    const nn::Mlp pred({2, 6, 3}, nn::HeadSpec{}, 2 * trial + 1);
    const nn::Mlp target({2, 6, 3}, nn::HeadSpec{}, 2 * trial + 2);
    const auto batch = random_batch(rng, 8);
    const auto y = compute_targets(batch, pred, target, 0.995, DqnVariant::dqn);
    const auto yd = compute_targets(batch, pred, target, 0.995, DqnVariant::double_dqn);
    ASSERT_TRUE((yd.array() <= y.array()).all()) << "trial " << trial;
  }
}

TEST(Targets, RejectEmptyBatch) {
  const auto net = constant_q({0, 0, 0});
  EXPECT_THROW(compute_targets({}, net, net, 0.9, DqnVariant::dqn), std::invalid_argument);
}

TEST(TdLoss, ValueAndGradientOnlyThroughTakenAction) {
  std::mt19937_64 rng(3);
  const nn::Mlp pred({2, 5, 4, 3}, nn::HeadSpec{}, 9);
  const auto batch = random_batch(rng, 6);
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) y(i) = 0.3 * i - 1.0;

  const auto res = td_loss(pred, batch, y);
  double expected = 0.0;
  for (int j = 0; j < 6; ++j) {
    const auto q = pred.forward(batch[j].s);
    expected += std::pow(y(j) - q(batch[j].a), 2);
  }
  EXPECT_NEAR(res.loss, expected / 6.0, 1e-12);

  const auto numeric = oracle::numeric_gradient(
      pred, [&](const nn::Mlp& m) { return td_loss(m, batch, y).loss; });
  EXPECT_LT(oracle::max_relative_error(oracle::flatten(res.grads), numeric, 1e-6), 1e-4);

  // With all actions equal to 0 the bias gradient of the other outputs vanishes.
  auto same = batch;
  for (auto& t : same) t.a = 0;
  const auto g = td_loss(pred, same, y).grads;
  EXPECT_EQ(g.layers.back().bias(1), 0.0);
  EXPECT_EQ(g.layers.back().bias(2), 0.0);
  EXPECT_EQ(g.layers.back().weight.row(1).norm(), 0.0);
}

TEST(FitBatch, ReducesLossOnAFixedBatch) {
  std::mt19937_64 rng(5);
  DqnConfig cfg;
  cfg.lr = 1e-2;
  nn::Mlp pred = make_q_network(cfg, 1);
  const nn::Mlp target = pred;
  const auto batch = random_batch(rng, 16);
  const double first = fit_batch(cfg, pred, target, batch);
  double last = first;
  for (int i = 0; i < 200; ++i) last = fit_batch(cfg, pred, target, batch);
  EXPECT_LT(last, first);
}

TEST(FitBatch, StepRespectsGradientClip) {
  std::mt19937_64 rng(6);
  DqnConfig cfg;
  cfg.lr = 0.5;
  cfg.grad_clip = 1.0;
  nn::Mlp pred = make_q_network(cfg, 4);
  const nn::Mlp target = pred;
  auto batch = random_batch(rng, 8);
  for (auto& t : batch) t.r = 100.0;  // large TD errors force clipping
  const auto before = pred.parameters();
  fit_batch(cfg, pred, target, batch);
  const auto after = pred.parameters();
  double moved = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) moved += std::pow(after[i] - before[i], 2);
  EXPECT_NEAR(std::sqrt(moved), cfg.lr * cfg.grad_clip, 1e-9);
}

TEST(LearnStep, WaitsForWarmStart) {
  DqnConfig cfg;
  cfg.warm_start = 100;
  cfg.batch_size = 32;
  ReplayBuffer<DiscreteTransition> buf(1000);
  std::mt19937_64 gen(1);
  for (const auto& t : random_batch(gen, 99)) buf.push(t);
  nn::Mlp pred = make_q_network(cfg, 1);
  const nn::Mlp target = pred;
  const auto before = pred.parameters();
  Rng rng(2);
  EXPECT_FALSE(learn_step(cfg, buf, pred, target, rng).has_value());
  EXPECT_EQ(pred.parameters(), before);
  buf.push(random_batch(gen, 1)[0]);
  EXPECT_TRUE(learn_step(cfg, buf, pred, target, rng).has_value());
  EXPECT_NE(pred.parameters(), before);
}

TEST(ReplayBufferTest, EvictsOldestFirst) {
  ReplayBuffer<int> buf(3);
  for (int i = 0; i < 5; ++i) buf.push(i);
  ASSERT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0), 2);
  EXPECT_EQ(buf.at(1), 3);
  EXPECT_EQ(buf.at(2), 4);
}

TEST(ReplayBufferTest, SamplesWithoutReplacement) {
  ReplayBuffer<int> buf(100);
  for (int i = 0; i < 100; ++i) buf.push(i);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = buf.sample(64, rng);
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 64u);
  }
  EXPECT_THROW(buf.sample(101, rng), std::invalid_argument);
  EXPECT_THROW(ReplayBuffer<int>(0), std::invalid_argument);
}

TEST(ReplayBufferTest, SamplingIsRoughlyUniform) {
  ReplayBuffer<int> buf(10);
  for (int i = 0; i < 10; ++i) buf.push(i);
  Rng rng(8);
  const int draws = 20000;
  // Every element is included in a 3-sample with probability 3/10.
  int inclusion[10] = {};
  for (int i = 0; i < draws; ++i)
    for (int v : buf.sample(3, rng)) ++inclusion[v];
  const double p = 0.3, sigma = std::sqrt(draws * p * (1 - p));
  for (int c : inclusion) EXPECT_LT(std::abs(c - draws * p), 4 * sigma);
}

TEST(QNetwork, HeadFollowsVariant) {
  DqnConfig cfg;
  EXPECT_EQ(make_q_network(cfg, 1).head().type, nn::HeadType::linear);
  cfg.variant = DqnVariant::dueling;
  const auto net = make_q_network(cfg, 1);
  EXPECT_EQ(net.head().type, nn::HeadType::dueling);
  EXPECT_EQ(net.output_dim(), 3);
  EXPECT_EQ(net.sizes(), (std::vector<int>{2, 32, 32, 16, 3}));
}

TEST(DqnConfigTest, ValidateListsOffendingFields) {
  DqnConfig cfg;
  cfg.gamma = 1.5;
  cfg.batch_size = 0;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("dqn.gamma"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("dqn.batch_size"), std::string::npos);
  }
}

TEST(TrainDqn, ReproducibleAndOneRecordPerEpisode) {
  DqnConfig cfg;
  cfg.variant = DqnVariant::double_dqn;
  cfg.warm_start = 64;
  env::EnvConfig ec;
  ec.max_steps = 60;
  const auto a = train_dqn(cfg, ec, 4, 11);
  const auto b = train_dqn(cfg, ec, 4, 11);
  ASSERT_EQ(a.log.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.log[i].episode, i + 1);
    EXPECT_DOUBLE_EQ(a.log[i].epsilon, cfg.epsilon.value(i));
  }
  EXPECT_EQ(to_csv(a.log, LogKind::value), to_csv(b.log, LogKind::value));
  EXPECT_EQ(nn::serialize(a.network), nn::serialize(b.network));
  EXPECT_GT(a.learn_steps, 0u);
}

TEST(TrainDqn, WaveSeedsDifferPerEpisode) {
  EXPECT_NE(episode_wave_seed(1, 0), episode_wave_seed(1, 1));
  EXPECT_NE(episode_wave_seed(1, 0), episode_wave_seed(2, 0));
  EXPECT_EQ(episode_wave_seed(5, 3), episode_wave_seed(5, 3));
}
