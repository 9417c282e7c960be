#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "iher/agent.hpp"

using namespace iher;

namespace {

AgentConfig small_config() {
  AgentConfig cfg;
  cfg.actor_hidden = {16, 16};
  cfg.critic_hidden = {16, 16};
  return cfg;
}

GoalObservation make_gobs(double x = 0.1) {
  return {{x, -x, 0.5 * x, 0.0}, {x, -x}, {0.4, -0.2}};
}

SampledTransition make_transition(Rng& rng, bool is_real, double reward) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  SampledTransition s;
  s.t.obs = {{d(rng), d(rng), d(rng), d(rng)}, {0.0, 0.0}, {d(rng), d(rng)}};
  s.t.next_obs = {{d(rng), d(rng), d(rng), d(rng)}, {0.0, 0.0}, s.t.obs.desired_goal};
  s.t.action = {d(rng), d(rng)};
  s.t.is_real = is_real;
  s.t.extrinsic_reward = reward;
  s.training_reward = reward;
  return s;
}

void zero_net(Mlp& net) {
  for (Layer& l : net.layers) {
    std::fill(l.w.begin(), l.w.end(), 0.0);
    std::fill(l.b.begin(), l.b.end(), 0.0);
  }
}

}  // namespace

TEST_CASE("select_action: deterministic mode always within bounds") {
  DdpgAgent agent(4, 2, 2, small_config(), 1);
  Rng rng = make_rng(2);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const auto a = agent.select_action(make_gobs(d(rng)), 1.0, false, rng);
    REQUIRE(a.size() == 2);
    for (double v : a) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("select_action: exploration noise stays within bounds") {
  DdpgAgent agent(4, 2, 2, small_config(), 3);
  Rng rng = make_rng(4);
  for (int i = 0; i < 2000; ++i) {
    const auto a = agent.select_action(make_gobs(), 1.0, true, rng);
    for (double v : a) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("select_action: epsilon = 1 gives uniform actions (KS test)") {
  AgentConfig cfg = small_config();
  cfg.random_action_prob = 1.0;
  DdpgAgent agent(4, 2, 2, cfg, 5);
  Rng rng = make_rng(6);
  const int n = 10000;
  std::vector<double> xs, ys;
  for (int i = 0; i < n; ++i) {
    const auto a = agent.select_action(make_gobs(), 1.0, true, rng);
    xs.push_back(a[0]);
    ys.push_back(a[1]);
  }
  for (std::vector<double>* v : {&xs, &ys}) {
    std::sort(v->begin(), v->end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double cdf = ((*v)[static_cast<std::size_t>(i)] + 1.0) / 2.0;  // U(-1, 1)
      ks = std::max(ks, std::fabs(cdf - static_cast<double>(i + 1) / n));
      ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / n));
    }
    CHECK(ks < 1.95 / std::sqrt(static_cast<double>(n)));  // alpha ~ 0.001
  }
}

TEST_CASE("select_action: the env_is_real bit is a genuine input") {
  DdpgAgent agent(4, 2, 2, small_config(), 7);
  Rng rng = make_rng(8);
  const GoalObservation gobs = make_gobs();
  const auto a1 = agent.select_action(gobs, 1.0, false, rng);
  const auto a0 = agent.select_action(gobs, 0.0, false, rng);
  // random init almost surely wires the bit through; the contract is only
  // that the bit CAN change the action
  CHECK(a1 != a0);
}

TEST_CASE("force_real_bit: no_distinguish wires the bit to 1 everywhere") {
  AgentConfig cfg = small_config();
  cfg.force_real_bit = true;
  DdpgAgent agent(4, 2, 2, cfg, 7);
  Rng rng = make_rng(8);
  const GoalObservation gobs = make_gobs();
  const auto a1 = agent.select_action(gobs, 1.0, false, rng);
  const auto a0 = agent.select_action(gobs, 0.0, false, rng);
  CHECK(a1 == a0);
  const FrozenPolicy frozen = agent.freeze(0);
  CHECK(frozen.select_action(gobs, 0.0, false, rng) == a1);
}

TEST_CASE("polyak_update: tau endpoints and blend") {
  const Mlp main = make_mlp({2, 3}, Activation::Relu, Activation::Identity, 9);
  Mlp target = make_mlp({2, 3}, Activation::Relu, Activation::Identity, 10);

  Mlp t1 = target;
  polyak_update(main, t1, 1.0);
  CHECK(t1.layers[0].w == target.layers[0].w);

  Mlp t0 = target;
  polyak_update(main, t0, 0.0);
  CHECK(t0.layers[0].w == main.layers[0].w);

  Mlp zeros = main;
  zero_net(zeros);
  Mlp ones = main;
  for (Layer& l : ones.layers) {
    std::fill(l.w.begin(), l.w.end(), 1.0);
    std::fill(l.b.begin(), l.b.end(), 1.0);
  }
  Mlp t = zeros;
  polyak_update(ones, t, 0.95);
  for (double v : t.layers[0].w) CHECK(v == doctest::Approx(0.05).epsilon(1e-15));

  Mlp wrong = make_mlp({3, 3}, Activation::Relu, Activation::Identity, 11);
  CHECK_THROWS_AS(polyak_update(main, wrong, 0.5), std::invalid_argument);
}

TEST_CASE("polyak: targets converge to frozen mains") {
  const Mlp main = make_mlp({3, 4}, Activation::Relu, Activation::Identity, 12);
  Mlp target = make_mlp({3, 4}, Activation::Relu, Activation::Identity, 13);
  for (int i = 0; i < 500; ++i) polyak_update(main, target, 0.95);
  for (std::size_t i = 0; i < main.layers[0].w.size(); ++i)
    CHECK(target.layers[0].w[i] == doctest::Approx(main.layers[0].w[i]).epsilon(1e-9));
}

TEST_CASE("update: Q-target clip range is [-1/(1-gamma), eta/(1-gamma)]") {
  AgentConfig cfg = small_config();
  cfg.gamma = 0.98;
  cfg.intrinsic_clip = 0.8;
  CHECK(cfg.q_lower() == doctest::Approx(-50.0).epsilon(1e-9));
  CHECK(cfg.q_upper() == doctest::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("update: zero nets and zero rewards give exactly zero critic loss") {
  DdpgAgent agent(4, 2, 2, small_config(), 14);
  zero_net(agent.critic());
  zero_net(agent.target_critic());
  zero_net(agent.target_actor());
  Rng rng = make_rng(15);
  std::vector<SampledTransition> batch(8, make_transition(rng, true, 0.0));
  const UpdateDiag diag = agent.update(batch);
  CHECK(diag.critic_loss == 0.0);
}

TEST_CASE("update: targets clip under extreme rewards") {
  // zero critic and targets: q = 0, y = clip(r), loss = mean(y^2)
  for (const auto& [reward, expected] : {std::pair{1000.0, 1600.0}, std::pair{-1000.0, 2500.0}}) {
    DdpgAgent agent(4, 2, 2, small_config(), 16);
    zero_net(agent.critic());
    zero_net(agent.target_critic());
    zero_net(agent.target_actor());
    Rng rng = make_rng(17);
    std::vector<SampledTransition> batch(4, make_transition(rng, true, reward));
    const UpdateDiag diag = agent.update(batch);
    CHECK(diag.critic_loss == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("update: deterministic given parameters and batch") {
  Rng rng = make_rng(18);
  std::vector<SampledTransition> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(make_transition(rng, i % 2 == 0, -1.0));
  auto run = [&batch] {
    DdpgAgent agent(4, 2, 2, small_config(), 19);
    for (int i = 0; i < 5; ++i) agent.update(batch);
    return agent;
  };
  const DdpgAgent a = run();
  const DdpgAgent b = run();
  for (std::size_t li = 0; li < a.actor().layers.size(); ++li)
    CHECK(a.actor().layers[li].w == b.actor().layers[li].w);
  for (std::size_t li = 0; li < a.critic().layers.size(); ++li)
    CHECK(a.critic().layers[li].w == b.critic().layers[li].w);
}

TEST_CASE("update: normalizer statistics never move") {
  DdpgAgent agent(4, 2, 2, small_config(), 20);
  Rng rng = make_rng(21);
  Episode real_ep;
  real_ep.is_real = true;
  for (int t = 0; t < 10; ++t) {
    const SampledTransition s = make_transition(rng, true, -1.0);
    real_ep.transitions.push_back(s.t);
  }
  agent.observe_real_episode(real_ep);
  const auto mean_before = agent.obs_normalizer().mean;
  const auto count_before = agent.obs_normalizer().count;
  CHECK(count_before > 0);

  std::vector<SampledTransition> imag_batch;
  for (int i = 0; i < 32; ++i) imag_batch.push_back(make_transition(rng, false, -1.0));
  for (int i = 0; i < 10; ++i) agent.update(imag_batch);
  CHECK(agent.obs_normalizer().mean == mean_before);
  CHECK(agent.obs_normalizer().count == count_before);
}

TEST_CASE("update: actor gradient through the critic matches finite differences") {
  AgentConfig cfg;
  cfg.actor_hidden = {2};
  cfg.critic_hidden = {2};
  cfg.action_penalty = 1.0;
  DdpgAgent agent(3, 2, 2, cfg, 22);
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<SampledTransition> batch;
  for (int i = 0; i < 4; ++i) {
    SampledTransition s;
    s.t.obs = {{d(rng), d(rng), d(rng)}, {0.0, 0.0}, {d(rng), d(rng)}};
    s.t.next_obs = s.t.obs;
    s.t.action = {d(rng), d(rng)};
    s.t.is_real = true;
    batch.push_back(s);
  }
  const auto analytic = agent.actor_gradient(batch);

  // finite differences of the composed actor loss via public forwards only
  auto loss = [&](const Mlp& actor) {
    double mean_q = 0.0, penalty = 0.0;
    Rng dummy = make_rng(0);
    for (const auto& s : batch) {
      // reproduce the input layout through the public action path
      FrozenPolicy probe{actor, agent.obs_normalizer(), agent.goal_normalizer(), 0.0, 0.0, 0, false};
      const auto a = probe.select_action(s.t.obs, 1.0, false, dummy);
      std::vector<double> x = agent.obs_normalizer().normalize(s.t.obs.observation);
      const auto g = agent.goal_normalizer().normalize(s.t.obs.desired_goal);
      x.insert(x.end(), g.begin(), g.end());
      x.push_back(1.0);
      x.insert(x.end(), a.begin(), a.end());
      mean_q += forward(agent.critic(), x)[0];
      for (double v : a) penalty += v * v;
    }
    mean_q /= static_cast<double>(batch.size());
    penalty = cfg.action_penalty * penalty / (static_cast<double>(batch.size()) * 2.0);
    return -mean_q + penalty;
  };

  Mlp probe_actor = agent.actor();
  const double h = 1e-6;
  int checked = 0;
  for (std::size_t li = 0; li < probe_actor.layers.size(); ++li) {
    for (std::size_t i = 0; i < probe_actor.layers[li].w.size(); ++i) {
      const double saved = probe_actor.layers[li].w[i];
      probe_actor.layers[li].w[i] = saved + h;
      const double lp = loss(probe_actor);
      probe_actor.layers[li].w[i] = saved - h;
      const double lm = loss(probe_actor);
      probe_actor.layers[li].w[i] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double got = analytic[li].w[i];
      const double rel = std::fabs(numeric - got) / std::max({1e-6, std::fabs(numeric), std::fabs(got)});
      CHECK(rel < 1e-4);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("freeze: snapshots are immutable under later updates") {
  DdpgAgent agent(4, 2, 2, small_config(), 24);
  const FrozenPolicy frozen = agent.freeze(3);
  CHECK(frozen.id == 3);
  const auto w_before = frozen.actor.layers[0].w;
  Rng rng = make_rng(25);
  std::vector<SampledTransition> batch;
  for (int i = 0; i < 16; ++i) batch.push_back(make_transition(rng, true, -1.0));
  for (int i = 0; i < 5; ++i) agent.update(batch);
  CHECK(frozen.actor.layers[0].w == w_before);
  CHECK(agent.actor().layers[0].w != w_before);
}
