#include <doctest.h>

#include <cmath>
#include <random>

#include "iher/envs.hpp"

using namespace iher;

namespace {

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

std::vector<double> random_action(Rng& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double x = d(rng);
  const double y = d(rng);
  return {x, y};
}

}  // namespace

TEST_CASE("compute_reward: sparse binary cases") {
  const std::vector<double> g{0.2, -0.4};
  CHECK(sparse_reward(g, g, 0.05) == 0.0);  // distance 0
  CHECK(sparse_reward({0.2, -0.4}, {0.4, -0.4}, 0.05) == -1.0);  // distance 0.2
  CHECK(sparse_reward({0.2, -0.4}, {0.23, -0.4}, 0.05) == 0.0);  // distance 0.03
  CHECK_THROWS_AS(sparse_reward({0.0}, {0.0, 0.0}, 0.05), std::invalid_argument);
}

TEST_CASE("is_success: boundary inclusive") {
  CHECK(goal_reached({0.0, 0.0}, {0.0, 0.0}, 0.05));
  CHECK(goal_reached({0.05, 0.0}, {0.0, 0.0}, 0.05));  // distance == tolerance
  CHECK_FALSE(goal_reached({0.050001, 0.0}, {0.0, 0.0}, 0.05));
}

TEST_CASE("reward reflexivity over random goals") {
  Rng rng = make_rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> g{d(rng), d(rng)};
    CHECK(sparse_reward(g, g, 0.05) == 0.0);
  }
}

TEST_CASE("point-reach: stated initial conditions and goal box") {
  auto env = make_env("point-reach");
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const GoalObservation o = env->reset(seed);
    CHECK(o.observation[0] == 0.0);
    CHECK(o.observation[1] == 0.0);
    CHECK(o.observation[2] == 0.0);
    CHECK(o.observation[3] == 0.0);
    CHECK(o.achieved_goal == std::vector<double>{0.0, 0.0});
    CHECK(std::fabs(o.desired_goal[0]) <= 0.8);
    CHECK(std::fabs(o.desired_goal[1]) <= 0.8);
  }
}

TEST_CASE("point-reach: zero action is a fixed point at rest") {
  auto env = make_env("point-reach");
  env->reset(3);
  const StepResult r = env->step({0.0, 0.0});
  CHECK(r.obs.observation[0] == 0.0);
  CHECK(r.obs.observation[1] == 0.0);
  CHECK(r.obs.observation[2] == 0.0);
  CHECK(r.obs.observation[3] == 0.0);
}

TEST_CASE("point-reach: stated velocity and position update") {
  auto env = make_env("point-reach");
  env->reset(3);
  const StepResult r = env->step({1.0, 0.0});
  CHECK(r.obs.observation[2] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(r.obs.observation[3] == 0.0);
  CHECK(r.obs.observation[0] == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(r.obs.observation[1] == 0.0);
}

TEST_CASE("reset determinism: equal seeds give identical observations") {
  for (const char* task : {"point-reach", "point-push", "point-slide"}) {
    auto a = make_env(task);
    auto b = make_env(task);
    const GoalObservation oa = a->reset(99);
    const GoalObservation ob = b->reset(99);
    CHECK(oa.observation == ob.observation);
    CHECK(oa.achieved_goal == ob.achieved_goal);
    CHECK(oa.desired_goal == ob.desired_goal);
  }
}

TEST_CASE("trajectory determinism: seed plus action sequence fixes the rollout") {
  for (const char* task : {"point-reach", "point-push", "point-slide"}) {
    auto a = make_env(task);
    auto b = make_env(task);
    a->reset(7);
    b->reset(7);
    Rng rng_a = make_rng(11);
    Rng rng_b = make_rng(11);
    for (int t = 0; t < 50; ++t) {
      const StepResult ra = a->step(random_action(rng_a));
      const StepResult rb = b->step(random_action(rng_b));
      CHECK(ra.obs.observation == rb.obs.observation);
      CHECK(ra.reward == rb.reward);
      CHECK(ra.done == rb.done);
    }
  }
}

TEST_CASE("episodes run exactly 50 steps with no early done") {
  for (const char* task : {"point-reach", "point-push", "point-slide"}) {
    auto env = make_env(task);
    env->reset(1);
    Rng rng = make_rng(2);
    for (int t = 1; t <= 50; ++t) {
      const StepResult r = env->step(random_action(rng));
      CHECK(r.done == (t == 50));
    }
  }
}

TEST_CASE("boundedness: positions stay inside the workspace under any actions") {
  Rng rng = make_rng(17);
  for (const char* task : {"point-reach", "point-push", "point-slide"}) {
    auto env = make_env(task);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      env->reset(seed);
      for (int t = 0; t < 50; ++t) {
        const StepResult r = env->step(random_action(rng));
        for (double v : r.obs.observation) CHECK(std::fabs(v) <= 1.0 + 1e-12);
        // achieved goals are positions and must stay in the box too
        for (double v : r.obs.achieved_goal) CHECK(std::fabs(v) <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("point-push: reset separates box from goal over 1000 resets") {
  auto env = make_env("point-push");
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const GoalObservation o = env->reset(seed);
    const std::vector<double> box{o.observation[4], o.observation[5]};
    CHECK(std::fabs(box[0]) <= 0.3);
    CHECK(std::fabs(box[1]) <= 0.3);
    CHECK(dist(box, o.desired_goal) >= 0.1);
    CHECK(o.achieved_goal == box);
  }
}

TEST_CASE("point-push: contact rule matches an independent geometric oracle") {
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> pos(-0.9, 0.9);
  std::uniform_real_distribution<double> off(-0.099, 0.099);
  int contacts = 0;
  while (contacts < 1000) {
    const std::vector<double> agent{pos(rng), pos(rng)};
    const std::vector<double> box{agent[0] + off(rng), agent[1] + off(rng)};
    const double d = dist(agent, box);
    if (d >= 0.1 || d < 1e-6) continue;
    ++contacts;
    const auto pushed = resolve_push_contact(agent, box, {0.01, 0.0}, 0.1);
    // independent route: direction through atan2
    const double theta = std::atan2(box[1] - agent[1], box[0] - agent[0]);
    const double ex = agent[0] + 0.1 * std::cos(theta);
    const double ey = agent[1] + 0.1 * std::sin(theta);
    CHECK(pushed[0] == doctest::Approx(ex).epsilon(1e-9));
    CHECK(pushed[1] == doctest::Approx(ey).epsilon(1e-9));
    CHECK(dist(pushed, agent) == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("point-push: no contact leaves the box in place") {
  const auto box = resolve_push_contact({0.0, 0.0}, {0.5, 0.5}, {0.1, 0.0}, 0.1);
  CHECK(box == std::vector<double>{0.5, 0.5});
}

TEST_CASE("point-push: in-env contact displaces the box consistently") {
  auto env = make_env("point-push");
  // drive the agent toward the box until a contact moves it
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GoalObservation o = env->reset(seed);
    std::vector<double> box{o.observation[4], o.observation[5]};
    bool moved = false;
    for (int t = 0; t < 50 && !moved; ++t) {
      const std::vector<double> agent{o.observation[0], o.observation[1]};
      std::vector<double> a{box[0] - agent[0], box[1] - agent[1]};
      const double n = std::max(1e-9, dist(agent, box));
      a[0] = a[0] / n;
      a[1] = a[1] / n;
      const StepResult r = env->step(a);
      o = r.obs;
      const std::vector<double> nbox{o.observation[4], o.observation[5]};
      if (nbox != box) {
        const std::vector<double> nagent{o.observation[0], o.observation[1]};
        CHECK(dist(nbox, nagent) == doctest::Approx(0.1).epsilon(1e-9));
        moved = true;
      }
      box = nbox;
    }
    CHECK(moved);
  }
}

TEST_CASE("point-slide: agent confined to left half-plane, goals on the right") {
  auto env = make_env("point-slide");
  Rng rng = make_rng(31);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GoalObservation o = env->reset(seed);
    CHECK(o.desired_goal[0] >= 0.2);
    CHECK(o.desired_goal[0] <= 0.9);
    CHECK(std::fabs(o.desired_goal[1]) <= 0.5);
    for (int t = 0; t < 50; ++t) {
      const StepResult r = env->step(random_action(rng));
      CHECK(r.obs.observation[0] <= 0.0);  // agent x
    }
  }
}

TEST_CASE("point-slide: an impulse sends the box sliding with decay") {
  auto env = make_env("point-slide");
  GoalObservation o = env->reset(4);
  // walk straight at the box
  for (int t = 0; t < 50; ++t) {
    const std::vector<double> agent{o.observation[0], o.observation[1]};
    const std::vector<double> box{o.observation[2], o.observation[3]};
    std::vector<double> a{box[0] - agent[0], box[1] - agent[1]};
    const double n = std::max(1e-9, dist(agent, box));
    a = {a[0] / n, a[1] / n};
    o = env->step(a).obs;
    const double speed = std::hypot(o.observation[4], o.observation[5]);
    if (speed > 0.0) break;
  }
  const double v0 = std::hypot(o.observation[4], o.observation[5]);
  REQUIRE(v0 > 0.0);
  // retreat and watch the decay
  o = env->step({-1.0, 0.0}).obs;
  o = env->step({-1.0, 0.0}).obs;
  const double v2 = std::hypot(o.observation[4], o.observation[5]);
  CHECK(v2 < v0);
  CHECK(v2 > 0.0);
}

TEST_CASE("scripted proportional controller solves point-reach from any reset") {
  auto env = make_env("point-reach");
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    GoalObservation o = env->reset(seed);
    for (int t = 0; t < 50; ++t) {
      const std::vector<double> p{o.observation[0], o.observation[1]};
      const std::vector<double> v{o.observation[2], o.observation[3]};
      std::vector<double> a(2);
      for (int i = 0; i < 2; ++i) {
        const double want_v = std::clamp(o.desired_goal[i] - p[i], -0.2, 0.2);
        a[i] = std::clamp(20.0 * (want_v - v[i]), -1.0, 1.0);
      }
      o = env->step(a).obs;
    }
    if (env->is_success(o.achieved_goal, o.desired_goal)) ++successes;
  }
  CHECK(successes == 500);
}

TEST_CASE("make_env: rejects unknown task names and bad overrides") {
  CHECK_THROWS_AS(make_env("fetch-push"), std::invalid_argument);
  CHECK_THROWS_AS(make_env("point-reach", {0, 0.05}), std::invalid_argument);
  CHECK_THROWS_AS(make_env("point-reach", {50, -1.0}), std::invalid_argument);
}

TEST_CASE("step: rejects wrong action dimension") {
  auto env = make_env("point-reach");
  env->reset(0);
  CHECK_THROWS_AS(env->step({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(env->step({1.0, 0.0, 0.0}), std::invalid_argument);
}
