#include "iher/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace iher {

namespace {

constexpr double kWorkspace = 1.0;       // positions live in [-1, 1]^2
constexpr double kContactRadius = 0.1;

double clip(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

void clip_inplace(std::vector<double>& v, double lo, double hi) {
  for (double& x : v) x = clip(x, lo, hi);
}

double dist2d(double ax, double ay, double bx, double by) {
  const double dx = ax - bx;
  const double dy = ay - by;
  return std::sqrt(dx * dx + dy * dy);
}

void check_action(const std::vector<double>& action, int dim) {
  if (static_cast<int>(action.size()) != dim)
    throw std::invalid_argument("step: action has dimension " + std::to_string(action.size()) + ", expected " +
                                std::to_string(dim));
}

std::vector<double> uniform_square(Rng& rng, double half_extent) {
  std::uniform_real_distribution<double> dist(-half_extent, half_extent);
  const double x = dist(rng);
  const double y = dist(rng);
  return {x, y};
}

}  // namespace

double sparse_reward(const std::vector<double>& achieved_goal, const std::vector<double>& desired_goal,
                     double tolerance) {
  if (achieved_goal.size() != desired_goal.size())
    throw std::invalid_argument("sparse_reward: goal length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < achieved_goal.size(); ++i) {
    const double d = achieved_goal[i] - desired_goal[i];
    acc += d * d;
  }
  return std::sqrt(acc) <= tolerance ? 0.0 : -1.0;
}

bool goal_reached(const std::vector<double>& achieved_goal, const std::vector<double>& desired_goal,
                  double tolerance) {
  return sparse_reward(achieved_goal, desired_goal, tolerance) == 0.0;
}

std::vector<double> resolve_push_contact(const std::vector<double>& agent, const std::vector<double>& box,
                                         const std::vector<double>& agent_move, double radius) {
  const double d = dist2d(agent[0], agent[1], box[0], box[1]);
  if (d >= radius) return box;
  double dirx, diry;
  if (d > 1e-12) {
    dirx = (box[0] - agent[0]) / d;
    diry = (box[1] - agent[1]) / d;
  } else {
    // agent landed exactly on the box; push along the movement direction
    const double m = dist2d(agent_move[0], agent_move[1], 0.0, 0.0);
    if (m > 1e-12) {
      dirx = agent_move[0] / m;
      diry = agent_move[1] / m;
    } else {
      dirx = 1.0;
      diry = 0.0;
    }
  }
  std::vector<double> out = {agent[0] + radius * dirx, agent[1] + radius * diry};
  clip_inplace(out, -kWorkspace, kWorkspace);
  return out;
}

namespace {

class PointReach final : public GoalEnv {
 public:
  explicit PointReach(const EnvOverrides& ov) {
    spec_ = {4, 2, 2, ov.episode_length, ov.success_tolerance};
  }

  std::string name() const override { return "point-reach"; }

  GoalObservation reset(std::uint64_t seed) override {
    Rng rng = make_rng(mix_seed(seed, 0x72656163));
    pos_ = {0.0, 0.0};
    vel_ = {0.0, 0.0};
    std::uniform_real_distribution<double> gdist(-0.8, 0.8);
    goal_ = {gdist(rng), gdist(rng)};
    t_ = 0;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    check_action(action, 2);
    std::vector<double> a = action;
    clip_inplace(a, -1.0, 1.0);
    for (int i = 0; i < 2; ++i) {
      vel_[i] = clip(vel_[i] + 0.05 * a[i], -0.2, 0.2);
      pos_[i] = clip(pos_[i] + vel_[i], -kWorkspace, kWorkspace);
    }
    t_ += 1;
    StepResult r;
    r.obs = observe();
    r.reward = compute_reward(r.obs.achieved_goal, r.obs.desired_goal);
    r.done = t_ >= spec_.episode_length;
    return r;
  }

  std::vector<double> sample_goal(Rng& rng) const override { return uniform_square(rng, 0.8); }

  std::vector<double> achieved_goal_of(const std::vector<double>& obs) const override {
    return {obs[0], obs[1]};
  }

  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<PointReach>(*this); }

 private:
  GoalObservation observe() const {
    GoalObservation g;
    g.observation = {pos_[0], pos_[1], vel_[0], vel_[1]};
    g.achieved_goal = {pos_[0], pos_[1]};
    g.desired_goal = goal_;
    return g;
  }

  std::vector<double> pos_{0.0, 0.0}, vel_{0.0, 0.0}, goal_{0.0, 0.0};
  int t_ = 0;
};

class PointPush final : public GoalEnv {
 public:
  explicit PointPush(const EnvOverrides& ov) {
    spec_ = {6, 2, 2, ov.episode_length, ov.success_tolerance};
  }

  std::string name() const override { return "point-push"; }

  GoalObservation reset(std::uint64_t seed) override {
    Rng rng = make_rng(mix_seed(seed, 0x70757368));
    pos_ = {0.0, 0.0};
    vel_ = {0.0, 0.0};
    goal_ = sample_goal(rng);
    // box uniform in [-0.3, 0.3]^2, rejected until separated from the goal
    do {
      box_ = uniform_square(rng, 0.3);
    } while (dist2d(box_[0], box_[1], goal_[0], goal_[1]) < 0.1);
    t_ = 0;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    check_action(action, 2);
    std::vector<double> a = action;
    clip_inplace(a, -1.0, 1.0);
    std::vector<double> move = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
      vel_[i] = clip(vel_[i] + 0.05 * a[i], -0.2, 0.2);
      const double np = clip(pos_[i] + vel_[i], -kWorkspace, kWorkspace);
      move[i] = np - pos_[i];
      pos_[i] = np;
    }
    box_ = resolve_push_contact(pos_, box_, move, kContactRadius);
    t_ += 1;
    StepResult r;
    r.obs = observe();
    r.reward = compute_reward(r.obs.achieved_goal, r.obs.desired_goal);
    r.done = t_ >= spec_.episode_length;
    return r;
  }

  std::vector<double> sample_goal(Rng  std::vector<double> sample_goal(Rng& rng) const override { return uniform_square(rng, 0.6); } rng) const override { return uniform_square(rng, 0.5); }

  std::vector<double> achieved_goal_of(const std::vector<double>& obs) const override {
    return {obs[4], obs[5]};
  }

  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<PointPush>(*this); }

 private:
  GoalObservation observe() const {
    GoalObservation g;
    g.observation = {pos_[0], pos_[1], vel_[0], vel_[1], box_[0], box_[1]};
    g.achieved_goal = {box_[0], box_[1]};
    g.desired_goal = goal_;
    return g;
  }

  std::vector<double> pos_{0.0, 0.0}, vel_{0.0, 0.0}, box_{0.0, 0.0}, goal_{0.0, 0.0};
  int t_ = 0;
};

// Agent is confined to the left half-plane and commands its own velocity; the
// box keeps sliding with per-step decay 0.9 after an impulse, so goals on the
// right can only be hit by a well-judged strike.
class PointSlide final : public GoalEnv {
 public:
  explicit PointSlide(const EnvOverrides& ov) {
    spec_ = {6, 2, 2, ov.episode_length, ov.success_tolerance};
  }

  std::string name() const override { return "point-slide"; }

  GoalObservation reset(std::uint64_t seed) override {
    Rng rng = make_rng(mix_seed(seed, 0x736c6964));
    pos_ = {-0.5, 0.0};
    goal_ = sample_goal(rng);
    std::uniform_real_distribution<double> bx(-0.35, -0.15);
    std::uniform_real_distribution<double> by(-0.2, 0.2);
    const double x = bx(rng);
    const double y = by(rng);
    box_ = {x, y};
    box_vel_ = {0.0, 0.0};
    t_ = 0;
    return observe();
  }

  StepResult step(const std::vector<double>& action) override {
    check_action(action, 2);
    std::vector<double> a = action;
    clip_inplace(a, -1.0, 1.0);
    std::vector<double> move = {0.0, 0.0};
    for (int i = 0; i < 2; ++i) {
      double np = clip(pos_[i] + 0.1 * a[i], -kWorkspace, kWorkspace);
      if (i == 0) np = std::min(np, 0.0);  // left half-plane only
      move[i] = np - pos_[i];
      pos_[i] = np;
    }
    for (int i = 0; i < 2; ++i) box_vel_[i] *= 0.9;
    const double d = dist2d(pos_[0], pos_[1], box_[0], box_[1]);
    if (d < kContactRadius) {
      double dirx, diry;
      if (d > 1e-12) {
        dirx = (box_[0] - pos_[0]) / d;
        diry = (box_[1] - pos_[1]) / d;
      } else {
        const double m = dist2d(move[0], move[1], 0.0, 0.0);
        dirx = m > 1e-12 ? move[0] / m : 1.0;
        diry = m > 1e-12 ? move[1] / m : 0.0;
      }
      const double speed = dist2d(move[0], move[1], 0.0, 0.0);
      const double impulse = std::min(0.3, 3.0 * speed);
      box_vel_[0] = clip(box_vel_[0] + impulse * dirx, -0.5, 0.5);
      box_vel_[1] = clip(box_vel_[1] + impulse * diry, -0.5, 0.5);
    }
    for (int i = 0; i < 2; ++i) box_[i] = clip(box_[i] + box_vel_[i], -kWorkspace, kWorkspace);
    t_ += 1;
    StepResult r;
    r.obs = observe();
    r.reward = compute_reward(r.obs.achieved_goal, r.obs.desired_goal);
    r.done = t_ >= spec_.episode_length;
    return r;
  }

  std::vector<double> sample_goal(Rng& rng) const override {
    std::uniform_real_distribution<double> gx(0.2, 0.9);
    std::uniform_real_distribution<double> gy(-0.5, 0.5);
    const double x = gx(rng);
    const double y = gy(rng);
    return {x, y};
  }

  std::vector<double> achieved_goal_of(const std::vector<double>& obs) const override {
    return {obs[2], obs[3]};
  }

  std::unique_ptr<GoalEnv> clone() const override { return std::make_unique<PointSlide>(*this); }

 private:
  GoalObservation observe() const {
    GoalObservation g;
    g.observation = {pos_[0], pos_[1], box_[0], box_[1], box_vel_[0], box_vel_[1]};
    g.achieved_goal = {box_[0], box_[1]};
    g.desired_goal = goal_;
    return g;
  }

  std::vector<double> pos_{0.0, 0.0}, box_{0.0, 0.0}, box_vel_{0.0, 0.0}, goal_{0.0, 0.0};
  int t_ = 0;
};

}  // namespace

std::unique_ptr<GoalEnv> make_env(const std::string& name, const EnvOverrides& overrides) {
  if (overrides.episode_length <= 0) throw std::invalid_argument("make_env: episode_length must be positive");
  if (overrides.success_tolerance <= 0.0)
    throw std::invalid_argument("make_env: success_tolerance must be positive");
  if (name == "point-reach") return std::make_unique<PointReach>(overrides);
  if (name == "point-push") return std::make_unique<PointPush>(overrides);
  if (name == "point-slide") return std::make_unique<PointSlide>(overrides);
  throw std::invalid_argument("make_env: unknown task '" + name +
                              "' (valid: point-reach, point-push, point-slide)");
}

}  // namespace iher
