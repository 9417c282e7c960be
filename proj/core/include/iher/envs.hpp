#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "iher/rng.hpp"

namespace iher {

struct GoalObservation {
  std::vector<double> observation;
  std::vector<double> achieved_goal;
  std::vector<double> desired_goal;
};

struct EnvSpec {
  int obs_dim = 0;
  int action_dim = 0;
  int goal_dim = 0;
  int episode_length = 50;
  double success_tolerance = 0.05;
};

// Sparse binary reward: 0 if the goal is satisfied (distance <= tolerance), -1 otherwise.
double sparse_reward(const std::vector<double>& achieved_goal, const std::vector<double>& desired_goal,
                     double tolerance);
bool goal_reached(const std::vector<double>& achieved_goal, const std::vector<double>& desired_goal,
                  double tolerance);

struct StepResult {
  GoalObservation obs;
  double reward = -1.0;
  bool done = false;
};

// Deterministic multi-goal environment. step() is a pure function of internal
// state and the (clipped) action; all randomness enters through reset(seed).
class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  const EnvSpec& spec() const { return spec_; }
  virtual std::string name() const = 0;

  virtual GoalObservation reset(std::uint64_t seed) = 0;
  virtual StepResult step(const std::vector<double>& action) = 0;

  // The task's goal distribution, also used for imaginary episodes.
  virtual std::vector<double> sample_goal(Rng& rng) const = 0;
  // Achieved goal as a known function of the observation vector.
  virtual std::vector<double> achieved_goal_of(const std::vector<double>& obs) const = 0;

  virtual std::unique_ptr<GoalEnv> clone() const = 0;

  double compute_reward(const std::vector<double>& achieved, const std::vector<double>& desired) const {
    return sparse_reward(achieved, desired, spec_.success_tolerance);
  }
  bool is_success(const std::vector<double>& achieved, const std::vector<double>& desired) const {
    return goal_reached(achieved, desired, spec_.success_tolerance);
  }

 protected:
  EnvSpec spec_;
};

// Contact resolution used by point-push: a box closer than `radius` to the
// agent is displaced along the agent->box line to exactly `radius` away.
// agent_move breaks the tie when the agent lands exactly on the box.
std::vector<double> resolve_push_contact(const std::vector<double>& agent, const std::vector<double>& box,
                                         const std::vector<double>& agent_move, double radius);

struct EnvOverrides {
  int episode_length = 50;
  double success_tolerance = 0.05;
};

// Task names: "point-reach" | "point-push" | "point-slide". Throws on unknown names.
std::unique_ptr<GoalEnv> make_env(const std::string& name, const EnvOverrides& overrides = {});

}  // namespace iher
