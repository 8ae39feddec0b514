#pragma once

#include <functional>
#include <string>

#include "math/rng.hpp"
#include "ode/solver.hpp"

namespace odectrl::envs {

using Vector = Eigen::VectorXd;

enum class EnvId { Pendulum, CartPole, Acrobot };

// Per-environment constants. Observations are s = (q, p): q are Cartesian,
// goal-comparable position features and p the raw velocities.
struct EnvSpec {
  EnvId id;
  std::string name;
  int obs_dim;   // d = q_dim + p_dim
  int act_dim;   // m
  int phys_dim;  // generalized coordinates + velocities
  int q_dim;
  int n_initial_traj;   // N0
  int n_exploring;      // N_exp (0 when the paper leaves it out)
  double vel_penalty;   // c_p
  double act_penalty;   // c_a
  double a_max;         // per-dimension action bound
  Vector s_box;         // phys-space half-widths around the hanging rest state
  Vector s_goal;        // goal position features (length q_dim)
  double link_length;   // l
};

EnvSpec make_env(EnvId id);
EnvSpec make_env(const std::string& name);

// Physical time derivative with the action clamped to [-a_max, a_max].
Vector phys_derivative(const EnvSpec& env, const Vector& phys, const Vector& action);

// The hanging rest configuration (the center of the initial-state box).
Vector hanging_state(const EnvSpec& env);

// A physical state whose observation hits s_goal exactly, at rest.
Vector goal_state(const EnvSpec& env);

Vector observe(const EnvSpec& env, const Vector& phys);

double reward(const EnvSpec& env, const Vector& q, const Vector& p, const Vector& action);
double reward_obs(const EnvSpec& env, const Vector& obs, const Vector& action);

// Hanging rest plus a uniform draw from [-s_box, s_box].
Vector sample_initial_state(const EnvSpec& env, math::Rng& rng);

// Total mechanical energy (used by conservation and work-energy checks;
// meaningful for the unforced systems).
double pendulum_energy(const EnvSpec& env, const Vector& phys);

// Continuous control signal: (t, observation) -> action. Open-loop policies
// ignore the observation.
using ActionFn = std::function<Vector(double, const Vector&)>;

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> obs;      // recorded observations (noisy when configured)
  std::vector<Vector> actions;  // applied action at each eval time
  std::vector<Vector> phys;     // true physical state at each eval time
  std::string tag;              // initial | policy | exploration
  int round = -1;
  int length() const { return int(times.size()); }
};

// Thrown when the reference integration blows up; carries what was recorded
// before the failure.
class EnvFailure : public Error {
 public:
  EnvFailure(const std::string& what, Trajectory partial)
      : Error(ErrorCode::Numerical, what), partial_(std::move(partial)) {}
  const Trajectory& partial() const { return partial_; }

 private:
  Trajectory partial_;
};

// Ground-truth rollout: RK78 at rtol=atol=1e-10, observations recorded at
// eval_times with i.i.d. N(0, noise_std^2) noise added per coordinate.
Trajectory rollout_true(const EnvSpec& env, const Vector& phys0, const ActionFn& action_fn,
                        std::span<const double> eval_times, double noise_std,
                        math::Rng& noise_rng);

}  // namespace odectrl::envs
