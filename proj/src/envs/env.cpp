#include "envs/env.hpp"

#include <cmath>

namespace odectrl::envs {

namespace {

constexpr double kGravity = 9.81;

// Pendulum: unit-mass, unit-length rod pivoting at one end, torque-actuated,
// angle measured from upright.
constexpr double kPendulumMass = 1.0;

// CartPole: frictionless Barto-Sutton equations with a continuous force.
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;

// Acrobot: two-link arm, torque on both joints, angle of the first link
// measured from hanging down, second link relative to the first.
constexpr double kLinkMass = 1.0;
constexpr double kLinkCom = 0.5;      // center of mass along each link
constexpr double kLinkInertia = 1.0;  // about each link's center

Vector clamp_action(const EnvSpec& env, const Vector& action) {
  Vector a = action;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    a(i) = std::min(env.a_max, std::max(-env.a_max, a(i)));
  return a;
}

}  // namespace

EnvSpec make_env(EnvId id) {
  EnvSpec env;
  env.id = id;
  env.link_length = 1.0;
  switch (id) {
    case EnvId::Pendulum:
      env.name = "pendulum";
      env.obs_dim = 3;
      env.act_dim = 1;
      env.phys_dim = 2;
      env.q_dim = 2;
      env.n_initial_traj = 3;
      env.n_exploring = 0;
      env.vel_penalty = 1e-2;
      env.act_penalty = 1e-2;
      env.a_max = 2.0;
      env.s_box = (Vector(2) << M_PI, 3.0).finished();
      env.s_goal = (Vector(2) << 0.0, env.link_length).finished();
      break;
    case EnvId::CartPole:
      env.name = "cartpole";
      env.obs_dim = 5;
      env.act_dim = 1;
      env.phys_dim = 4;
      env.q_dim = 3;
      env.n_initial_traj = 5;
      env.n_exploring = 2;
      env.vel_penalty = 1e-2;
      env.act_penalty = 1e-2;
      env.a_max = 3.0;
      env.s_box = Vector::Constant(4, 0.05);
      env.s_goal = (Vector(3) << 0.0, 0.0, env.link_length).finished();
      break;
    case EnvId::Acrobot:
      env.name = "acrobot";
      env.obs_dim = 4;
      env.act_dim = 2;
      env.phys_dim = 4;
      env.q_dim = 2;
      env.n_initial_traj = 7;
      env.n_exploring = 3;
      env.vel_penalty = 1e-4;
      env.act_penalty = 1e-2;
      env.a_max = 4.0;
      env.s_box = Vector::Constant(4, 0.1);
      env.s_goal = (Vector(2) << 0.0, 2.0 * env.link_length).finished();
      break;
  }
  return env;
}

EnvSpec make_env(const std::string& name) {
  if (name == "pendulum") return make_env(EnvId::Pendulum);
  if (name == "cartpole") return make_env(EnvId::CartPole);
  if (name == "acrobot") return make_env(EnvId::Acrobot);
  throw invalid_argument("unknown environment: " + name);
}

Vector phys_derivative(const EnvSpec& env, const Vector& phys, const Vector& action) {
  if (phys.size() != env.phys_dim) throw invalid_argument("phys_derivative: state size");
  if (action.size() != env.act_dim) throw invalid_argument("phys_derivative: action size");
  const Vector a = clamp_action(env, action);
  Vector d(env.phys_dim);
  const double l = env.link_length;
  switch (env.id) {
    case EnvId::Pendulum: {
      const double theta = phys(0), omega = phys(1);
      d(0) = omega;
      d(1) = 3.0 * kGravity / (2.0 * l) * std::sin(theta) +
             3.0 * a(0) / (kPendulumMass * l * l);
      break;
    }
    case EnvId::CartPole: {
      const double theta = phys(1), xdot = phys(2), omega = phys(3);
      const double sin_t = std::sin(theta), cos_t = std::cos(theta);
      const double total = kCartMass + kPoleMass;
      const double temp = (a(0) + kPoleMass * l * omega * omega * sin_t) / total;
      const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                               (l * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / total));
      const double x_acc = temp - kPoleMass * l * theta_acc * cos_t / total;
      d(0) = xdot;
      d(1) = omega;
      d(2) = x_acc;
      d(3) = theta_acc;
      break;
    }
    case EnvId::Acrobot: {
      const double t2 = phys(1), w1 = phys(2), w2 = phys(3);
      const double m = kLinkMass, lc = kLinkCom, in = kLinkInertia;
      const double cos2 = std::cos(t2), sin2 = std::sin(t2);
      const double d11 = m * lc * lc + m * (l * l + lc * lc + 2.0 * l * lc * cos2) + 2.0 * in;
      const double d12 = m * (lc * lc + l * lc * cos2) + in;
      const double d22 = m * lc * lc + in;
      const double h1 = -m * l * lc * sin2 * (2.0 * w1 * w2 + w2 * w2);
      const double h2 = m * l * lc * sin2 * w1 * w1;
      const double s1 = std::sin(phys(0)), s12 = std::sin(phys(0) + t2);
      const double g1 = (m * lc + m * l) * kGravity * s1 + m * lc * kGravity * s12;
      const double g2 = m * lc * kGravity * s12;
      const double r1 = a(0) - h1 - g1;
      const double r2 = a(1) - h2 - g2;
      const double det = d11 * d22 - d12 * d12;
      d(0) = w1;
      d(1) = w2;
      d(2) = (d22 * r1 - d12 * r2) / det;
      d(3) = (d11 * r2 - d12 * r1) / det;
      break;
    }
  }
  return d;
}

Vector hanging_state(const EnvSpec& env) {
  Vector x = Vector::Zero(env.phys_dim);
  if (env.id == EnvId::Pendulum) x(0) = M_PI;
  if (env.id == EnvId::CartPole) x(1) = M_PI;
  // Acrobot hangs at zero angles.
  return x;
}

Vector goal_state(const EnvSpec& env) {
  Vector x = Vector::Zero(env.phys_dim);
  if (env.id == EnvId::Acrobot) x(0) = M_PI;
  return x;
}

Vector observe(const EnvSpec& env, const Vector& phys) {
  if (phys.size() != env.phys_dim) throw invalid_argument("observe: state size");
  const double l = env.link_length;
  Vector obs(env.obs_dim);
  switch (env.id) {
    case EnvId::Pendulum:
      obs << l * std::sin(phys(0)), l * std::cos(phys(0)), phys(1);
      break;
    case EnvId::CartPole:
      obs << phys(0), l * std::sin(phys(1)), l * std::cos(phys(1)), phys(2), phys(3);
      break;
    case EnvId::Acrobot: {
      const double t1 = phys(0), t12 = phys(0) + phys(1);
      obs << l * std::sin(t1) + l * std::sin(t12), -l * std::cos(t1) - l * std::cos(t12),
          phys(2), phys(3);
      break;
    }
  }
  return obs;
}

double reward(const EnvSpec& env, const Vector& q, const Vector& p, const Vector& action) {
  if (q.size() != env.q_dim) throw invalid_argument("reward: q size");
  const double dist2 = (q - env.s_goal).squaredNorm();
  return std::exp(-dist2 - env.vel_penalty * p.squaredNorm()) -
         env.act_penalty * action.squaredNorm();
}

double reward_obs(const EnvSpec& env, const Vector& obs, const Vector& action) {
  return reward(env, obs.head(env.q_dim), obs.tail(env.obs_dim - env.q_dim), action);
}

Vector sample_initial_state(const EnvSpec& env, math::Rng& rng) {
  Vector x = hanging_state(env);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x(i) += rng.uniform(-env.s_box(i), env.s_box(i));
  return x;
}

double pendulum_energy(const EnvSpec& env, const Vector& phys) {
  const double l = env.link_length;
  const double inertia = kPendulumMass * l * l / 3.0;  // rod about the pivot
  return 0.5 * inertia * phys(1) * phys(1) +
         kPendulumMass * kGravity * (l / 2.0) * std::cos(phys(0));
}

namespace {

Trajectory record_rollout(const EnvSpec& env, const Vector& phys0, const ActionFn& action_fn,
                          std::span<const double> eval_times, double noise_std,
                          math::Rng& noise_rng, const ode::DenseTrajectory& dense) {
  Trajectory traj;
  for (std::size_t i = 0; i < dense.times.size(); ++i) {
    const double t = dense.times[i];
    const Vector& x = dense.states[i];
    Vector obs = observe(env, x);
    Vector applied = action_fn(t, obs);
    applied = applied.cwiseMin(env.a_max).cwiseMax(-env.a_max);
    if (noise_std > 0.0)
      for (Eigen::Index j = 0; j < obs.size(); ++j) obs(j) += noise_rng.normal(0.0, noise_std);
    traj.times.push_back(t);
    traj.obs.push_back(std::move(obs));
    traj.actions.push_back(std::move(applied));
    traj.phys.push_back(x);
  }
  (void)phys0;
  (void)eval_times;
  return traj;
}

}  // namespace

Trajectory rollout_true(const EnvSpec& env, const Vector& phys0, const ActionFn& action_fn,
                        std::span<const double> eval_times, double noise_std,
                        math::Rng& noise_rng) {
  ode::SolverConfig cfg;
  cfg.method = ode::Method::RK78;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-10;
  const ode::VectorField field = [&](double t, const Vector& x) {
    return phys_derivative(env, x, action_fn(t, observe(env, x)));
  };
  try {
    const ode::DenseTrajectory dense = integrate(field, phys0, eval_times, cfg);
    return record_rollout(env, phys0, action_fn, eval_times, noise_std, noise_rng, dense);
  } catch (const ode::InstabilityError& e) {
    // Failure path: redo interval by interval to recover what is recoverable.
    ode::DenseTrajectory partial;
    partial.times.push_back(eval_times[0]);
    partial.states.push_back(phys0);
    Vector y = phys0;
    for (std::size_t i = 0; i + 1 < eval_times.size(); ++i) {
      const double pair[2] = {eval_times[i], eval_times[i + 1]};
      try {
        const ode::DenseTrajectory seg = integrate(field, y, pair, cfg);
        y = seg.states.back();
        partial.times.push_back(eval_times[i + 1]);
        partial.states.push_back(y);
      } catch (const Error&) {
        break;
      }
    }
    Trajectory rec =
        record_rollout(env, phys0, action_fn, eval_times, noise_std, noise_rng, partial);
    throw EnvFailure("environment integration unstable: " + std::string(e.what()),
                     std::move(rec));
  }
}

}  // namespace odectrl::envs
