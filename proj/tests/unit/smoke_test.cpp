#include <cstdio>
#include "math/mlp.hpp"
#include "math/adam.hpp"
#include "ode/solver.hpp"
#include "ode/diff_integrate.hpp"
#include "envs/env.hpp"
#include "gp/kernel.hpp"

using namespace odectrl;

int main() {
  // tape FD check on a tiny MLP
  math::Rng rng(1);
  math::MLPSpec spec{{2, 8, 1}, math::Activation::Elu};
  math::ParamStore params;
  math::init_mlp_params(spec, params, rng);
  math::Matrix x(3, 2);
  x << 0.3, -0.2, 1.0, 0.5, -0.7, 0.1;
  math::Tape tape;
  math::Var xv = tape.constant(x);
  math::Var out = math::mlp_forward(tape, spec, params, xv);
  math::Var loss = tape.sum_all(out);
  tape.backward(loss);
  tape.accumulate_param_grads();
  double base = tape.scalar(loss);
  double& w00 = params.at("W0").value(0, 0);
  const double eps = 1e-6, saved = w00;
  w00 = saved + eps;
  double up = math::mlp_forward(spec, params, x).sum();
  w00 = saved - eps;
  double dn = math::mlp_forward(spec, params, x).sum();
  w00 = saved;
  double fd = (up - dn) / (2 * eps);
  double ad = params.at("W0").grad(0, 0);
  std::printf("loss=%.6f fd=%.8f ad=%.8f relerr=%.2e\n", base, fd, ad,
              std::abs(fd - ad) / std::max(1e-12, std::abs(fd)));
  if (std::abs(fd - ad) / std::max(1e-12, std::abs(fd)) > 1e-6) return 1;

  // dopri5 e^{-1}
  ode::SolverConfig cfg;
  cfg.rtol = cfg.atol = 1e-8;
  double times[2] = {0.0, 1.0};
  auto traj = ode::integrate([](double, const Eigen::VectorXd& s) { return Eigen::VectorXd(-s); },
                             Eigen::VectorXd::Ones(1), times, cfg);
  std::printf("e^-1 = %.9f (err %.2e)\n", traj.states.back()(0),
              std::abs(traj.states.back()(0) - std::exp(-1.0)));
  if (std::abs(traj.states.back()(0) - std::exp(-1.0)) > 1e-7) return 1;

  // pendulum equilibrium
  auto env = envs::make_env(envs::EnvId::Pendulum);
  auto d = envs::phys_derivative(env, envs::hanging_state(env), Eigen::VectorXd::Zero(1));
  std::printf("pendulum hanging deriv norm = %.2e\n", d.norm());
  if (d.norm() > 1e-14) return 1;

  // GP draw determinism
  std::vector<double> ts = {0.0, 0.5, 1.0};
  math::Rng r1(7), r2(7);
  gp::KernelConfig kc;
  auto g1 = gp::sample_gp(ts, kc, r1, 1), g2 = gp::sample_gp(ts, kc, r2, 1);
  if (g1 != g2) return 1;
  std::printf("smoke ok\n");
  return 0;
}
