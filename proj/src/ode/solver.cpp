#include "ode/solver.hpp"

#include <algorithm>
#include <cmath>

#include "ode/tableau.hpp"

namespace odectrl::ode {

bool is_adaptive(Method method) {
  switch (method) {
    case Method::Euler:
    case Method::RK4: return false;
    default: return true;
  }
}

const char* method_name(Method method) {
  switch (method) {
    case Method::Euler: return "euler";
    case Method::RK4: return "rk4";
    case Method::RK12: return "rk12";
    case Method::RK23: return "rk23";
    case Method::Dopri5: return "dopri5";
    case Method::RK78: return "rk78";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "euler") return Method::Euler;
  if (name == "rk4") return Method::RK4;
  if (name == "rk12") return Method::RK12;
  if (name == "rk23") return Method::RK23;
  if (name == "dopri5") return Method::Dopri5;
  if (name == "rk78") return Method::RK78;
  throw invalid_argument("unknown solver method: " + name);
}

void SolverConfig::validate() const {
  if (is_adaptive(method)) {
    if (!(rtol > 0.0) || !(atol > 0.0))
      throw invalid_argument("adaptive methods need positive tolerances");
  } else if (substeps < 1) {
    throw invalid_argument("fixed-step methods need substeps >= 1");
  }
  if (max_steps < 1) throw invalid_argument("max_steps must be positive");
}

std::vector<double> refine_grid(std::span<const double> times, int substeps) {
  if (times.size() < 1) throw invalid_argument("refine_grid: empty time grid");
  if (substeps < 1) throw invalid_argument("refine_grid: substeps must be >= 1");
  std::vector<double> grid;
  grid.reserve((times.size() - 1) * std::size_t(substeps) + 1);
  grid.push_back(times[0]);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double t0 = times[i], t1 = times[i + 1];
    const double h = (t1 - t0) / double(substeps);
    for (int k = 1; k < substeps; ++k) grid.push_back(t0 + k * h);
    grid.push_back(t1);
  }
  return grid;
}

namespace {

const ButcherTableau& tableau_for(Method method) {
  switch (method) {
    case Method::RK12: return heun_euler_21();
    case Method::RK23: return bogacki_shampine_32();
    case Method::Dopri5: return dormand_prince_54();
    case Method::RK78: return dormand_prince_87();
    default: throw invalid_argument("no tableau for fixed-step method");
  }
}

struct FieldEval {
  const VectorField& field;
  StepStats& stats;
  Vector operator()(double t, const Vector& s) const {
    ++stats.field_evals;
    Vector ds = field(t, s);
    if (ds.size() != s.size()) throw invalid_argument("vector field changed dimension");
    if (!ds.allFinite())
      throw InstabilityError("vector field produced a non-finite derivative at t=" +
                                 std::to_string(t),
                             t);
    return ds;
  }
};

void check_eval_times(std::span<const double> eval_times) {
  if (eval_times.empty()) throw invalid_argument("integrate: eval_times is empty");
  for (std::size_t i = 0; i + 1 < eval_times.size(); ++i)
    if (!(eval_times[i] < eval_times[i + 1]))
      throw invalid_argument("integrate: eval_times must be strictly increasing");
}

DenseTrajectory integrate_fixed(const VectorField& field, const Vector& s0,
                                std::span<const double> eval_times, const SolverConfig& config) {
  DenseTrajectory out;
  FieldEval f{field, out.stats};
  const std::vector<double> grid = refine_grid(eval_times, config.substeps);
  out.times.push_back(eval_times[0]);
  out.states.push_back(s0);
  Vector y = s0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double h = grid[k + 1] - grid[k];
    if (config.method == Method::Euler) {
      Vector k1 = f(t, y);
      y = y + h * k1;
    } else {
      // Kept textually in sync with Tape::add_rowscaled / Tape::rk4_combine so
      // the differentiable path is bit-identical on the same grid.
      Vector k1 = f(t, y);
      Vector k2 = f(t + h * 0.5, y + (h * 0.5) * k1);
      Vector k3 = f(t + h * 0.5, y + (h * 0.5) * k2);
      Vector k4 = f(t + h, y + (h * 1.0) * k3);
      y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    ++out.stats.accepted;
    if (!y.allFinite())
      throw InstabilityError("state became non-finite at t=" + std::to_string(grid[k + 1]),
                             grid[k + 1]);
    if ((k + 1) % std::size_t(config.substeps) == 0) {
      out.times.push_back(grid[k + 1]);
      out.states.push_back(y);
    }
  }
  return out;
}

DenseTrajectory integrate_adaptive(const VectorField& field, const Vector& s0,
                                   std::span<const double> eval_times,
                                   const SolverConfig& config) {
  const ButcherTableau& tab = tableau_for(config.method);
  DenseTrajectory out;
  FieldEval f{field, out.stats};
  out.times.push_back(eval_times[0]);
  out.states.push_back(s0);

  const double span = eval_times.back() - eval_times.front();
  double h = 1e-2 * span;
  double t = eval_times[0];
  Vector y = s0;
  std::vector<Vector> k(std::size_t(tab.stages()));

  for (std::size_t target_idx = 1; target_idx < eval_times.size(); ++target_idx) {
    const double target = eval_times[target_idx];
    while (t < target) {
      if (out.stats.accepted + out.stats.rejected >= config.max_steps)
        throw DivergenceError("step count exceeded max_steps=" +
                              std::to_string(config.max_steps));
      const bool clamped = t + h >= target;
      const double hs = clamped ? target - t : h;
      if (!(hs > 0.0) || hs < 1e-14 * std::max(1.0, std::abs(t)))
        throw InstabilityError("step size underflow at t=" + std::to_string(t), t);

      bool finite = true;
      k[0] = f(t, y);
      for (int i = 1; i < tab.stages(); ++i) {
        Vector yi = y;
        for (int j = 0; j < i; ++j)
          if (tab.a[i][j] != 0.0) yi += (hs * tab.a[i][j]) * k[j];
        if (!yi.allFinite()) {
          finite = false;
          break;
        }
        k[i] = f(t + tab.c[i] * hs, yi);
      }

      Vector y_new, err;
      if (finite) {
        y_new = y;
        err = Vector::Zero(y.size());
        for (int i = 0; i < tab.stages(); ++i) {
          if (tab.b[i] != 0.0) y_new += (hs * tab.b[i]) * k[i];
          const double d = tab.b[i] - tab.b_err[i];
          if (d != 0.0) err += (hs * d) * k[i];
        }
        finite = y_new.allFinite() && err.allFinite();
      }

      if (!finite) {
        ++out.stats.rejected;
        h = hs * 0.2;
        continue;
      }

      double err_norm = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double scale =
            config.atol + config.rtol * std::max(std::abs(y(i)), std::abs(y_new(i)));
        const double e = err(i) / scale;
        err_norm += e * e;
      }
      err_norm = std::sqrt(err_norm / double(y.size()));

      const double fac =
          err_norm > 0.0 ? 0.9 * std::pow(1.0 / err_norm, 1.0 / double(tab.error_order + 1))
                         : 5.0;
      const double h_next = hs * std::min(5.0, std::max(0.2, fac));
      if (err_norm <= 1.0) {
        ++out.stats.accepted;
        t = clamped ? target : t + hs;
        y = std::move(y_new);
        h = h_next;
      } else {
        ++out.stats.rejected;
        h = h_next;
      }
    }
    out.times.push_back(target);
    out.states.push_back(y);
  }
  return out;
}

}  // namespace

DenseTrajectory integrate(const VectorField& field, const Vector& s0,
                          std::span<const double> eval_times, const SolverConfig& config) {
  config.validate();
  check_eval_times(eval_times);
  if (!s0.allFinite()) throw invalid_argument("integrate: initial state must be finite");
  if (eval_times.size() == 1) {
    DenseTrajectory out;
    out.times.push_back(eval_times[0]);
    out.states.push_back(s0);
    return out;
  }
  return is_adaptive(config.method) ? integrate_adaptive(field, s0, eval_times, config)
                                    : integrate_fixed(field, s0, eval_times, config);
}

double convergence_order(Method method, const VectorField& field, const Vector& s0, double t0,
                         double t1, const std::function<Vector(double)>& exact,
                         std::span<const double> step_sizes) {
  if (is_adaptive(method)) throw invalid_argument("convergence_order: fixed-step methods only");
  if (step_sizes.size() < 2) throw invalid_argument("convergence_order: need >= 2 step sizes");
  const double span = t1 - t0;
  std::vector<double> log_h, log_err;
  const double times[2] = {t0, t1};
  for (double h : step_sizes) {
    const int n = std::max(1, int(std::llround(span / h)));
    SolverConfig cfg;
    cfg.method = method;
    cfg.substeps = n;
    DenseTrajectory traj = integrate(field, s0, times, cfg);
    const double err = (traj.states.back() - exact(t1)).norm();
    log_h.push_back(std::log(span / double(n)));
    log_err.push_back(std::log(std::max(err, 1e-300)));
  }
  const double n = double(log_h.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) mx += log_h[i], my += log_err[i];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    sxy += (log_h[i] - mx) * (log_err[i] - my);
    sxx += (log_h[i] - mx) * (log_h[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace odectrl::ode
