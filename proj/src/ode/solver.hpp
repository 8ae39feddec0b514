#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace odectrl::ode {

using Vector = Eigen::VectorXd;

enum class Method { Euler, RK4, RK12, RK23, Dopri5, RK78 };

bool is_adaptive(Method method);
const char* method_name(Method method);
Method method_from_name(const std::string& name);

struct SolverConfig {
  Method method = Method::Dopri5;
  double rtol = 1e-7;
  double atol = 1e-7;
  int substeps = 1;  // fixed-step methods: steps per eval interval
  std::int64_t max_steps = 10'000'000;
  void validate() const;
};

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  std::int64_t field_evals = 0;
};

struct DenseTrajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  StepStats stats;
};

// (t, s) -> ds/dt
using VectorField = std::function<Vector(double, const Vector&)>;

// Non-finite field output or state; carries the last time successfully
// reached.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, double time_reached)
      : Error(ErrorCode::Numerical, what), time_reached_(time_reached) {}
  double time_reached() const { return time_reached_; }

 private:
  double time_reached_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorCode::Numerical, what) {}
};

// Integrates the field from eval_times.front() and returns the state at every
// requested time, exactly (steps are clamped to land on them). Adaptive
// methods control the local error against atol + rtol * |s|.
DenseTrajectory integrate(const VectorField& field, const Vector& s0,
                          std::span<const double> eval_times, const SolverConfig& config);

// Inserts `substeps` equally spaced points per interval; interval endpoints
// are kept exactly. The fixed-step integrators walk this grid, and the
// differentiable path uses the identical one so that both produce
// bit-identical states.
std::vector<double> refine_grid(std::span<const double> times, int substeps);

// Least-squares slope of log(error at t1) versus log(h) for a fixed-step
// method, measured against an analytic solution.
double convergence_order(Method method, const VectorField& field, const Vector& s0, double t0,
                         double t1, const std::function<Vector(double)>& exact,
                         std::span<const double> step_sizes);

}  // namespace odectrl::ode
