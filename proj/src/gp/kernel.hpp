#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "common/error.hpp"
#include "envs/env.hpp"
#include "math/rng.hpp"

namespace odectrl::gp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct KernelConfig {
  double sigma = 0.5;        // output scale
  double lengthscale = 0.5;  // seconds
  double jitter = 1e-6;      // diagonal regularizer, relative to sigma^2
  void validate() const;
};

// K[i][j] = sigma^2 * exp(-(t1_i - t2_j)^2 / (2 l^2))
Matrix kernel_matrix(std::span<const double> t1, std::span<const double> t2,
                     const KernelConfig& cfg);

struct ActionKnots {
  std::vector<double> times;     // strictly increasing
  Matrix values;                 // T x m
};

// Kernel-ridge interpolant a(t) = k(t, T) (K(T,T) + jitter I)^{-1} A, factored
// once. Immutable and shareable after construction. SE kernels on
// near-duplicate timestamps are ill-conditioned, so the jitter escalates
// tenfold up to 1e-2 sigma^2 before giving up.
class Interpolant {
 public:
  Interpolant(ActionKnots knots, KernelConfig cfg);

  Vector at(double t) const;  // m-vector
  int dims() const { return int(coeffs_.cols()); }
  double jitter_used() const { return jitter_used_; }

 private:
  std::vector<double> times_;
  Matrix coeffs_;  // T x m
  KernelConfig cfg_;
  double jitter_used_;
};

// One-off interpolation (builds the factorization internally).
Vector interpolate(const ActionKnots& knots, const KernelConfig& cfg, double t_query);

// Draw = L z with L = chol(K + jitter I); one independent column per output
// dimension. Returns T x dims.
Matrix sample_gp(std::span<const double> times, const KernelConfig& cfg, math::Rng& rng,
                 int dims);

// Smooth open-loop policy for the bootstrap dataset: a(t) = a_max *
// tanh(g(t)) with g the kernel interpolant through a GP draw at the
// observation times.
envs::ActionFn random_initial_policy(const envs::EnvSpec& env, std::span<const double> times,
                                     math::Rng& rng);

// pi_explore(t, s) = clamp(pi(s) + z(t), +-a_max) with z a GP draw at the
// rollout times extended continuously by the same interpolant.
envs::ActionFn exploring_policy(const envs::EnvSpec& env, envs::ActionFn base,
                                std::span<const double> times, math::Rng& rng);

}  // namespace odectrl::gp
