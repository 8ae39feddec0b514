#include "gp/kernel.hpp"

#include <cmath>
#include <memory>

namespace odectrl::gp {

void KernelConfig::validate() const {
  if (!(sigma > 0.0) || !(lengthscale > 0.0) || !(jitter > 0.0))
    throw invalid_argument("KernelConfig: sigma, lengthscale and jitter must be positive");
}

Matrix kernel_matrix(std::span<const double> t1, std::span<const double> t2,
                     const KernelConfig& cfg) {
  cfg.validate();
  const double s2 = cfg.sigma * cfg.sigma;
  const double inv2l2 = 1.0 / (2.0 * cfg.lengthscale * cfg.lengthscale);
  Matrix k(t1.size(), t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i)
    for (std::size_t j = 0; j < t2.size(); ++j) {
      const double d = t1[i] - t2[j];
      k(i, j) = s2 * std::exp(-d * d * inv2l2);
    }
  return k;
}

namespace {

// Cholesky of K + jitter*sigma^2*I with tenfold jitter escalation.
std::pair<Eigen::LLT<Matrix>, double> factor_with_jitter(const Matrix& k,
                                                         const KernelConfig& cfg) {
  const double s2 = cfg.sigma * cfg.sigma;
  double jitter = cfg.jitter;
  while (true) {
    Matrix reg = k;
    reg.diagonal().array() += jitter * s2;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() == Eigen::Success) return {std::move(llt), jitter};
    if (jitter >= 1e-2) {
      const double diag_min = k.diagonal().minCoeff();
      const double diag_max = k.diagonal().maxCoeff();
      throw numerical_error(
          "kernel matrix not positive definite after jitter escalation (n=" +
          std::to_string(k.rows()) + ", jitter=" + std::to_string(jitter) +
          ", diag range [" + std::to_string(diag_min) + ", " + std::to_string(diag_max) + "])");
    }
    jitter *= 10.0;
  }
}

}  // namespace

Interpolant::Interpolant(ActionKnots knots, KernelConfig cfg)
    : times_(std::move(knots.times)), cfg_(cfg) {
  cfg_.validate();
  if (times_.empty()) throw invalid_argument("Interpolant: needs at least one knot");
  if (Eigen::Index(times_.size()) != knots.values.rows())
    throw invalid_argument("Interpolant: knot count mismatch");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i)
    if (!(times_[i] < times_[i + 1]))
      throw invalid_argument("Interpolant: knot times must be strictly increasing");
  const Matrix k = kernel_matrix(times_, times_, cfg_);
  auto [llt, jitter] = factor_with_jitter(k, cfg_);
  jitter_used_ = jitter;
  coeffs_ = llt.solve(knots.values);
}

Vector Interpolant::at(double t) const {
  const double s2 = cfg_.sigma * cfg_.sigma;
  const double inv2l2 = 1.0 / (2.0 * cfg_.lengthscale * cfg_.lengthscale);
  Vector k(times_.size());
  for (std::size_t i = 0; i < times_.size(); ++i) {
    const double d = t - times_[i];
    k(i) = s2 * std::exp(-d * d * inv2l2);
  }
  return coeffs_.transpose() * k;
}

Vector interpolate(const ActionKnots& knots, const KernelConfig& cfg, double t_query) {
  return Interpolant(knots, cfg).at(t_query);
}

Matrix sample_gp(std::span<const double> times, const KernelConfig& cfg, math::Rng& rng,
                 int dims) {
  cfg.validate();
  if (dims < 1) throw invalid_argument("sample_gp: dims must be positive");
  const Matrix k = kernel_matrix(times, times, cfg);
  auto [llt, jitter] = factor_with_jitter(k, cfg);
  (void)jitter;
  const Matrix l = llt.matrixL();
  Matrix z(times.size(), dims);
  for (int j = 0; j < dims; ++j)
    for (std::size_t i = 0; i < times.size(); ++i) z(Eigen::Index(i), j) = rng.normal();
  return l * z;
}

envs::ActionFn random_initial_policy(const envs::EnvSpec& env, std::span<const double> times,
                                     math::Rng& rng) {
  KernelConfig cfg;  // S2.3 values: sigma=0.5, lengthscale=0.5
  const Matrix draw = sample_gp(times, cfg, rng, env.act_dim);
  auto interp = std::make_shared<Interpolant>(
      ActionKnots{{times.begin(), times.end()}, draw}, cfg);
  const double a_max = env.a_max;
  return [interp, a_max](double t, const Vector&) {
    Vector a = interp->at(t);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = a_max * std::tanh(a(i));
    return a;
  };
}

envs::ActionFn exploring_policy(const envs::EnvSpec& env, envs::ActionFn base,
                                std::span<const double> times, math::Rng& rng) {
  KernelConfig cfg;
  cfg.sigma = 0.1;  // S2.3 exploration scale
  cfg.lengthscale = 0.5;
  const Matrix draw = sample_gp(times, cfg, rng, env.act_dim);
  auto interp = std::make_shared<Interpolant>(
      ActionKnots{{times.begin(), times.end()}, draw}, cfg);
  const double a_max = env.a_max;
  return [interp, base = std::move(base), a_max](double t, const Vector& obs) {
    Vector a = base(t, obs) + interp->at(t);
    for (Eigen::Index i = 0; i < a.size(); ++i)
      a(i) = std::min(a_max, std::max(-a_max, a(i)));
    return a;
  };
}

}  // namespace odectrl::gp
