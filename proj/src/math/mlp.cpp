#include "math/mlp.hpp"

#include <cmath>

namespace odectrl::math {

void MLPSpec::validate() const {
  if (widths.size() < 3) throw invalid_argument("MLPSpec: needs at least one hidden layer");
  for (int w : widths)
    if (w <= 0) throw invalid_argument("MLPSpec: widths must be positive");
}

namespace {

Activation layer_act(const MLPSpec& spec, int layer) {
  const bool last = layer == spec.layer_count() - 1;
  if (!last) return spec.hidden;
  return spec.output == OutputTransform::TanhScaled ? Activation::Tanh : Activation::Identity;
}

double layer_scale(const MLPSpec& spec, int layer) {
  const bool last = layer == spec.layer_count() - 1;
  return (last && spec.output == OutputTransform::TanhScaled) ? spec.output_scale : 1.0;
}

}  // namespace

void init_mlp_params(const MLPSpec& spec, ParamStore& params, Rng& rng) {
  spec.validate();
  for (int l = 0; l < spec.layer_count(); ++l) {
    const int fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const double bound = 1.0 / std::sqrt(double(fan_in));
    Matrix w(fan_in, fan_out);
    for (Eigen::Index j = 0; j < w.size(); ++j) w.data()[j] = rng.uniform(-bound, bound);
    Matrix b(1, fan_out);
    for (Eigen::Index j = 0; j < b.size(); ++j) b.data()[j] = rng.uniform(-bound, bound);
    params.add("W" + std::to_string(l), std::move(w));
    params.add("b" + std::to_string(l), std::move(b));
  }
}

Matrix mlp_forward(const MLPSpec& spec, const ParamStore& params, const Matrix& x) {
  if (x.cols() != spec.input_dim()) throw invalid_argument("mlp_forward: input width mismatch");
  Matrix h = x;
  for (int l = 0; l < spec.layer_count(); ++l) {
    const Matrix& w = params.at("W" + std::to_string(l)).value;
    const Matrix& b = params.at("b" + std::to_string(l)).value;
    if (w.rows() != h.cols()) throw invalid_argument("mlp_forward: parameter shape mismatch");
    h = apply_layer(h, w, b, layer_act(spec, l), layer_scale(spec, l));
  }
  return h;
}

Vector mlp_forward(const MLPSpec& spec, const ParamStore& params, const Vector& x) {
  Matrix out = mlp_forward(spec, params, Matrix(x.transpose()));
  return out.row(0).transpose();
}

MLPVars mlp_vars(Tape& tape, const MLPSpec& spec, ParamStore& params, bool trainable) {
  MLPVars vars;
  for (int l = 0; l < spec.layer_count(); ++l) {
    ParamBlock& w = params.at("W" + std::to_string(l));
    ParamBlock& b = params.at("b" + std::to_string(l));
    vars.weights.push_back(trainable ? tape.param(w) : tape.constant(w.value));
    vars.biases.push_back(trainable ? tape.param(b) : tape.constant(b.value));
  }
  return vars;
}

Var mlp_apply(Tape& tape, const MLPSpec& spec, const MLPVars& vars, Var x) {
  Var h = x;
  for (int l = 0; l < spec.layer_count(); ++l)
    h = tape.affine_act(h, vars.weights[l], vars.biases[l], layer_act(spec, l),
                        layer_scale(spec, l));
  return h;
}

Var mlp_forward(Tape& tape, const MLPSpec& spec, ParamStore& params, Var x, bool trainable) {
  return mlp_apply(tape, spec, mlp_vars(tape, spec, params, trainable), x);
}

double gaussian_log_density(const Vector& x, const Vector& mean, const Vector& var) {
  if (x.size() != mean.size() || x.size() != var.size())
    throw invalid_argument("gaussian_log_density: length mismatch");
  const double log2pi = std::log(2.0 * 3.14159265358979323846);
  double out = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(var(i) > 0.0)) throw invalid_argument("gaussian_log_density: variance must be positive");
    const double r = x(i) - mean(i);
    out += -0.5 * (log2pi + std::log(var(i)) + r * r / var(i));
  }
  return out;
}

}  // namespace odectrl::math
