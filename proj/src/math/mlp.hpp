#pragma once

#include <string>
#include <vector>

#include "math/rng.hpp"
#include "math/tape.hpp"

namespace odectrl::math {

enum class OutputTransform { Identity, TanhScaled };

struct MLPSpec {
  std::vector<int> widths;  // input, hidden..., output
  Activation hidden = Activation::Elu;
  OutputTransform output = OutputTransform::Identity;
  double output_scale = 1.0;  // multiplier after tanh (a_max for the actor)

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
  int layer_count() const { return int(widths.size()) - 1; }
  void validate() const;
};

// Layer-wise uniform init scaled by 1/sqrt(fan_in). Blocks are named
// W0,b0,...,W{L-1},b{L-1}.
void init_mlp_params(const MLPSpec& spec, ParamStore& params, Rng& rng);

// Batched forward pass, one sample per row.
Matrix mlp_forward(const MLPSpec& spec, const ParamStore& params, const Matrix& x);

// Single-sample convenience.
Vector mlp_forward(const MLPSpec& spec, const ParamStore& params, const Vector& x);

// Recorded forward pass. With trainable=false the weights enter the tape as
// constants: gradients still flow through the input but no parameter
// gradients are produced (used for the frozen target critic and for the
// dynamics inside actor updates).
Var mlp_forward(Tape& tape, const MLPSpec& spec, ParamStore& params, Var x,
                bool trainable = true);

// Same but reusing already-created parameter leaves (one param() call per
// block per tape even when the network runs at every solver stage).
struct MLPVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};
MLPVars mlp_vars(Tape& tape, const MLPSpec& spec, ParamStore& params, bool trainable = true);
Var mlp_apply(Tape& tape, const MLPSpec& spec, const MLPVars& vars, Var x);

// log N(x | mean, diag(var)).
double gaussian_log_density(const Vector& x, const Vector& mean, const Vector& var);

}  // namespace odectrl::math
