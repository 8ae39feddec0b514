#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "common/error.hpp"
#include "math/param_store.hpp"

namespace odectrl::math {

enum class Activation { Identity, Relu, Elu, Tanh };

// Hidden-layer / output nonlinearities evaluated coefficient-wise. scale is
// only used by the tanh-scaled output transform (policy bound a_max).
inline double apply_act(double z, Activation act, double scale) {
  switch (act) {
    case Activation::Identity: return scale == 1.0 ? z : scale * z;
    case Activation::Relu: return z > 0.0 ? z : 0.0;
    case Activation::Elu: return z > 0.0 ? z : std::expm1(z);
    case Activation::Tanh: return scale * std::tanh(z);
  }
  return z;
}

// d(act)/dz recovered from the activation output. Works for every activation
// above, which lets fused layer nodes store only their outputs.
inline double act_grad_from_output(double y, Activation act, double scale) {
  switch (act) {
    case Activation::Identity: return scale;
    case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Elu: return y > 0.0 ? 1.0 : y + 1.0;
    case Activation::Tanh: return scale - y * y / scale;  // scale * (1 - tanh^2)
  }
  return 1.0;
}

inline Matrix apply_layer(const Matrix& x, const Matrix& w, const Matrix& b, Activation act,
                          double scale) {
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  for (Eigen::Index j = 0; j < y.size(); ++j) y.data()[j] = apply_act(y.data()[j], act, scale);
  return y;
}

// Reverse-mode tape over matrix-valued nodes. Ops are coarse (whole layers,
// whole RK stages) so the node count stays small and the arithmetic runs as
// Eigen kernels. Recording, backward and gradient accumulation require
// exclusive access; concurrent training uses one tape per ensemble member.
class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
  bool valid() const { return tape != nullptr && id >= 0; }
  const Matrix& value() const;
};

class Tape {
 public:
  Var constant(Matrix value) { return push(std::move(value), false, {}); }

  // Trainable leaf. Gradients land in `block.grad` when
  // accumulate_param_grads() runs after backward().
  Var param(ParamBlock& block) {
    Var v = push(block.value, true, {});
    params_.push_back({v.id, &block});
    return v;
  }

  const Matrix& value(Var v) const { return node(v).value; }

  double scalar(Var v) const {
    const Matrix& m = node(v).value;
    if (m.size() != 1) throw invalid_argument("scalar() on non-1x1 node");
    return m(0, 0);
  }

  // Gradient of the last backward() target w.r.t. this node (zero if the node
  // did not participate).
  Matrix grad(Var v) const {
    const Node& n = node(v);
    if (!n.has_grad) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  // ---- arithmetic ----

  Var matmul(Var a, Var b) {
    check(a), check(b);
    if (value(a).cols() != value(b).rows()) throw invalid_argument("matmul: inner dims differ");
    Matrix y = value(a) * value(b);
    return record(std::move(y), {a, b}, [ia = a.id, ib = b.id](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g * t.nodes_[ib].value.transpose());
      if (t.wants(ib)) t.accum(ib, t.nodes_[ia].value.transpose() * g);
    });
  }

  Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    return record(value(a) + value(b), {a, b}, [ia = a.id, ib = b.id](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g);
      if (t.wants(ib)) t.accum(ib, g);
    });
  }

  Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    return record(value(a) - value(b), {a, b}, [ia = a.id, ib = b.id](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g);
      if (t.wants(ib)) t.accum(ib, -g);
    });
  }

  Var mul(Var a, Var b) {
    check_same_shape(a, b, "mul");
    return record(value(a).cwiseProduct(value(b)), {a, b},
                  [ia = a.id, ib = b.id](Tape& t, const Matrix& g) {
                    if (t.wants(ia)) t.accum(ia, g.cwiseProduct(t.nodes_[ib].value));
                    if (t.wants(ib)) t.accum(ib, g.cwiseProduct(t.nodes_[ia].value));
                  });
  }

  Var scale(Var a, double c) {
    check(a);
    return record(value(a) * c, {a}, [ia = a.id, c](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g * c);
    });
  }

  // a + c * b
  Var add_scaled(Var a, Var b, double c) {
    check_same_shape(a, b, "add_scaled");
    return record(value(a) + c * value(b), {a, b},
                  [ia = a.id, ib = b.id, c](Tape& t, const Matrix& g) {
                    if (t.wants(ia)) t.accum(ia, g);
                    if (t.wants(ib)) t.accum(ib, c * g);
                  });
  }

  // Row-wise scaled add: out_ij = a_ij + (h_i * c) * b_ij, with h constant.
  // This is the RK stage update with per-row step sizes.
  Var add_rowscaled(Var a, Var b, const Vector& h, double c) {
    check_same_shape(a, b, "add_rowscaled");
    if (h.size() != value(a).rows()) throw invalid_argument("add_rowscaled: step-size length");
    Vector w = h * c;
    Matrix y = value(a) + w.asDiagonal() * value(b);
    return record(std::move(y), {a, b}, [ia = a.id, ib = b.id, w](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g);
      if (t.wants(ib)) t.accum(ib, w.asDiagonal() * g);
    });
  }

  // Classical RK4 combine with per-row step sizes:
  //   out_ij = x_ij + (h_i / 6) * (k1 + 2 k2 + 2 k3 + k4)_ij
  Var rk4_combine(Var x, Var k1, Var k2, Var k3, Var k4, const Vector& h) {
    check_same_shape(x, k1, "rk4_combine");
    Vector w = h / 6.0;
    Matrix y = value(x) +
               w.asDiagonal() * (value(k1) + 2.0 * value(k2) + 2.0 * value(k3) + value(k4));
    return record(std::move(y), {x, k1, k2, k3, k4},
                  [ix = x.id, i1 = k1.id, i2 = k2.id, i3 = k3.id, i4 = k4.id,
                   w](Tape& t, const Matrix& g) {
                    if (t.wants(ix)) t.accum(ix, g);
                    Matrix wg = w.asDiagonal() * g;
                    if (t.wants(i1)) t.accum(i1, wg);
                    if (t.wants(i2)) t.accum(i2, 2.0 * wg);
                    if (t.wants(i3)) t.accum(i3, 2.0 * wg);
                    if (t.wants(i4)) t.accum(i4, wg);
                  });
  }

  // Fused dense layer: act(x * w + b), b is 1 x out broadcast over rows.
  // Only the layer output is stored; the activation gradient is recovered
  // from it, which keeps imagination tapes small.
  Var affine_act(Var x, Var w, Var b, Activation act, double act_scale = 1.0) {
    check(x), check(w), check(b);
    if (value(x).cols() != value(w).rows() || value(b).rows() != 1 ||
        value(b).cols() != value(w).cols())
      throw invalid_argument("affine_act: shape mismatch");
    Matrix y = apply_layer(value(x), value(w), value(b), act, act_scale);
    Var out = record(std::move(y), {x, w, b}, nullptr);
    Node& n = nodes_[out.id];
    if (n.needs_grad)
      n.backward = [ix = x.id, iw = w.id, ib = b.id, iy = out.id, act,
                    act_scale](Tape& t, const Matrix& g) {
        const Matrix& y = t.nodes_[iy].value;
        Matrix gz(y.rows(), y.cols());
        for (Eigen::Index k = 0; k < y.size(); ++k)
          gz.data()[k] = g.data()[k] * act_grad_from_output(y.data()[k], act, act_scale);
        if (t.wants(ix)) t.accum(ix, gz * t.nodes_[iw].value.transpose());
        if (t.wants(iw)) t.accum(iw, t.nodes_[ix].value.transpose() * gz);
        if (t.wants(ib)) t.accum(ib, gz.colwise().sum());
      };
    return out;
  }

  Var concat_cols(Var a, Var b) {
    check(a), check(b);
    if (value(a).rows() != value(b).rows()) throw invalid_argument("concat_cols: row mismatch");
    Matrix y(value(a).rows(), value(a).cols() + value(b).cols());
    y << value(a), value(b);
    const Eigen::Index na = value(a).cols();
    return record(std::move(y), {a, b}, [ia = a.id, ib = b.id, na](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g.leftCols(na));
      if (t.wants(ib)) t.accum(ib, g.rightCols(g.cols() - na));
    });
  }

  Var slice_cols(Var a, int first, int count) {
    check(a);
    if (first < 0 || count < 0 || first + count > value(a).cols())
      throw invalid_argument("slice_cols: out of range");
    Matrix y = value(a).middleCols(first, count);
    return record(std::move(y), {a}, [ia = a.id, first, count](Tape& t, const Matrix& g) {
      if (!t.wants(ia)) return;
      Node& n = t.nodes_[ia];
      if (!n.has_grad) {
        n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
        n.has_grad = true;
      }
      n.grad.middleCols(first, count) += g;
    });
  }

  Var square(Var a) {
    check(a);
    return record(value(a).array().square().matrix(), {a},
                  [ia = a.id](Tape& t, const Matrix& g) {
                    if (t.wants(ia)) t.accum(ia, 2.0 * g.cwiseProduct(t.nodes_[ia].value));
                  });
  }

  Var exp(Var a) {
    check(a);
    Var out = record(value(a).array().exp().matrix(), {a}, nullptr);
    Node& n = nodes_[out.id];
    if (n.needs_grad)
      n.backward = [ia = a.id, iy = out.id](Tape& t, const Matrix& g) {
        if (t.wants(ia)) t.accum(ia, g.cwiseProduct(t.nodes_[iy].value));
      };
    return out;
  }

  // x - broadcast row (constant), used for goal offsets.
  Var sub_rowvec(Var a, const Eigen::RowVectorXd& row) {
    check(a);
    if (row.size() != value(a).cols()) throw invalid_argument("sub_rowvec: width mismatch");
    Matrix y = value(a);
    y.rowwise() -= row;
    return record(std::move(y), {a}, [ia = a.id](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g);
    });
  }

  // Broadcast an N x 1 column across n columns.
  Var replicate_cols(Var a, int n) {
    check(a);
    if (value(a).cols() != 1) throw invalid_argument("replicate_cols: input must be a column");
    Matrix y = value(a).replicate(1, n);
    return record(std::move(y), {a}, [ia = a.id](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g.rowwise().sum());
    });
  }

  Var rowwise_sum(Var a) {
    check(a);
    Matrix y = value(a).rowwise().sum();
    const Eigen::Index cols = value(a).cols();
    return record(std::move(y), {a}, [ia = a.id, cols](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, g.replicate(1, cols));
    });
  }

  Var sum_all(Var a) {
    check(a);
    Matrix y(1, 1);
    y(0, 0) = value(a).sum();
    const Eigen::Index r = value(a).rows(), c = value(a).cols();
    return record(std::move(y), {a}, [ia = a.id, r, c](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, Matrix::Constant(r, c, g(0, 0)));
    });
  }

  Var mean_all(Var a) {
    check(a);
    Matrix y(1, 1);
    y(0, 0) = value(a).mean();
    const Eigen::Index r = value(a).rows(), c = value(a).cols();
    return record(std::move(y), {a}, [ia = a.id, r, c](Tape& t, const Matrix& g) {
      if (t.wants(ia)) t.accum(ia, Matrix::Constant(r, c, g(0, 0) / double(r * c)));
    });
  }

  // sum_i c_i * v_i over same-shaped nodes.
  Var lincomb(const std::vector<Var>& vars, const std::vector<double>& coeffs) {
    if (vars.empty() || vars.size() != coeffs.size())
      throw invalid_argument("lincomb: size mismatch");
    for (Var v : vars) check(v);
    Matrix y = coeffs[0] * value(vars[0]);
    for (std::size_t i = 1; i < vars.size(); ++i) {
      check_same_shape(vars[0], vars[i], "lincomb");
      y += coeffs[i] * value(vars[i]);
    }
    std::vector<int> ids(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) ids[i] = vars[i].id;
    return record(std::move(y), vars, [ids, coeffs](Tape& t, const Matrix& g) {
      for (std::size_t i = 0; i < ids.size(); ++i)
        if (t.wants(ids[i])) t.accum(ids[i], coeffs[i] * g);
    });
  }

  // Diagonal-Gaussian log-likelihood of `target` (constant) under mean `pred`
  // with per-column log-variances `logvar` (1 x d). Returns 1x1:
  //   sum_ij -0.5 * [ log(2 pi) + logvar_j + (target - pred)_ij^2 / exp(logvar_j) ]
  Var gauss_loglik(Var pred, const Matrix& target, Var logvar) {
    check(pred), check(logvar);
    if (target.rows() != value(pred).rows() || target.cols() != value(pred).cols())
      throw invalid_argument("gauss_loglik: target shape mismatch");
    if (value(logvar).rows() != 1 || value(logvar).cols() != value(pred).cols())
      throw invalid_argument("gauss_loglik: logvar must be 1 x d");
    const Matrix& p = value(pred);
    Eigen::RowVectorXd lv = value(logvar).row(0);
    Eigen::RowVectorXd inv_var = (-lv).array().exp();
    Matrix resid = target - p;
    const double log2pi = std::log(2.0 * 3.14159265358979323846);
    double ll = 0.0;
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      ll += -0.5 * (double(p.rows()) * (log2pi + lv(j)) +
                    resid.col(j).squaredNorm() * inv_var(j));
    Matrix y(1, 1);
    y(0, 0) = ll;
    return record(std::move(y), {pred, logvar},
                  [ip = pred.id, il = logvar.id, resid = std::move(resid), inv_var,
                   rows = p.rows()](Tape& t, const Matrix& g) {
                    const double s = g(0, 0);
                    if (t.wants(ip)) t.accum(ip, s * (resid * inv_var.asDiagonal()));
                    if (t.wants(il)) {
                      Eigen::RowVectorXd glv(resid.cols());
                      for (Eigen::Index j = 0; j < resid.cols(); ++j)
                        glv(j) = s * (-0.5) *
                                 (double(rows) - resid.col(j).squaredNorm() * inv_var(j));
                      t.accum(il, glv);
                    }
                  });
  }

  // ---- driving the tape ----

  void backward(Var loss) {
    check(loss);
    if (node(loss).value.size() != 1) throw invalid_argument("backward: loss must be scalar");
    for (Node& n : nodes_) {
      n.has_grad = false;
    }
    Node& l = nodes_[loss.id];
    l.grad = Matrix::Ones(1, 1);
    l.has_grad = true;
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.has_grad && n.backward) n.backward(*this, n.grad);
    }
  }

  // block.grad += scale * (leaf grad), in the order param() was called.
  void accumulate_param_grads(double scale = 1.0) {
    for (const auto& [id, block] : params_) {
      const Node& n = nodes_[id];
      if (n.has_grad) block->grad += scale * n.grad;
    }
  }

  std::size_t size() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    params_.clear();
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::function<void(Tape&, const Matrix&)> backward;
  };

  friend struct Var;

  const Node& node(Var v) const {
    check(v);
    return nodes_[v.id];
  }

  void check(Var v) const {
    if (v.tape != this || v.id < 0 || v.id >= int(nodes_.size()))
      throw invalid_argument("variable does not belong to this tape");
  }

  void check_same_shape(Var a, Var b, const char* op) const {
    check(a), check(b);
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols())
      throw invalid_argument(std::string(op) + ": shape mismatch");
  }

  bool wants(int id) const { return nodes_[id].needs_grad; }

  template <typename Expr>
  void accum(int id, const Expr& delta) {
    Node& n = nodes_[id];
    if (!n.has_grad) {
      n.grad = delta;
      n.has_grad = true;
    } else {
      n.grad += delta;
    }
  }

  Var push(Matrix value, bool needs_grad, std::function<void(Tape&, const Matrix&)> backward) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{this, int(nodes_.size()) - 1};
  }

  Var record(Matrix value, const std::vector<Var>& inputs,
             std::function<void(Tape&, const Matrix&)> backward) {
    bool needs = false;
    for (Var v : inputs) needs = needs || nodes_[v.id].needs_grad;
    return push(std::move(value), needs, needs ? std::move(backward) : nullptr);
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, ParamBlock*>> params_;
};

inline const Matrix& Var::value() const { return tape->value(*this); }

}  // namespace odectrl::math
