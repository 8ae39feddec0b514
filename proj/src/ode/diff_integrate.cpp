#include "ode/diff_integrate.hpp"

#include "ode/solver.hpp"

namespace odectrl::ode {

using math::Matrix;
using math::Tape;
using math::Var;
using math::Vector;

std::vector<Var> integrate_rk4_tape(Tape& tape, const BatchField& field, Var x0,
                                    const Matrix& times) {
  const Eigen::Index rows = x0.value().rows();
  if (times.rows() != rows) throw invalid_argument("integrate_rk4_tape: grid row mismatch");
  if (times.cols() < 1) throw invalid_argument("integrate_rk4_tape: empty grid");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c + 1 < times.cols(); ++c)
      if (!(times(r, c) < times(r, c + 1)))
        throw invalid_argument("integrate_rk4_tape: grid times must be strictly increasing");

  std::vector<Var> states;
  states.reserve(std::size_t(times.cols()));
  states.push_back(x0);
  Var x = x0;
  for (Eigen::Index s = 0; s + 1 < times.cols(); ++s) {
    const Vector t0 = times.col(s);
    const Vector t1 = times.col(s + 1);
    const Vector h = t1 - t0;
    const Vector t_mid = t0 + 0.5 * h;
    Var k1 = field(tape, x, t0);
    Var k2 = field(tape, tape.add_rowscaled(x, k1, h, 0.5), t_mid);
    Var k3 = field(tape, tape.add_rowscaled(x, k2, h, 0.5), t_mid);
    Var k4 = field(tape, tape.add_rowscaled(x, k3, h, 1.0), t1);
    x = tape.rk4_combine(x, k1, k2, k3, k4, h);
    if (!x.value().allFinite()) {
      const double t_reached = t0.minCoeff();
      throw InstabilityError("differentiable integration became non-finite after t=" +
                                 std::to_string(t_reached),
                             t_reached);
    }
    states.push_back(x);
  }
  return states;
}

}  // namespace odectrl::ode
