#pragma once

#include <functional>
#include <vector>

#include "math/tape.hpp"

namespace odectrl::ode {

// Field evaluated on a whole batch at one RK stage: `states` is N x d (one
// trajectory per row) and `stage_times` the absolute time of the stage per
// row. All operations land on the tape, so backward through the returned
// states yields exact discretize-then-optimize gradients of the scheme.
using BatchField =
    std::function<math::Var(math::Tape&, math::Var states, const math::Vector& stage_times)>;

// Fixed-grid classical RK4 on the tape. `times` is N x (G+1), each row a
// strictly increasing grid; per-row step sizes may differ but every row takes
// the same number of steps. Returns the state node at every grid point,
// including the initial one.
std::vector<math::Var> integrate_rk4_tape(math::Tape& tape, const BatchField& field,
                                          math::Var x0, const math::Matrix& times);

}  // namespace odectrl::ode
