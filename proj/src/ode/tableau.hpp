#pragma once

#include <vector>

namespace odectrl::ode {

// Explicit embedded Runge-Kutta tableau. `b` gives the propagated solution,
// `b_err` the embedded lower-order one used for the error estimate.
struct ButcherTableau {
  std::vector<double> c;
  std::vector<std::vector<double>> a;  // a[i] has i entries (strictly lower triangular)
  std::vector<double> b;
  std::vector<double> b_err;
  int order;        // order of the propagated solution
  int error_order;  // order of the embedded estimate (controller exponent)
  int stages() const { return int(c.size()); }
};

const ButcherTableau& heun_euler_21();        // RK12
const ButcherTableau& bogacki_shampine_32();  // RK23
const ButcherTableau& dormand_prince_54();    // DOPRI5
const ButcherTableau& dormand_prince_87();    // RK78 (13-stage)

}  // namespace odectrl::ode
