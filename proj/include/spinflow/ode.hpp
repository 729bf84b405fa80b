#pragma once

#include <functional>
#include <vector>

namespace spinflow {

struct OdeOptions {
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    double initial_dt = 1e-3;
    int max_steps = 500000;
};

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState&, OdeState&, double)>;

// Adaptive Dormand-Prince 5(4). Integrates x from t0 to t1 in place (either
// direction). Throws Error{ToleranceFail} when the step controller gives up.
void integrate_ode(const OdeRhs& rhs, OdeState& x, double t0, double t1, const OdeOptions& opt = {});

// Same, reporting the state at each of the (monotone) times in ts.
std::vector<OdeState> integrate_ode_at(const OdeRhs& rhs, OdeState x, double t0, const std::vector<double>& ts,
                                       const OdeOptions& opt = {});

}  // namespace spinflow
