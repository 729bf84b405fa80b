#include "spinflow/ode.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "spinflow/types.hpp"

namespace spinflow {

namespace odeint = boost::numeric::odeint;

void integrate_ode(const OdeRhs& rhs, OdeState& x, double t0, double t1, const OdeOptions& opt) {
    if (t1 == t0) return;
    auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
    double dt = std::copysign(std::min(opt.initial_dt, std::abs(t1 - t0)), t1 - t0);
    try {
        odeint::integrate_adaptive(stepper, rhs, x, t0, t1, dt);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::ToleranceFail, e.what());
    }
    for (double v : x)
        if (!std::isfinite(v)) throw Error(ErrorKind::ToleranceFail, "non-finite state");
}

std::vector<OdeState> integrate_ode_at(const OdeRhs& rhs, OdeState x, double t0, const std::vector<double>& ts,
                                       const OdeOptions& opt) {
    std::vector<OdeState> out;
    out.reserve(ts.size());
    double t = t0;
    for (double tn : ts) {
        integrate_ode(rhs, x, t, tn, opt);
        t = tn;
        out.push_back(x);
    }
    return out;
}

}  // namespace spinflow
