#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "spinflow/dirac.hpp"
#include "spinflow/flow.hpp"
#include "spinflow/framing.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

struct SmallTimeSymbol {
    int degree = 0;
    std::vector<Mat2c> coeffs;  // coefficient of t^k at index k
    int remainder_order = 0;
    Vec3 y = Vec3::Zero(), eta = Vec3::Zero();

    Mat2c eval(double t) const;
};

struct SmallTimePair {
    SmallTimeSymbol deg0, deg_1;
};

// zeta^+- (v^+-)^* from the spin transport
Mat2c propagator_principal(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                           int sign);

// eigenvector of W_prin(x, xi) for the eigenvalue sign*h, with component
// `anchor` real positive; anchor < 0 selects the largest-modulus component
Spinor eigenvector_anchored(const Chart& chart, const Frame& frame, const Vec3& x, const Vec3& xi, int sign,
                            int anchor = -1);

// q^+- at a point of the cotangent bundle, in the gauge of eigenvector_anchored
cplx q_phase(const Chart& chart, const Frame& frame, const Vec3& x, const Vec3& xi, int sign, int anchor = -1);

struct QRouteResult {
    Mat2c symbol;
    cplx integral;       // int_0^t q, in the gauge of the final anchor
    int reanchors = 0;   // phase convention breaks handled on the way
    FlowState end;
};

QRouteResult principal_via_q(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                             int sign, double panel = 0.05);

// +-(1/4h^3) *T^{ab} eta_a eta_b Id
Mat2c u0_subprincipal(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, int sign);

struct GaugeDerivatives {
    std::array<Mat2c, 3> dG;
    std::array<std::array<Mat2c, 3>, 3> ddG;
};

// Closed forms for the derivatives at y of G with G(y) = Id relating the
// reference framing `tilde` to `frame` (e_j = O(G)_j^k e~_k); both framings
// must agree at y.
GaugeDerivatives gauge_derivatives(const Chart& chart, const Frame& frame, const Frame& tilde, const Vec3& y);

// G(x) with e_j = O(G)_j^k e~_k, lifted to the sign closest to `reference`
Mat2c gauge_between(const Chart& chart, const Frame& frame, const Frame& tilde, const Vec3& x,
                    const Mat2c& reference);

SmallTimePair smalltime_invariant(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta,
                                  int sign);

// Truncated amplitude-to-symbol operators in normal coordinates centred at y,
// valid to the orders used for the small time expansions. Amplitudes are
// functions of (x, eta); the metric at the centre is the identity.
struct ReducerStencil {
    using Amplitude = std::function<Mat2c(const Vec3& x, const Vec3& eta)>;
    double step1 = 0.02;  // S_{-1}
    double step2 = 0.05;  // S_{-2}

    Mat2c s0(const Amplitude& a, const Vec3& xpm, const Vec3& eta) const;
    // i (d^2/dx^a deta_a +- t/2 h_{eta_a eta_b} d^2/dx^a dx^b) evaluated at x = xpm
    Mat2c s1(const Amplitude& a, const Vec3& xpm, const Vec3& eta, double t, int sign) const;
    // 1/2 (i d^2/dx^a deta_a)^2 at x = 0
    Mat2c s2_at_zero(const Amplitude& a, const Vec3& eta) const;
};

struct NumericFitOptions {
    double tau_scale = 0.05;  // tau = tau_scale * injectivity hint
    double chart_radius = 0.3;
    int chart_degree = 8;
    int chart_samples = 700;
    double cond_limit = 1e6;
    double weight_step = 5e-3;
};

// Normal coordinates, polynomial surrogate and Levi-Civita framing at y,
// shared by all (eta, sign) evaluated at that point.
class SymbolFitContext {
public:
    SymbolFitContext(std::shared_ptr<const Chart> chart, const Frame& frame, const Vec3& y,
                     const NumericFitOptions& opt = {});

    SmallTimePair fit(const Vec3& eta, int sign) const;

    const Chart& normal_chart() const { return *pc_; }
    const Frame& lc_frame() const { return lc_; }
    const Frame& frame_normal() const { return en_; }
    const Mat3& E() const { return E_; }
    // G(x) in normal coordinates, G(0) = Id
    Mat2c gauge(const Vec3& xn) const;

private:
    std::shared_ptr<const Chart> chart_;
    Vec3 y_;
    Mat3 E_;
    NumericFitOptions opt_;
    std::shared_ptr<Chart> pc_;
    Frame lc_, en_;
    double inj_ = 1.0;
};

SmallTimePair smalltime_numeric_fit(std::shared_ptr<const Chart> chart, const Frame& frame, const Vec3& y,
                                    const Vec3& eta, int sign, const NumericFitOptions& opt = {});

// least squares fit of samples (t_k, M_k) by a polynomial of the given degree;
// throws FitIllConditioned when the scaled Vandermonde matrix is too ill conditioned
std::vector<Mat2c> fit_time_polynomial(const std::vector<double>& ts, const std::vector<Mat2c>& values,
                                       int degree, double cond_limit = 1e6);

using PrincipalFunction = std::function<Mat2c(const Vec3& y, const Vec3& eta)>;

// P_sub + (i/2) P_{y eta} + (i/2) Gamma^a_{bc} [eta_a P_{eta_b}]_{eta_c} - (eps/2) g_{bc} [h P_{eta_b}]_{eta_c}
Mat2c gsub_convert(const PrincipalFunction& P_prin, const Mat2c& P_sub, const Chart& chart, const Vec3& y,
                   const Vec3& eta, double epsilon, double step = 1e-3);

}  // namespace spinflow
