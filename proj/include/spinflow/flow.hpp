#pragma once

#include <vector>

#include "spinflow/dirac.hpp"
#include "spinflow/framing.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

struct FlowState {
    double t = 0.0;
    Vec3 x, xi;
    double h_drift = 0.0;  // relative drift of h against its initial value
};

// sign = +1 or -1: xdot = +-h_xi, xidot = -+h_x with h = sqrt(g^{ab} xi_a xi_b)
FlowState hamiltonian_flow(const Chart& chart, const Vec3& y, const Vec3& eta, double t, int sign);
std::vector<FlowState> flow_trajectory(const Chart& chart, const Vec3& y, const Vec3& eta,
                                       const std::vector<double>& ts, int sign);

// right-hand side of Hamilton's equations
void hamilton_rhs(const Chart& chart, const Vec3& x, const Vec3& xi, int sign, Vec3& xdot, Vec3& xidot);

// spin connection coefficient B_a = 1/4 sigma_b (d_a sigma^b + Gamma^b_{ac} sigma^c)
std::array<Mat2c, 3> spin_connection(const Chart& chart, const Frame& frame, const Vec3& x);

struct TransportResult {
    FlowState state;
    Spinor zeta;
};

// parallel transport of v^+-(y, eta) along the flow, from 0 to t
TransportResult spinor_transport(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                                 int sign);
// transport of a given initial spinor along the trajectory through (x0, xi0)
TransportResult spinor_transport_from(const Chart& chart, const Frame& frame, const Vec3& x0, const Vec3& xi0,
                                      const Spinor& zeta0, double t, int sign);

struct PhaseOptions {
    double epsilon = 0.0;
    bool weight = true;
    int branch_steps = 6;
    double eta_step = 1e-3;  // relative to |eta|
    bool mixed = true;       // forced on when weight is requested
    bool time_derivative = false;
};

struct PhaseEval {
    cplx value;
    Eigen::Vector3cd grad_x;
    Eigen::Matrix3cd mixed;  // mixed(a, b) = d^2 phi / dx^a d eta_b
    cplx weight;
    cplx dt;  // d phi / dt at fixed x, when requested
    double epsilon = 0.0;
    FlowState flow;
};

// Levi-Civita phase function and weight; x must lie within the injectivity
// hint of x^+-(t; y, eta)
PhaseEval phase_and_weight(const Chart& chart, const Vec3& y, const Vec3& eta, double t, const Vec3& x, int sign,
                           const PhaseOptions& opt = {});

// determinant of phi_{x eta} at x = x^+-(t) for t on a uniform grid in [0, t_max];
// returns the first t where it changes sign, or a negative value when none
double first_caustic(const Chart& chart, const Vec3& y, const Vec3& eta, int sign, double t_max, int n);

}  // namespace spinflow

namespace spinflow {

// Low-order Taylor data of phi^+- and w^+- at (t, x) = (0, 0), for a chart in
// geodesic normal coordinates centred at the base point.
struct ExpansionCoefficients {
    double phase_t = 0.0;  // d phi / dt
    Mat3 phase_txx;        // d^3 phi / dt dx^m dx^n
    Mat3 weight_xx;        // d^2 w / dx^m dx^n
    Vec3 weight_tx;        // d^2 w / dt dx^m
    double weight0 = 0.0;  // w(0, 0)
};

ExpansionCoefficients phase_weight_expansion(const Chart& normal_chart, const Vec3& eta, int sign, double tau = 0.05,
                                             double delta = 0.05);

}  // namespace spinflow
