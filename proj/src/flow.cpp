#include "spinflow/flow.hpp"

#include <cmath>

#include "spinflow/fd.hpp"

namespace spinflow {

void hamilton_rhs(const Chart& chart, const Vec3& x, const Vec3& xi, int sign, Vec3& xdot, Vec3& xidot) {
    Mat3 gi = chart.g(x).inverse();
    Tensor3 dg = metric_derivative(chart, x);
    Vec3 up = gi * xi;
    double h = std::sqrt(xi.dot(up));
    xdot = sign * up / h;
    // d_c g^{ab} xi_a xi_b = -(g^{-1} xi)^T d_c g (g^{-1} xi)
    for (int c = 0; c < 3; ++c) xidot[c] = sign * up.dot(dg[c] * up) / (2 * h);
}

namespace {

void check_eta(const Vec3& eta) {
    if (eta.norm() == 0.0) throw Error(ErrorKind::ZeroCovector, "eta = 0");
}

OdeRhs flow_rhs(const Chart& chart, int sign) {
    return [&chart, sign](const OdeState& s, OdeState& ds, double) {
        Vec3 x(s[0], s[1], s[2]), xi(s[3], s[4], s[5]);
        if (!chart.inside(x)) throw Error(ErrorKind::ChartExit, chart.id + ": flow left the chart");
        Vec3 xd, xid;
        hamilton_rhs(chart, x, xi, sign, xd, xid);
        for (int i = 0; i < 3; ++i) {
            ds[i] = xd[i];
            ds[3 + i] = xid[i];
        }
    };
}

FlowState make_state(const Chart& chart, const OdeState& s, double t, double h0) {
    FlowState fs;
    fs.t = t;
    fs.x = Vec3(s[0], s[1], s[2]);
    fs.xi = Vec3(s[3], s[4], s[5]);
    fs.h_drift = std::abs(hamiltonian_h(chart.g(fs.x), fs.xi) - h0) / h0;
    return fs;
}

}  // namespace

FlowState hamiltonian_flow(const Chart& chart, const Vec3& y, const Vec3& eta, double t, int sign) {
    check_eta(eta);
    double h0 = hamiltonian_h(chart.g(y), eta);
    OdeState s{y[0], y[1], y[2], eta[0], eta[1], eta[2]};
    if (t != 0.0) integrate_ode(flow_rhs(chart, sign), s, 0.0, t, chart.ode);
    return make_state(chart, s, t, h0);
}

std::vector<FlowState> flow_trajectory(const Chart& chart, const Vec3& y, const Vec3& eta,
                                       const std::vector<double>& ts, int sign) {
    check_eta(eta);
    double h0 = hamiltonian_h(chart.g(y), eta);
    OdeState s{y[0], y[1], y[2], eta[0], eta[1], eta[2]};
    auto states = integrate_ode_at(flow_rhs(chart, sign), s, 0.0, ts, chart.ode);
    std::vector<FlowState> out;
    for (size_t i = 0; i < ts.size(); ++i) out.push_back(make_state(chart, states[i], ts[i], h0));
    return out;
}

std::array<Mat2c, 3> spin_connection(const Chart& chart, const Frame& frame, const Vec3& x) {
    const auto& s = pauli();
    Mat3 g = chart.g(x);
    Pauli3 sig = pauli_project(frame, x);
    Tensor3 de = frame_derivative(frame, x);
    Tensor3 G = christoffel(chart, x);
    Pauli3 low;
    for (int b = 0; b < 3; ++b) low[b] = g(b, 0) * sig[0] + g(b, 1) * sig[1] + g(b, 2) * sig[2];
    std::array<Mat2c, 3> B;
    for (int a = 0; a < 3; ++a) {
        Mat2c m = Mat2c::Zero();
        for (int b = 0; b < 3; ++b) {
            Mat2c inner = Mat2c::Zero();
            for (int j = 0; j < 3; ++j) inner += de[a](j, b) * s[j];
            for (int c = 0; c < 3; ++c) inner += G(b, a, c) * sig[c];
            m += low[b] * inner;
        }
        B[a] = 0.25 * m;
    }
    return B;
}

TransportResult spinor_transport_from(const Chart& chart, const Frame& frame, const Vec3& x0, const Vec3& xi0,
                                      const Spinor& zeta0, double t, int sign) {
    check_eta(xi0);
    double h0 = hamiltonian_h(chart.g(x0), xi0);
    OdeState s{x0[0], x0[1], x0[2], xi0[0], xi0[1], xi0[2],
               zeta0[0].real(), zeta0[0].imag(), zeta0[1].real(), zeta0[1].imag()};
    auto rhs = [&](const OdeState& st, OdeState& ds, double) {
        Vec3 x(st[0], st[1], st[2]), xi(st[3], st[4], st[5]);
        if (!chart.inside(x)) throw Error(ErrorKind::ChartExit, chart.id + ": flow left the chart");
        Vec3 xd, xid;
        hamilton_rhs(chart, x, xi, sign, xd, xid);
        auto B = spin_connection(chart, frame, x);
        Spinor z(cplx(st[6], st[7]), cplx(st[8], st[9]));
        Mat2c M = xd[0] * B[0] + xd[1] * B[1] + xd[2] * B[2];
        Spinor dz = -(M * z);
        for (int i = 0; i < 3; ++i) {
            ds[i] = xd[i];
            ds[3 + i] = xid[i];
        }
        ds[6] = dz[0].real();
        ds[7] = dz[0].imag();
        ds[8] = dz[1].real();
        ds[9] = dz[1].imag();
    };
    if (t != 0.0) integrate_ode(rhs, s, 0.0, t, chart.ode);
    TransportResult r;
    r.state = make_state(chart, s, t, h0);
    r.zeta = Spinor(cplx(s[6], s[7]), cplx(s[8], s[9]));
    return r;
}

TransportResult spinor_transport(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                                 int sign) {
    auto ep = eigenpairs_projections(chart, frame, y, eta);
    return spinor_transport_from(chart, frame, y, eta, ep.v(sign), t, sign);
}

namespace {

struct PhaseCore {
    cplx value;
    Eigen::Vector3cd grad;
    cplx dt;
    FlowState flow;
};

PhaseCore phase_core(const Chart& chart, const Vec3& y, const Vec3& eta, double t, const Vec3& x, int sign,
                     double eps, bool want_dt = false) {
    PhaseCore c;
    c.flow = hamiltonian_flow(chart, y, eta, t, sign);
    LogResult lr = log_map_and_distance(chart, c.flow.x, x);
    double h = hamiltonian_h(chart.g(y), eta);
    Mat3 JiT = lr.dexp.inverse().transpose();
    c.value = cplx(c.flow.xi.dot(lr.v), 0.5 * eps * h * lr.dist * lr.dist);
    Vec3 re = JiT * c.flow.xi;
    Vec3 im = eps * h * (JiT * (chart.g(c.flow.x) * lr.v));
    for (int a = 0; a < 3; ++a) c.grad[a] = cplx(re[a], im[a]);
    if (want_dt) {
        // the base point moves with the flow; v solves exp_p(v) = x, so
        // dv/dp = -(d exp / dv)^{-1} (d exp / dp)
        Vec3 xd, xid;
        hamilton_rhs(chart, c.flow.x, c.flow.xi, sign, xd, xid);
        GeodesicPoint gp = geodesic(chart, c.flow.x, lr.v, 1.0, true);
        Mat3 Jv = gp.jac.block<3, 3>(0, 3), Jy = gp.jac.block<3, 3>(0, 0);
        Vec3 vdot = -Jv.partialPivLu().solve(Jy * xd);
        double re_dt = xid.dot(lr.v) + c.flow.xi.dot(vdot);
        double im_dt = 0.0;
        if (eps != 0.0) {
            Tensor3 dg = metric_derivative(chart, c.flow.x);
            Mat3 dgx = xd[0] * dg[0] + xd[1] * dg[1] + xd[2] * dg[2];
            double d2 = 2 * lr.v.dot(chart.g(c.flow.x) * vdot) + lr.v.dot(dgx * lr.v);
            im_dt = 0.5 * eps * h * d2;
        }
        c.dt = cplx(re_dt, im_dt);
    }
    return c;
}

Eigen::Matrix3cd mixed_derivative(const Chart& chart, const Vec3& y, const Vec3& eta, double t, const Vec3& x,
                                  int sign, double eps, double rel_step) {
    double step = rel_step * eta.norm();
    Eigen::Matrix3cd M;
    for (int b = 0; b < 3; ++b) {
        Eigen::Vector3cd d = fd::d1_plain(
            [&](const Vec3& e) -> Eigen::Vector3cd { return phase_core(chart, y, e, t, x, sign, eps).grad; }, eta, b,
            step);
        M.col(b) = d;
    }
    return M;
}

}  // namespace

PhaseEval phase_and_weight(const Chart& chart, const Vec3& y, const Vec3& eta, double t, const Vec3& x, int sign,
                           const PhaseOptions& opt) {
    check_eta(eta);
    PhaseEval out;
    out.epsilon = opt.epsilon;
    PhaseCore c = phase_core(chart, y, eta, t, x, sign, opt.epsilon, opt.time_derivative);
    out.value = c.value;
    out.grad_x = c.grad;
    out.dt = c.dt;
    out.flow = c.flow;
    if (!opt.weight && !opt.mixed) return out;
    out.mixed = mixed_derivative(chart, y, eta, t, x, sign, opt.epsilon, opt.eta_step);
    if (!opt.weight) return out;

    // sqrt(det phi_{x eta}) continued from 1 at (t, x) = (0, y) along
    // s -> (s t, x(s t) + s (x - x(t)))
    cplx root = 1.0;
    cplx prev_det = 1.0;
    int n = std::max(1, opt.branch_steps);
    Vec3 offset = x - c.flow.x;
    for (int k = 1; k <= n; ++k) {
        double s = double(k) / n;
        Eigen::Matrix3cd M;
        if (k == n) {
            M = out.mixed;
        } else {
            double ts = s * t;
            Vec3 xs = hamiltonian_flow(chart, y, eta, ts, sign).x + s * offset;
            M = mixed_derivative(chart, y, eta, ts, xs, sign, opt.epsilon, opt.eta_step);
        }
        cplx d = M.determinant();
        if (opt.epsilon == 0.0 && (d.real() <= 0.0 || prev_det.real() * d.real() <= 0.0))
            throw Error(ErrorKind::BranchLoss, "det phi_{x eta} reached zero along the continuity path");
        cplx r = std::sqrt(d);
        root = std::abs(r - root) <= std::abs(r + root) ? r : -r;
        prev_det = d;
    }
    out.weight = root / std::sqrt(density(chart, x) * density(chart, y));
    return out;
}

double first_caustic(const Chart& chart, const Vec3& y, const Vec3& eta, int sign, double t_max, int n) {
    double prev = 1.0;
    for (int k = 1; k <= n; ++k) {
        double t = t_max * k / n;
        Vec3 xt = hamiltonian_flow(chart, y, eta, t, sign).x;
        double d = mixed_derivative(chart, y, eta, t, xt, sign, 0.0, 1e-3).determinant().real();
        if (d * prev <= 0.0) return t;
        prev = d;
    }
    return -1.0;
}

}  // namespace spinflow

namespace spinflow {

namespace {

// Richardson-extrapolated central second difference (steps d and d/2)
template <class F>
double second_diff(F&& f, double d) {
    auto one = [&](double k) { return (f(k) - 2 * f(0.0) + f(-k)) / (k * k); };
    return (4 * one(0.5 * d) - one(d)) / 3;
}

template <class F>
double cross_diff(F&& f, double d1, double d2) {
    auto one = [&](double k1, double k2) {
        return (f(k1, k2) - f(k1, -k2) - f(-k1, k2) + f(-k1, -k2)) / (4 * k1 * k2);
    };
    return (4 * one(0.5 * d1, 0.5 * d2) - one(d1, d2)) / 3;
}

}  // namespace

ExpansionCoefficients phase_weight_expansion(const Chart& nc, const Vec3& eta, int sign, double tau, double delta) {
    ExpansionCoefficients out;
    const Vec3 o = Vec3::Zero();
    PhaseOptions plain;
    plain.weight = false;
    PhaseOptions weighted;
    weighted.branch_steps = 2;
    auto phi = [&](double t, const Vec3& x) { return phase_and_weight(nc, o, eta, t, x, sign, plain).value.real(); };
    auto w = [&](double t, const Vec3& x) { return phase_and_weight(nc, o, eta, t, x, sign, weighted).weight.real(); };
    // t-derivative at fixed x, 4th order plus Richardson
    auto phi_t = [&](const Vec3& x) { return fd::d1_s([&](double t) { return phi(t, x); }, 0.0, tau); };
    out.phase_t = phi_t(o);
    for (int m = 0; m < 3; ++m)
        for (int n = m; n < 3; ++n) {
            double v;
            if (m == n) {
                v = second_diff([&](double k) { Vec3 x = o; x[m] = k; return phi_t(x); }, delta);
            } else {
                v = cross_diff([&](double a, double b) { Vec3 x = o; x[m] = a; x[n] = b; return phi_t(x); }, delta,
                               delta);
            }
            out.phase_txx(m, n) = out.phase_txx(n, m) = v;
        }
    out.weight0 = w(0.0, o);
    for (int m = 0; m < 3; ++m)
        for (int n = m; n < 3; ++n) {
            double v;
            if (m == n) {
                v = second_diff([&](double k) { Vec3 x = o; x[m] = k; return w(0.0, x); }, delta);
            } else {
                v = cross_diff([&](double a, double b) { Vec3 x = o; x[m] = a; x[n] = b; return w(0.0, x); }, delta,
                               delta);
            }
            out.weight_xx(m, n) = out.weight_xx(n, m) = v;
        }
    for (int m = 0; m < 3; ++m)
        out.weight_tx[m] = cross_diff([&](double t, double k) { Vec3 x = o; x[m] = k; return w(t, x); }, tau, delta);
    return out;
}

}  // namespace spinflow
