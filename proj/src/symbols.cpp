#include "spinflow/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <type_traits>

#include <boost/math/quadrature/gauss.hpp>

#include "spinflow/fd.hpp"
#include "spinflow/weitzenbock.hpp"

namespace spinflow {

Mat2c SmallTimeSymbol::eval(double t) const {
    Mat2c out = Mat2c::Zero();
    double p = 1.0;
    for (const auto& c : coeffs) {
        out += p * c;
        p *= t;
    }
    return out;
}

Mat2c propagator_principal(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                           int sign) {
    auto ep = eigenpairs_projections(chart, frame, y, eta);
    auto r = spinor_transport_from(chart, frame, y, eta, ep.v(sign), t, sign);
    return r.zeta * ep.v(sign).adjoint();
}

// ---------------------------------------------------------------- q route

Spinor eigenvector_anchored(const Chart& chart, const Frame& frame, const Vec3& x, const Vec3& xi, int sign,
                            int anchor) {
    Spinor v = eigenpairs_projections(chart, frame, x, xi).v(sign);
    if (anchor < 0) return v;
    cplx c = v[anchor];
    if (std::abs(c) == 0.0) throw Error(ErrorKind::DerivativeUnavailable, "anchor component vanishes");
    return v * (std::conj(c) / std::abs(c));
}

namespace {

int largest_component(const Spinor& v) { return std::abs(v[1]) > std::abs(v[0]) ? 1 : 0; }

}  // namespace

cplx q_phase(const Chart& chart, const Frame& frame, const Vec3& x, const Vec3& xi, int sign, int anchor) {
    if (anchor < 0) anchor = largest_component(eigenpairs_projections(chart, frame, x, xi).v(sign));
    auto vf = [&](const Vec3& xx, const Vec3& pp) { return eigenvector_anchored(chart, frame, xx, pp, sign, anchor); };
    Spinor v = vf(x, xi);
    double hx = fd::default_step(x), hp = 1e-4 * xi.norm();
    std::array<Spinor, 3> vx, vp;
    for (int a = 0; a < 3; ++a) {
        vx[a] = fd::d1([&](const Vec3& z) -> Spinor { return vf(z, xi); }, x, a, hx);
        vp[a] = fd::d1([&](const Vec3& z) -> Spinor { return vf(x, z); }, xi, a, hp);
    }
    Mat2c W = principal_symbol(frame, x, xi);
    double h = hamiltonian_h(chart.g(x), xi);
    Mat2c Wm = W - sign * h * Mat2c::Identity();
    // h^+- derivatives from Hamilton's equations: xdot = h^+-_xi, xidot = -h^+-_x
    Vec3 xd, xid;
    hamilton_rhs(chart, x, xi, sign, xd, xid);
    cplx three = 0.0;
    Spinor vh = Spinor::Zero();
    for (int a = 0; a < 3; ++a) {
        three += (vx[a].adjoint() * Wm * vp[a])(0, 0) - (vp[a].adjoint() * Wm * vx[a])(0, 0);
        vh += vx[a] * xd[a] + vp[a] * xid[a];
    }
    Mat2c Wsub = w_subprincipal(chart, frame, x);
    cplx q = (v.adjoint() * Wsub * v)(0, 0) - 0.5 * I * three - I * (v.adjoint() * vh)(0, 0);
    return q;
}

QRouteResult principal_via_q(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, double t,
                             int sign, double panel) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    QRouteResult out;
    Spinor v0 = eigenpairs_projections(chart, frame, y, eta).v(sign);
    int anchor = largest_component(v0);
    int n = std::max(1, int(std::ceil(std::abs(t) / panel)));
    double L = t / n;
    // phase accumulated from gauge switches, and int q
    cplx jump = 1.0, integral = 0.0;
    FlowState start = hamiltonian_flow(chart, y, eta, 0.0, sign);
    for (int p = 0; p < n; ++p) {
        Spinor conv = eigenpairs_projections(chart, frame, start.x, start.xi).v(sign);
        int k = largest_component(conv);
        if (k != anchor) {
            Spinor vo = eigenvector_anchored(chart, frame, start.x, start.xi, sign, anchor);
            Spinor vn = eigenvector_anchored(chart, frame, start.x, start.xi, sign, k);
            // vo = e^{i theta} vn
            cplx ph = (vn.adjoint() * vo)(0, 0);
            jump *= ph / std::abs(ph);
            anchor = k;
            ++out.reanchors;
        }
        std::vector<double> nodes, weights;
        for (size_t i = 0; i < GL::abscissa().size(); ++i) {
            double z = GL::abscissa()[i], w = GL::weights()[i];
            nodes.push_back(z);
            weights.push_back(w);
            if (z != 0.0) {
                nodes.push_back(-z);
                weights.push_back(w);
            }
        }
        // integrate along the trajectory from this panel's start
        std::vector<std::pair<double, double>> nw;
        for (size_t i = 0; i < nodes.size(); ++i) nw.push_back({0.5 * L * (nodes[i] + 1.0), weights[i]});
        std::sort(nw.begin(), nw.end(), [&](auto& u, auto& v) { return std::abs(u.first) < std::abs(v.first); });
        std::vector<double> local;
        for (auto& e : nw) local.push_back(e.first);
        auto states = flow_trajectory(chart, start.x, start.xi, local, sign);
        cplx s = 0.0;
        for (size_t i = 0; i < nw.size(); ++i)
            s += nw[i].second * q_phase(chart, frame, states[i].x, states[i].xi, sign, anchor);
        integral += 0.5 * L * s;
        FlowState next = hamiltonian_flow(chart, start.x, start.xi, L, sign);
        start = next;
    }
    FlowState end = hamiltonian_flow(chart, y, eta, t, sign);
    Spinor vend = eigenvector_anchored(chart, frame, end.x, end.xi, sign, anchor);
    out.symbol = jump * std::exp(-I * integral) * vend * v0.adjoint();
    out.integral = integral;
    out.end = end;
    return out;
}

// ---------------------------------------------------------------- invariants

Mat2c u0_subprincipal(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta, int sign) {
    if (eta.norm() == 0.0) throw Error(ErrorKind::ZeroCovector, "eta = 0");
    TorsionPack tp = torsion_pack(chart, frame, y);
    Mat3 gi = tp.g.inverse();
    Vec3 up = gi * eta;
    double h = std::sqrt(eta.dot(up));
    double c = up.dot(tp.starT * up);
    return (sign * c / (4 * h * h * h)) * Mat2c::Identity();
}

namespace {

// derivatives at y of the gauge from the Levi-Civita framing generated at y to `frame`
GaugeDerivatives gauge_from_lc(const Chart& chart, const Frame& frame, const Pauli3& sig, const Vec3& y) {
    TorsionPack tp = torsion_pack(chart, frame, y);
    Tensor3 dK = star_K_covariant_derivative(chart, frame, y);
    Mat3 gi = tp.g.inverse();
    Mat3 KK = tp.starK * gi * tp.starK.transpose();
    GaugeDerivatives out;
    for (int a = 0; a < 3; ++a) {
        Mat2c m = Mat2c::Zero();
        for (int b = 0; b < 3; ++b) m += tp.starK(a, b) * sig[b];
        out.dG[a] = -0.5 * I * m;
        for (int b = 0; b < 3; ++b) {
            Mat2c n = Mat2c::Zero();
            for (int mu = 0; mu < 3; ++mu) n += (dK[a](b, mu) + dK[b](a, mu)) * sig[mu];
            out.ddG[a][b] = -0.25 * I * n - 0.25 * KK(a, b) * Mat2c::Identity();
        }
    }
    return out;
}

}  // namespace

GaugeDerivatives gauge_derivatives(const Chart& chart, const Frame& frame, const Frame& tilde, const Vec3& y) {
    // G = B^* A with A, B the gauges from the common Levi-Civita framing to frame and tilde
    Pauli3 sig = pauli_project(frame, y);
    GaugeDerivatives A = gauge_from_lc(chart, frame, sig, y);
    GaugeDerivatives B = gauge_from_lc(chart, tilde, sig, y);
    GaugeDerivatives out;
    for (int a = 0; a < 3; ++a) {
        out.dG[a] = A.dG[a] + B.dG[a].adjoint();
        for (int b = 0; b < 3; ++b)
            out.ddG[a][b] = A.ddG[a][b] + B.ddG[a][b].adjoint() + B.dG[a].adjoint() * A.dG[b] +
                            B.dG[b].adjoint() * A.dG[a];
    }
    return out;
}

Mat2c gauge_between(const Chart& chart, const Frame& frame, const Frame& tilde, const Vec3& x,
                    const Mat2c& reference) {
    Mat3 O = frame.e(x) * chart.g(x) * tilde.e(x).transpose();
    return so3_to_su2(O, &reference).G;
}

SmallTimePair smalltime_invariant(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta,
                                  int sign) {
    if (eta.norm() == 0.0) throw Error(ErrorKind::ZeroCovector, "eta = 0");
    const double s = sign;
    Mat3 g = chart.g(y), gi = g.inverse();
    Vec3 up = gi * eta;
    double h = std::sqrt(eta.dot(up));
    Pauli3 sig = pauli_project(frame, y);
    Mat2c W = eta[0] * sig[0] + eta[1] * sig[1] + eta[2] * sig[2];
    Mat2c Id = Mat2c::Identity();
    Mat2c P = 0.5 * (Id + s * W / h);
    std::array<Mat2c, 3> Pe;
    for (int a = 0; a < 3; ++a) Pe[a] = s * 0.5 * (sig[a] / h - up[a] * W / (h * h * h));
    Vec3 he = up / h;
    Mat3 hee = (h * h * gi - up * up.transpose()) / (h * h * h);

    TorsionPack tp = torsion_pack(chart, frame, y);
    Tensor3 dK = star_K_covariant_derivative(chart, frame, y);
    CurvaturePack cp = curvature_pack(chart, y);
    const Mat3& K = tp.starK;
    Mat3 KK = K * gi * K.transpose();
    auto sym_dK = [&](int a, int b) {
        Mat2c m = Mat2c::Zero();
        for (int mu = 0; mu < 3; ++mu) m += (dK[a](b, mu) + dK[b](a, mu)) * sig[mu];
        return m;
    };

    SmallTimePair out;
    out.deg0.degree = 0;
    out.deg0.remainder_order = 3;
    out.deg_1.degree = -1;
    out.deg_1.remainder_order = 2;
    out.deg0.y = out.deg_1.y = y;
    out.deg0.eta = out.deg_1.eta = eta;

    Mat2c c1 = Mat2c::Zero(), c2 = Mat2c::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            c1 += he[a] * K(a, b) * sig[b];
            c2 += (up[a] * up[b] / (h * h)) * (I * sym_dK(a, b) - KK(a, b) * Id);
        }
    out.deg0.coeffs = {P, s * 0.5 * I * c1 * P, 0.125 * c2 * P};

    Mat2c d0 = Mat2c::Zero(), ric = Mat2c::Zero(), nab = Mat2c::Zero(), kk = Mat2c::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            d0 += K(a, b) * sig[b] * Pe[a];
            ric += cp.Ricci(a, b) * up[a] * sig[b];
            Mat2c bracket = he[b] * Pe[a] + 0.5 * hee(a, b) * P;
            nab += sym_dK(a, b) * bracket;
            kk += KK(a, b) * bracket;
        }
    Mat2c t1 = -s * I * cp.scalar / (24 * h) * P - I * ric / (8 * h * h) - s * 0.25 * nab - s * 0.25 * I * kk;
    out.deg_1.coeffs = {-0.5 * d0, t1};
    return out;
}

// ---------------------------------------------------------------- reducer

namespace {

template <class F>
auto cross_plain(F&& f, const Vec3& x, const Vec3& e, int a, int b, double hx, double he) {
    Vec3 xp = x, xm = x, ep = e, em = e;
    xp[a] += hx;
    xm[a] -= hx;
    ep[b] += he;
    em[b] -= he;
    using R = std::decay_t<decltype(f(x, e))>;
    R out = (f(xp, ep) - f(xp, em) - f(xm, ep) + f(xm, em)) * (1.0 / (4 * hx * he));
    return out;
}

// second derivative in one vector argument: d^2 / dz^a dz^b at z
template <class F>
auto hess_plain(F&& f, const Vec3& z, int a, int b, double h) {
    using R = std::decay_t<decltype(f(z))>;
    R out;
    if (a == b) {
        Vec3 p = z, m = z;
        p[a] += h;
        m[a] -= h;
        out = (f(p) - 2.0 * f(z) + f(m)) * (1.0 / (h * h));
        return out;
    }
    Vec3 pp = z, pm = z, mp = z, mm = z;
    pp[a] += h; pp[b] += h;
    pm[a] += h; pm[b] -= h;
    mp[a] -= h; mp[b] += h;
    mm[a] -= h; mm[b] -= h;
    out = (f(pp) - f(pm) - f(mp) + f(mm)) * (1.0 / (4 * h * h));
    return out;
}

template <class F>
Mat2c divergence_xe(F&& f, const Vec3& x, const Vec3& e, double h) {
    auto one = [&](double k) {
        Mat2c m = Mat2c::Zero();
        for (int a = 0; a < 3; ++a) m += cross_plain(f, x, e, a, a, k, k);
        return m;
    };
    return (4.0 * one(0.5 * h) - one(h)) / 3.0;
}

template <class F>
Mat2c hessian_contract(F&& f, const Vec3& x, const Mat3& c, double h) {
    auto one = [&](double k) {
        Mat2c m = Mat2c::Zero();
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                if (c(a, b) == 0.0) continue;
                m += c(a, b) * hess_plain(f, x, a, b, k);
            }
        return m;
    };
    return (4.0 * one(0.5 * h) - one(h)) / 3.0;
}

}  // namespace

Mat2c ReducerStencil::s0(const Amplitude& a, const Vec3& xpm, const Vec3& eta) const { return a(xpm, eta); }

Mat2c ReducerStencil::s1(const Amplitude& a, const Vec3& xpm, const Vec3& eta, double t, int sign) const {
    double h = eta.norm();
    Mat3 hee = (h * h * Mat3::Identity() - eta * eta.transpose()) / (h * h * h);
    Mat2c d = divergence_xe(a, xpm, eta, step1);
    Mat2c out = d;
    if (t != 0.0) {
        auto ax = [&](const Vec3& x) { return a(x, eta); };
        out += (sign * 0.5 * t) * hessian_contract(ax, xpm, hee, step1);
    }
    return I * out;
}

Mat2c ReducerStencil::s2_at_zero(const Amplitude& a, const Vec3& eta) const {
    // sum_{ab} d^4 / dx^a dx^b deta_a deta_b, nested central differences, one
    // Richardson pass on the common step
    const Vec3 o = Vec3::Zero();
    auto one = [&](double k) {
        Mat2c m = Mat2c::Zero();
        for (int p = 0; p < 3; ++p)
            for (int q = p; q < 3; ++q) {
                auto inner = [&](const Vec3& e) {
                    return hess_plain([&](const Vec3& x) { return a(x, e); }, o, p, q, k);
                };
                Mat2c v = hess_plain(inner, eta, p, q, k);
                m += (p == q ? 1.0 : 2.0) * v;
            }
        return m;
    };
    Mat2c d2 = (4.0 * one(0.5 * step2) - one(step2)) / 3.0;
    return -0.5 * d2;
}

// ---------------------------------------------------------------- numeric fit

std::vector<Mat2c> fit_time_polynomial(const std::vector<double>& ts, const std::vector<Mat2c>& values, int degree,
                                       double cond_limit) {
    const int n = int(ts.size()), m = degree + 1;
    if (n < m) throw Error(ErrorKind::FitIllConditioned, "fewer samples than coefficients");
    double scale = 0.0;
    for (double t : ts) scale = std::max(scale, std::abs(t));
    if (scale == 0.0) throw Error(ErrorKind::FitIllConditioned, "all samples at t = 0");
    Eigen::MatrixXd V(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) V(i, j) = std::pow(ts[i] / scale, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double cond = sv(0) / sv(sv.size() - 1);
    if (!(cond < cond_limit))
        throw Error(ErrorKind::FitIllConditioned, "Vandermonde condition number " + std::to_string(cond));
    Eigen::MatrixXcd Y(n, 4);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < 4; ++k) Y(i, k) = values[i](k % 2, k / 2);
    Eigen::MatrixXcd C = svd.solve(Y.real()).cast<cplx>() + I * svd.solve(Y.imag()).cast<cplx>();
    std::vector<Mat2c> out(m);
    for (int j = 0; j < m; ++j) {
        double f = std::pow(scale, -j);
        for (int k = 0; k < 4; ++k) out[j](k % 2, k / 2) = C(j, k) * f;
    }
    return out;
}

SymbolFitContext::SymbolFitContext(std::shared_ptr<const Chart> chart, const Frame& frame, const Vec3& y,
                                   const NumericFitOptions& opt)
    : chart_(std::move(chart)), y_(y), opt_(opt) {
    E_ = frame.e(y).transpose();
    inj_ = chart_->injectivity_hint;
    auto nc = std::make_shared<NormalCoordinates>(normal_coordinates(chart_, y, &E_));
    pc_ = std::make_shared<Chart>(
        polynomial_chart(nc->chart, Vec3::Zero(), opt.chart_radius, opt.chart_degree, opt.chart_samples));
    Frame id;
    id.e = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
    auto lc = levi_civita_frame(pc_, id, Vec3::Zero());
    lc->build_cache(opt.chart_radius, opt.chart_degree);
    lc_ = lc->as_frame(true);
    Frame base = frame;
    en_.id = frame.id + "@normal";
    en_.chart_id = pc_->id;
    en_.e = [nc, base](const Vec3& xn) -> Mat3 {
        auto [xb, J] = nc->map_with_jacobian(xn);
        return base.e(xb) * J.inverse().transpose();
    };
    en_.fd_scale = 1e-3;
}

Mat2c SymbolFitContext::gauge(const Vec3& xn) const {
    Mat3 O = en_.e(xn) * pc_->g(xn) * lc_.e(xn).transpose();
    Mat2c id = Mat2c::Identity();
    return so3_to_su2(O, &id).G;
}

namespace {

struct WeightJet {
    double w = 1.0, wt = 0.0;
    Vec3 wx = Vec3::Zero();
};

}  // namespace

SmallTimePair SymbolFitContext::fit(const Vec3& eta, int sign) const {
    if (eta.norm() == 0.0) throw Error(ErrorKind::ZeroCovector, "eta = 0");
    const Chart& pc = *pc_;
    const Frame& lc = lc_;
    const Vec3 o = Vec3::Zero();
    const double s = sign;
    Vec3 eta_n = E_.transpose() * eta;
    const double hy = eta_n.norm();
    const Vec3 eu = eta_n / hy;

    PhaseOptions popt;
    popt.weight = false;
    popt.mixed = false;
    popt.time_derivative = true;
    struct Core {
        double phi_t;
        Vec3 grad;
    };
    auto core = [&](double t, const Vec3& x, const Vec3& e) {
        PhaseEval pe = phase_and_weight(pc, o, e, t, x, sign, popt);
        return Core{pe.dt.real(), pe.grad_x.real()};
    };

    // principal symbol of the Levi-Civita framing and its t-derivative, cached by (t, eta)
    std::map<std::array<double, 4>, Mat2c> a0_cache;
    auto a0 = [&](double t, const Vec3& e) -> Mat2c {
        std::array<double, 4> key{t, e[0], e[1], e[2]};
        auto it = a0_cache.find(key);
        if (it != a0_cache.end()) return it->second;
        Mat2c v = propagator_principal(pc, lc, o, e, t, sign);
        a0_cache.emplace(key, v);
        return v;
    };
    auto a0_t = [&](double t, const Vec3& e) -> Mat2c {
        return fd::d1_s([&](double tt) { return a0(tt, e); }, t, 2e-3);
    };
    auto Wl = [&](const Vec3& x, const Vec3& xi) -> Mat2c {
        Pauli3 sg = pauli_project(lc, x);
        return xi[0] * sg[0] + xi[1] * sg[1] + xi[2] * sg[2];
    };
    auto a1 = [&](double t, const Vec3& x, const Vec3& e) -> Mat2c {
        Core c = core(t, x, e);
        return (c.phi_t * Mat2c::Identity() + Wl(x, c.grad)) * a0(t, e);
    };

    const double hw = opt_.weight_step;
    auto weight_jet = [&](double t, const Vec3& x, const Vec3& e) {
        Mat3 M;
        for (int b = 0; b < 3; ++b) {
            Vec3 col = fd::d1_plain([&](const Vec3& z) -> Vec3 { return core(t, x, z).grad; }, e, b, hw);
            M.col(b) = col;
        }
        Mat3 Mt;
        std::array<Mat3, 3> Mx;
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < 3; ++b) {
                Vec3 xp = x, xm = x, ep = e, em = e;
                xp[c] += hw;
                xm[c] -= hw;
                ep[b] += hw;
                em[b] -= hw;
                Core pp = core(t, xp, ep), pm = core(t, xp, em), mp = core(t, xm, ep), mm = core(t, xm, em);
                double k = 1.0 / (4 * hw * hw);
                Mt(c, b) = (pp.phi_t - pm.phi_t - mp.phi_t + mm.phi_t) * k;
                Vec3 dg = (pp.grad - pm.grad - mp.grad + mm.grad) * k;
                for (int a = 0; a < 3; ++a) Mx[c](a, b) = dg[a];
            }
        double det = M.determinant();
        if (det <= 0.0) throw Error(ErrorKind::BranchLoss, "det phi_{x eta} <= 0 in the fit region");
        WeightJet wj;
        wj.w = std::sqrt(det) / std::sqrt(density(pc, x) * density(pc, o));
        Mat3 Mi = M.inverse();
        wj.wt = 0.5 * wj.w * (Mi * Mt).trace();
        Mat3 gi = pc.g(x).inverse();
        Tensor3 dg = metric_derivative(pc, x);
        for (int c = 0; c < 3; ++c)
            wj.wx[c] = 0.5 * wj.w * (Mi * Mx[c]).trace() - 0.25 * wj.w * (gi * dg[c]).trace();
        return wj;
    };
    auto R = [&](double t, const Vec3& x, const Vec3& e, bool with_time_term) -> Mat2c {
        WeightJet wj = weight_jet(t, x, e);
        Pauli3 sg = pauli_project(lc, x);
        Mat2c m = wj.wt * Mat2c::Identity();
        for (int c = 0; c < 3; ++c) m += wj.wx[c] * sg[c];
        Mat2c out = (-I * m / wj.w + zero_order_part(pc, lc, x)) * a0(t, e);
        if (with_time_term) out += -I * a0_t(t, e);
        return out;
    };

    ReducerStencil red;

    // P^+- component of the Levi-Civita subprincipal symbol: its t-derivative
    // at t = 0 from the second transport equation projected on P^+-
    Mat2c S2 = red.s2_at_zero([&](const Vec3& x, const Vec3& e) { return a1(0.0, x, e); }, eu);
    Mat2c S1a0 = I * divergence_xe([&](const Vec3& x, const Vec3& e) { return R(0.0, x, e, false); }, o, eu,
                                   red.step1);
    Mat2c Pp0 = eigenpairs_projections(pc, lc, o, eu).P(sign);
    Mat2c B = -I * Pp0 * (S2 + S1a0);

    const double tau = opt_.tau_scale * inj_;
    std::vector<double> ts;
    for (double f : {1.0, 0.5, 0.25, 0.125}) {
        ts.push_back(tau * f);
        ts.push_back(-tau * f);
    }
    std::vector<Mat2c> deg0_samples, deg1_samples;
    Mat3 hee = Mat3::Identity() - eu * eu.transpose();
    for (double t : ts) {
        FlowState fs = hamiltonian_flow(pc, o, eu, t, sign);
        // P^-+ component from the first transport equation projected on P^-+
        Mat2c S1a1 = red.s1([&](const Vec3& x, const Vec3& e) { return a1(t, x, e); }, fs.x, eu, t, sign);
        Mat2c Rt = R(t, fs.x, eu, true);
        Mat2c Pm = eigenpairs_projections(pc, lc, fs.x, fs.xi).P(-sign);
        Mat2c other = (s / 2.0) * Pm * (S1a1 + Rt);
        Mat2c lc_sub = other + t * B;

        // gauge transformation to the given framing
        Mat2c G = gauge(fs.x);
        Mat2c A0 = a0(t, eu);
        Mat2c sub = G.adjoint() * lc_sub;
        double hg = 0.01;
        for (int a = 0; a < 3; ++a) {
            Mat2c dGa = fd::d1([&](const Vec3& z) -> Mat2c { return gauge(z); }, fs.x, a, hg);
            Mat2c dA0 = fd::d1([&](const Vec3& z) -> Mat2c { return a0(t, z); }, eu, a, 2e-3);
            sub += I * dGa.adjoint() * dA0;
        }
        Mat2c hG = hessian_contract([&](const Vec3& z) -> Mat2c { return gauge(z); }, fs.x, hee, hg);
        sub += (s * 0.5 * t) * I * hG.adjoint() * A0;
        deg1_samples.push_back(sub / hy);
        deg0_samples.push_back(G.adjoint() * A0);
    }

    SmallTimePair out;
    auto c0 = fit_time_polynomial(ts, deg0_samples, 4, opt_.cond_limit);
    auto c1 = fit_time_polynomial(ts, deg1_samples, 3, opt_.cond_limit);
    out.deg0.degree = 0;
    out.deg0.remainder_order = 3;
    out.deg0.coeffs = {c0[0], c0[1], c0[2]};
    out.deg_1.degree = -1;
    out.deg_1.remainder_order = 2;
    out.deg_1.coeffs = {c1[0], c1[1]};
    out.deg0.y = out.deg_1.y = y_;
    out.deg0.eta = out.deg_1.eta = eta;
    return out;
}

SmallTimePair smalltime_numeric_fit(std::shared_ptr<const Chart> chart, const Frame& frame, const Vec3& y,
                                    const Vec3& eta, int sign, const NumericFitOptions& opt) {
    SymbolFitContext ctx(std::move(chart), frame, y, opt);
    return ctx.fit(eta, sign);
}

// ---------------------------------------------------------------- gsub

Mat2c gsub_convert(const PrincipalFunction& P_prin, const Mat2c& P_sub, const Chart& chart, const Vec3& y,
                   const Vec3& eta, double epsilon, double step) {
    auto P = [&](const Vec3& yy, const Vec3& ee) -> Mat2c {
        Mat2c v;
        try {
            v = P_prin(yy, ee);
        } catch (const std::exception& ex) {
            throw Error(ErrorKind::DerivativeUnavailable, ex.what());
        }
        if (!v.allFinite()) throw Error(ErrorKind::DerivativeUnavailable, "principal symbol not finite");
        return v;
    };
    double hy = step * (1.0 + y.norm()), he = step * eta.norm();
    Mat2c out = P_sub;
    Mat2c mixed = Mat2c::Zero();
    for (int a = 0; a < 3; ++a) {
        auto one = [&](double k) { return cross_plain(P, y, eta, a, a, k * hy, k * he); };
        mixed += (4.0 * one(0.5) - one(1.0)) / 3.0;
    }
    out += 0.5 * I * mixed;

    std::array<Mat2c, 3> Pe;
    std::array<std::array<Mat2c, 3>, 3> Pee;
    auto Py = [&](const Vec3& e) { return P(y, e); };
    const double he2 = 10 * he;  // second derivatives need a larger step
    for (int b = 0; b < 3; ++b) Pe[b] = fd::d1(Py, eta, b, he);
    for (int b = 0; b < 3; ++b)
        for (int c = b; c < 3; ++c) {
            auto one = [&](double k) { return hess_plain(Py, eta, b, c, k * he2); };
            Pee[b][c] = Pee[c][b] = (4.0 * one(0.5) - one(1.0)) / 3.0;
        }
    Tensor3 G = christoffel(chart, y);
    Mat2c gam = Mat2c::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                if (G(a, b, c) == 0.0) continue;
                gam += G(a, b, c) * ((a == c ? 1.0 : 0.0) * Pe[b] + eta[a] * Pee[b][c]);
            }
    out += 0.5 * I * gam;
    if (epsilon != 0.0) {
        Mat3 g = chart.g(y), gi = g.inverse();
        Vec3 up = gi * eta;
        double h = std::sqrt(eta.dot(up));
        Mat2c e = Mat2c::Zero();
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) e += g(b, c) * ((up[c] / h) * Pe[b] + h * Pee[b][c]);
        out -= 0.5 * epsilon * e;
    }
    return out;
}

}  // namespace spinflow
