#include "spinflow/geometry.hpp"

#include <cmath>
#include <random>

#include "spinflow/fd.hpp"
#include "spinflow/poly.hpp"

namespace spinflow {

const char* error_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::SingularMetric: return "SingularMetric";
        case ErrorKind::OutOfChart: return "OutOfChart";
        case ErrorKind::DerivativeUnavailable: return "DerivativeUnavailable";
        case ErrorKind::ChartExit: return "ChartExit";
        case ErrorKind::ToleranceFail: return "ToleranceFail";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::OutOfRadius: return "OutOfRadius";
        case ErrorKind::NotSU2: return "NotSU2";
        case ErrorKind::ZeroCovector: return "ZeroCovector";
        case ErrorKind::StencilOutOfDomain: return "StencilOutOfDomain";
        case ErrorKind::BranchLoss: return "BranchLoss";
        case ErrorKind::FitIllConditioned: return "FitIllConditioned";
        case ErrorKind::GridTooCoarse: return "GridTooCoarse";
        case ErrorKind::TruncationInsufficient: return "TruncationInsufficient";
        case ErrorKind::UnknownId: return "UnknownId";
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "Error";
}

Mat3 Chart::g(const Vec3& x) const {
    if (!inside(x)) throw Error(ErrorKind::OutOfChart, id + ": point outside chart domain");
    return metric(x);
}

namespace {

Mat3 inverse_metric(const Mat3& g) {
    const double det = g.determinant();
    if (!(det > 1e-14)) throw Error(ErrorKind::SingularMetric, "det g <= 0");
    return g.inverse();
}

void check_stencil(const Chart& chart, const Vec3& x, double h) {
    for (int d = 0; d < 3; ++d)
        for (double s : {-2.0, 2.0}) {
            Vec3 p = x;
            p[d] += s * h;
            if (!chart.inside(p)) throw Error(ErrorKind::DerivativeUnavailable, "stencil leaves chart");
        }
}

}  // namespace

double density(const Chart& chart, const Vec3& x) {
    const double det = chart.g(x).determinant();
    if (!(det > 0)) throw Error(ErrorKind::SingularMetric, "det g <= 0");
    return std::sqrt(det);
}

Tensor3 metric_derivative(const Chart& chart, const Vec3& x) {
    if (!chart.inside(x)) throw Error(ErrorKind::OutOfChart, chart.id);
    if (chart.dmetric) return chart.dmetric(x);
    const double h = fd::default_step(x, chart.fd_scale);
    check_stencil(chart, x, h);
    Tensor3 out;
    for (int c = 0; c < 3; ++c) out[c] = fd::d1([&](const Vec3& p) -> Mat3 { return chart.metric(p); }, x, c, h);
    return out;
}

Tensor4 metric_second_derivative(const Chart& chart, const Vec3& x) {
    if (!chart.inside(x)) throw Error(ErrorKind::OutOfChart, chart.id);
    if (chart.ddmetric) return chart.ddmetric(x);
    // nested differences use a 10x larger step to keep roundoff in check
    const double h = fd::default_step(x, chart.dmetric ? chart.fd_scale : 10.0 * chart.fd_scale);
    check_stencil(chart, x, h);
    Tensor4 out;
    for (int d = 0; d < 3; ++d)
        out[d] = fd::d1([&](const Vec3& p) -> Tensor3 { return metric_derivative(chart, p); }, x, d, h);
    // symmetrize in the two derivative indices
    Tensor4 sym;
    for (int d = 0; d < 3; ++d)
        for (int c = 0; c < 3; ++c) sym[d][c] = 0.5 * (out[d][c] + out[c][d]);
    return sym;
}

namespace {

// lowered Christoffel symbols Gamma_{e b c}
Tensor3 christoffel_first(const Tensor3& dg) {
    Tensor3 out;
    for (int e = 0; e < 3; ++e)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) out(e, b, c) = 0.5 * (dg(b, e, c) + dg(c, e, b) - dg(e, b, c));
    return out;
}

Tensor3 raise_first(const Mat3& ginv, const Tensor3& low) {
    Tensor3 out;
    for (int a = 0; a < 3; ++a)
        for (int e = 0; e < 3; ++e) out[a] += ginv(a, e) * low[e];
    return out;
}

}  // namespace

Tensor3 christoffel(const Chart& chart, const Vec3& x) {
    const Mat3 ginv = inverse_metric(chart.g(x));
    return raise_first(ginv, christoffel_first(metric_derivative(chart, x)));
}

Tensor4 christoffel_derivative(const Chart& chart, const Vec3& x) {
    const Mat3 ginv = inverse_metric(chart.g(x));
    const Tensor3 dg = metric_derivative(chart, x);
    const Tensor4 ddg = metric_second_derivative(chart, x);
    const Tensor3 low = christoffel_first(dg);
    Tensor4 out;
    for (int d = 0; d < 3; ++d) {
        const Mat3 dginv = -ginv * dg[d] * ginv;
        Tensor3 dlow = christoffel_first(ddg[d]);
        out[d] = raise_first(dginv, low) + raise_first(ginv, dlow);
    }
    return out;
}

Vec3 contract(const Tensor3& G, const Vec3& u, const Vec3& v) {
    Vec3 r;
    for (int a = 0; a < 3; ++a) r[a] = u.dot(G[a] * v);
    return r;
}

CurvaturePack curvature_pack(const Chart& chart, const Vec3& x) {
    CurvaturePack cp;
    const Mat3 g = chart.g(x);
    cp.rho = std::sqrt(g.determinant());
    cp.Gamma = christoffel(chart, x);
    const Tensor4 dG = christoffel_derivative(chart, x);
    const Tensor3& G = cp.Gamma;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) {
                    double r = dG(c, a, d, b) - dG(d, a, c, b);
                    for (int e = 0; e < 3; ++e) r += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
                    cp.Riemann(a, b, c, d) = r;
                }
    for (int b = 0; b < 3; ++b)
        for (int d = 0; d < 3; ++d) {
            double r = 0;
            for (int a = 0; a < 3; ++a) r += cp.Riemann(a, b, a, d);
            cp.Ricci(b, d) = r;
        }
    cp.Ricci = 0.5 * (cp.Ricci + cp.Ricci.transpose()).eval();
    cp.scalar = (inverse_metric(g) * cp.Ricci).trace();
    return cp;
}

GeodesicPoint geodesic(const Chart& chart, const Vec3& y, const Vec3& v, double t, bool variational) {
    if (!chart.inside(y)) throw Error(ErrorKind::OutOfChart, chart.id);
    const int n = variational ? 42 : 6;
    OdeState s(n, 0.0);
    for (int i = 0; i < 3; ++i) {
        s[i] = y[i];
        s[3 + i] = v[i];
    }
    if (variational)
        for (int i = 0; i < 6; ++i) s[6 + i * 6 + i] = 1.0;  // row-major 6x6 identity
    auto rhs = [&](const OdeState& st, OdeState& ds, double) {
        Vec3 x(st[0], st[1], st[2]), p(st[3], st[4], st[5]);
        if (!chart.inside(x)) throw Error(ErrorKind::ChartExit, chart.id + ": geodesic left the chart");
        const Tensor3 G = christoffel(chart, x);
        const Vec3 acc = -contract(G, p, p);
        for (int i = 0; i < 3; ++i) {
            ds[i] = p[i];
            ds[3 + i] = acc[i];
        }
        if (!variational) return;
        const Tensor4 dG = christoffel_derivative(chart, x);
        Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> J(&st[6]);
        Eigen::Map<Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> dJ(&ds[6]);
        // linearization: d(dx) = dp, d(dp) = -dGamma[dx](p,p) - 2 Gamma(p, dp)
        Mat3 A = Mat3::Zero(), B = Mat3::Zero();
        for (int a = 0; a < 3; ++a)
            for (int d = 0; d < 3; ++d) {
                A(a, d) = -p.dot(dG[d][a] * p);
                B(a, d) = -2.0 * (G[a] * p)[d];
            }
        dJ.topRows<3>() = J.bottomRows<3>();
        dJ.bottomRows<3>() = A * J.topRows<3>() + B * J.bottomRows<3>();
    };
    integrate_ode(rhs, s, 0.0, t, chart.ode);
    GeodesicPoint out;
    out.x = Vec3(s[0], s[1], s[2]);
    out.v = Vec3(s[3], s[4], s[5]);
    if (variational) {
        Eigen::Map<const Eigen::Matrix<double, 6, 6, Eigen::RowMajor>> J(&s[6]);
        out.jac = J;
    }
    return out;
}

Vec3 exp_map(const Chart& chart, const Vec3& y, const Vec3& v, double t) {
    return geodesic(chart, y, v, t, false).x;
}

LogResult log_map_and_distance(const Chart& chart, const Vec3& y, const Vec3& x, const LogOptions& opt) {
    LogResult res;
    const Vec3 d = x - y;
    if (d.norm() == 0.0) return res;
    Vec3 v = d + 0.5 * contract(christoffel(chart, y), d, d);
    auto residual = [&](const Vec3& vv, Mat3* J) {
        GeodesicPoint gp = geodesic(chart, y, vv, 1.0, J != nullptr);
        if (J) *J = gp.jac.block<3, 3>(0, 3);
        return Vec3(gp.x - x);
    };
    Mat3 J;
    Vec3 F = residual(v, &J);
    const double tol = opt.tol * (1.0 + x.norm());
    int it = 0;
    for (; it < opt.max_iter && F.norm() > tol; ++it) {
        const Vec3 step = J.fullPivLu().solve(F);
        double lam = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k, lam *= 0.5) {
            Vec3 trial = v - lam * step;
            Vec3 Ft;
            try {
                Ft = residual(trial, nullptr);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ChartExit && e.kind() != ErrorKind::OutOfChart) throw;
                continue;
            }
            if (Ft.norm() < F.norm()) {
                v = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        F = residual(v, &J);
    }
    if (F.norm() > tol) throw Error(ErrorKind::NoConvergence, "log map shooting did not converge");
    res.v = v;
    res.dexp = J;
    res.iterations = it;
    res.dist = std::sqrt(v.dot(chart.g(y) * v));
    if (opt.check_radius && res.dist > chart.injectivity_hint)
        throw Error(ErrorKind::OutOfRadius, "target beyond injectivity hint");
    return res;
}

Vec3 NormalCoordinates::to_base(const Vec3& xn) const { return exp_map(*base, y, E * xn, 1.0); }

std::pair<Vec3, Mat3> NormalCoordinates::map_with_jacobian(const Vec3& xn) const {
    GeodesicPoint gp = geodesic(*base, y, E * xn, 1.0, true);
    return {gp.x, gp.jac.block<3, 3>(0, 3) * E};
}

Vec3 NormalCoordinates::from_base(const Vec3& x) const {
    return E.inverse() * log_map_and_distance(*base, y, x).v;
}

NormalCoordinates normal_coordinates(std::shared_ptr<const Chart> chart, const Vec3& y, const Mat3* E) {
    NormalCoordinates nc;
    nc.base = chart;
    nc.y = y;
    if (E) {
        nc.E = *E;
    } else {
        Eigen::SelfAdjointEigenSolver<Mat3> es(chart->g(y));
        nc.E = es.operatorInverseSqrt();
    }
    const Mat3 check = nc.E.transpose() * chart->g(y) * nc.E;
    if ((check - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
        throw Error(ErrorKind::SingularMetric, "normal coordinate basis is not orthonormal");
    Chart& c = nc.chart;
    c.id = chart->id + "@normal";
    c.injectivity_hint = chart->injectivity_hint;
    c.loop_bound = chart->loop_bound;
    c.fd_scale = 1e-3;
    c.ode = chart->ode;
    Chart base_tight = *chart;
    base_tight.ode.abs_tol = 1e-13;
    base_tight.ode.rel_tol = 1e-13;
    auto bt = std::make_shared<const Chart>(base_tight);
    const Vec3 yy = y;
    const Mat3 EE = nc.E;
    const double radius = chart->injectivity_hint;
    c.contains = [radius](const Vec3& xn) { return xn.norm() < radius; };
    c.metric = [bt, yy, EE](const Vec3& xn) -> Mat3 {
        GeodesicPoint gp = geodesic(*bt, yy, EE * xn, 1.0, true);
        const Mat3 J = gp.jac.block<3, 3>(0, 3) * EE;
        Mat3 g = J.transpose() * bt->g(gp.x) * J;
        return 0.5 * (g + g.transpose());
    };
    return nc;
}

Chart polynomial_chart(const Chart& chart, const Vec3& center, double radius, int degree, int samples,
                       double* fit_error) {
    auto model = std::make_shared<PolyModel>(3, degree, center, radius);
    if (samples <= 0) samples = 3 * model->nterms();
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Eigen::MatrixXd X(samples, 3), Y(samples, 6);
    int n = 0;
    // include the centre so the fit is anchored there
    X.row(n) = center.transpose();
    while (n < samples) {
        Vec3 p;
        if (n == 0) {
            p = center;
        } else {
            do p = Vec3(U(rng), U(rng), U(rng));
            while (p.norm() > 1.0);
            p = center + radius * p;
        }
        const Mat3 g = chart.g(p);
        X.row(n) = p.transpose();
        Y.row(n) << g(0, 0), g(0, 1), g(0, 2), g(1, 1), g(1, 2), g(2, 2);
        ++n;
    }
    model->fit(X, Y);
    if (fit_error) *fit_error = model->fit_residual();
    auto unpack = [](const Eigen::VectorXd& v) {
        Mat3 g;
        g << v[0], v[1], v[2], v[1], v[3], v[4], v[2], v[4], v[5];
        return g;
    };
    Chart out;
    out.id = chart.id + "@poly";
    out.injectivity_hint = chart.injectivity_hint;
    out.loop_bound = chart.loop_bound;
    out.ode = chart.ode;
    const Vec3 c0 = center;
    out.contains = [c0, radius](const Vec3& x) { return (x - c0).norm() <= radius; };
    // the three callbacks are usually evaluated at the same point in turn
    auto jet = [model](const Vec3& x) -> const Eigen::MatrixXd& {
        thread_local const PolyModel* last_model = nullptr;
        thread_local Vec3 last_x;
        thread_local Eigen::MatrixXd last;
        if (last_model != model.get() || last_x != x) {
            last = model->jet2(x);
            last_model = model.get();
            last_x = x;
        }
        return last;
    };
    auto row = [unpack](const Eigen::MatrixXd& J, int r) { return unpack(J.row(r).transpose()); };
    out.metric = [jet, row](const Vec3& x) { return row(jet(x), 0); };
    out.dmetric = [jet, row](const Vec3& x) {
        const Eigen::MatrixXd& J = jet(x);
        Tensor3 t;
        for (int c = 0; c < 3; ++c) t[c] = row(J, 1 + c);
        return t;
    };
    out.ddmetric = [jet, row](const Vec3& x) {
        static constexpr int idx[3][3] = {{4, 5, 6}, {5, 7, 8}, {6, 8, 9}};
        const Eigen::MatrixXd& J = jet(x);
        Tensor4 t;
        for (int d = 0; d < 3; ++d)
            for (int c = 0; c < 3; ++c) t[d][c] = row(J, idx[d][c]);
        return t;
    };
    return out;
}

}  // namespace spinflow
