#include "spinflow/framing.hpp"

#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "spinflow/fd.hpp"

namespace spinflow {

const Pauli3& pauli() {
    static const Pauli3 s = [] {
        Pauli3 r;
        r[0] << 0, 1, 1, 0;
        r[1] << 0, -I, I, 0;
        r[2] << 1, 0, 0, -1;
        return r;
    }();
    return s;
}

Tensor3 frame_derivative(const Frame& frame, const Vec3& x) {
    if (frame.de) return frame.de(x);
    Tensor3 out;
    double h = fd::default_step(x, frame.fd_scale);
    for (int b = 0; b < 3; ++b) out[b] = fd::d1([&](const Vec3& z) { return frame.e(z); }, x, b, h);
    return out;
}

Pauli3 pauli_project(const Mat3& e) {
    const auto& s = pauli();
    Pauli3 sig;
    for (int a = 0; a < 3; ++a) {
        Mat2c m = Mat2c::Zero();
        for (int j = 0; j < 3; ++j) m += e(j, a) * s[j];
        sig[a] = 0.5 * (m + m.adjoint());
    }
    return sig;
}

Pauli3 pauli_project(const Frame& frame, const Vec3& x) { return pauli_project(frame.e(x)); }

FrameReport frame_checks(const Chart& chart, const Frame& frame, const std::vector<Vec3>& points, bool killing) {
    FrameReport rep;
    for (const auto& x : points) {
        FrameCheckPoint p;
        p.x = x;
        Mat3 g = chart.g(x);
        Mat3 e = frame.e(x);
        p.orthonormality = (e * g * e.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
        p.orientation = e.determinant() * std::sqrt(g.determinant());
        if (killing) {
            Tensor3 dg = metric_derivative(chart, x);
            Tensor3 de = frame_derivative(frame, x);
            double worst = 0;
            for (int j = 0; j < 3; ++j) {
                Mat3 dv;  // dv(a, c) = d_a V^c
                for (int a = 0; a < 3; ++a) dv.row(a) = de[a].row(j);
                Mat3 L = Mat3::Zero();
                for (int c = 0; c < 3; ++c) L += e(j, c) * dg[c];
                L += dv * g + (dv * g).transpose();
                worst = std::max(worst, L.cwiseAbs().maxCoeff());
            }
            p.killing = worst;
            rep.max_killing = std::max(rep.max_killing, worst);
        }
        rep.max_orthonormality = std::max(rep.max_orthonormality, p.orthonormality);
        if (!(p.orientation > 0)) rep.all_positive = false;
        rep.points.push_back(p);
    }
    return rep;
}

bool is_su2(const Mat2c& G, double tol) {
    return (G.adjoint() * G - Mat2c::Identity()).cwiseAbs().maxCoeff() < tol &&
           std::abs(G.determinant() - 1.0) < tol;
}

Mat3 su2_to_so3(const Mat2c& G) {
    if (!is_su2(G)) throw Error(ErrorKind::NotSU2, "gauge matrix is not in SU(2)");
    const auto& s = pauli();
    Mat3 O;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) O(j, k) = 0.5 * (s[j] * G.adjoint() * s[k] * G).trace().real();
    return O;
}

Mat3 su2_to_so3(const GaugeTransform& G, const Vec3& x) { return su2_to_so3(G.G(x)); }

Frame su2_gauge(const Frame& frame, const GaugeTransform& G) {
    Frame out;
    out.id = frame.id + "*G";
    out.chart_id = frame.chart_id;
    out.fd_scale = frame.fd_scale;
    auto e = frame.e;
    auto g = G.G;
    out.e = [e, g](const Vec3& x) -> Mat3 { return su2_to_so3(g(x)) * e(x); };
    return out;
}

Su2Lift so3_to_su2(const Mat3& O, const Mat2c* reference) {
    // O(j,k) is the rotation of the unit quaternion (a0, a1, a2, a3) with
    // G = a0 Id + i (a1 s1 + a2 s2 + a3 s3)
    Eigen::Quaterniond q(O);
    q.normalize();
    const auto& s = pauli();
    Mat2c G = q.w() * Mat2c::Identity() + I * (q.x() * s[0] + q.y() * s[1] + q.z() * s[2]);
    Su2Lift out;
    if (G.trace().real() < 0) G = -G;
    if (reference && (reference->adjoint() * G).trace().real() < 0) G = -G;
    out.G = G;
    out.flipped = G.trace().real() < 0;
    return out;
}

LeviCivitaFrame::LeviCivitaFrame(std::shared_ptr<const Chart> chart, Mat3 e_at_y, Vec3 y)
    : chart_(std::move(chart)), ey_(std::move(e_at_y)), y_(std::move(y)) {}

Mat3 LeviCivitaFrame::transport(const Vec3& x) const {
    if ((x - y_).norm() == 0.0) return ey_;
    LogResult lr = log_map_and_distance(*chart_, y_, x);
    const Chart& c = *chart_;
    OdeState st(15);
    for (int a = 0; a < 3; ++a) {
        st[a] = y_[a];
        st[3 + a] = lr.v[a];
    }
    for (int j = 0; j < 3; ++j)
        for (int a = 0; a < 3; ++a) st[6 + 3 * j + a] = ey_(j, a);
    auto rhs = [&c](const OdeState& s, OdeState& ds, double) {
        Vec3 p(s[0], s[1], s[2]), v(s[3], s[4], s[5]);
        if (!c.inside(p)) throw Error(ErrorKind::ChartExit, "transport geodesic left the chart");
        Tensor3 G = christoffel(c, p);
        Vec3 acc = -contract(G, v, v);
        for (int a = 0; a < 3; ++a) {
            ds[a] = v[a];
            ds[3 + a] = acc[a];
        }
        for (int j = 0; j < 3; ++j) {
            Vec3 ej(s[6 + 3 * j], s[7 + 3 * j], s[8 + 3 * j]);
            Vec3 de = -contract(G, v, ej);
            for (int a = 0; a < 3; ++a) ds[6 + 3 * j + a] = de[a];
        }
    };
    integrate_ode(rhs, st, 0.0, 1.0, c.ode);
    Mat3 e;
    for (int j = 0; j < 3; ++j)
        for (int a = 0; a < 3; ++a) e(j, a) = st[6 + 3 * j + a];
    return e;
}

void LeviCivitaFrame::build_cache(double radius, int degree, int samples) {
    auto model = std::make_shared<PolyModel>(3, degree, Eigen::VectorXd(y_), radius);
    int n = samples > 0 ? samples : 3 * model->nterms();
    Eigen::MatrixXd X(n, 3), Y(n, 9);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    for (int i = 0; i < n; ++i) {
        Vec3 u;
        if (i == 0) {
            u.setZero();
        } else {
            u = Vec3(nd(rng), nd(rng), nd(rng)).normalized() * radius * std::cbrt(ud(rng));
        }
        Vec3 x = y_ + u;
        Mat3 e = transport(x);
        X.row(i) = x.transpose();
        for (int j = 0; j < 3; ++j)
            for (int a = 0; a < 3; ++a) Y(i, 3 * j + a) = e(j, a);
    }
    model->fit(X, Y);
    cache_ = model;
    cache_radius_ = radius;
}

Frame LeviCivitaFrame::as_frame(bool use_cache) const {
    Frame f;
    f.id = "lc";
    f.chart_id = chart_->id;
    if (use_cache) {
        if (!cache_) throw Error(ErrorKind::DerivativeUnavailable, "Levi-Civita cache not built");
        auto m = cache_;
        Vec3 y = y_;
        double r = cache_radius_;
        auto check = [y, r](const Vec3& x) {
            if ((x - y).norm() > r * (1 + 1e-12)) throw Error(ErrorKind::OutOfRadius, "outside Levi-Civita cache ball");
        };
        f.e = [m, check](const Vec3& x) -> Mat3 {
            check(x);
            Eigen::VectorXd v = m->eval(x);
            Mat3 e;
            for (int j = 0; j < 3; ++j)
                for (int a = 0; a < 3; ++a) e(j, a) = v[3 * j + a];
            return e;
        };
        f.de = [m, check](const Vec3& x) -> Tensor3 {
            check(x);
            Tensor3 out;
            for (int b = 0; b < 3; ++b) {
                std::vector<int> al(3, 0);
                al[b] = 1;
                Eigen::VectorXd v = m->deriv(x, al);
                for (int j = 0; j < 3; ++j)
                    for (int a = 0; a < 3; ++a) out[b](j, a) = v[3 * j + a];
            }
            return out;
        };
    } else {
        LeviCivitaFrame self = *this;
        f.e = [self](const Vec3& x) -> Mat3 { return self.transport(x); };
        f.fd_scale = 1e-3;
    }
    return f;
}

std::shared_ptr<LeviCivitaFrame> levi_civita_frame(std::shared_ptr<const Chart> chart, const Frame& frame,
                                                   const Vec3& y) {
    Mat3 e = frame.e(y);
    return std::make_shared<LeviCivitaFrame>(std::move(chart), e, y);
}

}  // namespace spinflow
