#include "spinflow/weitzenbock.hpp"

#include <cmath>

#include "spinflow/fd.hpp"

namespace spinflow {

double levi_civita_symbol(int a, int b, int c) {
    if (a == b || b == c || a == c) return 0.0;
    // even permutations of (0,1,2)
    if ((a == 0 && b == 1) || (a == 1 && b == 2) || (a == 2 && b == 0)) return 1.0;
    return -1.0;
}

Tensor3 contorsion_from_torsion(const Tensor3& T, const Mat3& g) {
    Mat3 gi = g.inverse();
    Tensor3 K;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                double s = T(a, b, c);
                // T_b^a_c = g_{bm} g^{an} T^m_{nc}
                for (int m = 0; m < 3; ++m)
                    for (int n = 0; n < 3; ++n) s += g(b, m) * gi(a, n) * T(m, n, c) + g(c, m) * gi(a, n) * T(m, n, b);
                K(a, b, c) = 0.5 * s;
            }
    return K;
}

Mat3 star_T(const Tensor3& T, const Mat3& g, double rho) {
    Mat3 gi = g.inverse();
    // T_a^{mn} = g_{al} T^l_{rs} g^{rm} g^{sn}
    Mat3 out = Mat3::Zero();
    for (int a = 0; a < 3; ++a) {
        Mat3 up = Mat3::Zero();  // up(m, n) = T_a^{mn}
        for (int l = 0; l < 3; ++l) up += g(a, l) * (gi * T[l] * gi);
        for (int b = 0; b < 3; ++b) {
            double s = 0;
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n) s += up(m, n) * levi_civita_symbol(m, n, b);
            out(a, b) = 0.5 * rho * s;
        }
    }
    return out;
}

Mat3 star_K(const Tensor3& K, const Mat3& g, double rho) {
    Mat3 gi = g.inverse();
    Mat3 out = Mat3::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            double s = 0;
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n) {
                    double e = levi_civita_symbol(m, n, b);
                    if (e == 0) continue;
                    // K^m_a^n = K^m_{al} g^{ln}
                    double k = 0;
                    for (int l = 0; l < 3; ++l) k += K(m, a, l) * gi(l, n);
                    s += k * e;
                }
            out(a, b) = 0.5 * rho * s;
        }
    return out;
}

Mat3 starK_from_starT(const Mat3& starT, const Mat3& g) {
    double tr = (g.inverse() * starT).trace();
    return starT - 0.5 * tr * g;
}

Mat3 starT_from_starK(const Mat3& starK, const Mat3& g) {
    double tr = (g.inverse() * starK).trace();
    return starK - tr * g;
}

TorsionPack torsion_pack(const Chart& chart, const Frame& frame, const Vec3& x) {
    TorsionPack p;
    p.g = chart.g(x);
    p.rho = std::sqrt(p.g.determinant());
    Mat3 e = frame.e(x);
    Mat3 co = e * p.g;  // co(j, c) = e^j_c
    Tensor3 de = frame_derivative(frame, x);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                double s = 0;
                for (int j = 0; j < 3; ++j) s -= co(j, c) * de[b](j, a);
                p.Upsilon(a, b, c) = s;
            }
    for (int a = 0; a < 3; ++a) p.T[a] = p.Upsilon[a] - p.Upsilon[a].transpose();
    p.K = contorsion_from_torsion(p.T, p.g);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) p.E(a, b, c) = p.rho * levi_civita_symbol(a, b, c);
    p.starT = star_T(p.T, p.g, p.rho);
    p.starK = star_K(p.K, p.g, p.rho);
    return p;
}

Tensor3 star_K_covariant_derivative(const Chart& chart, const Frame& frame, const Vec3& x) {
    Tensor3 G = christoffel(chart, x);
    Mat3 sk = torsion_pack(chart, frame, x).starK;
    double h = fd::default_step(x, 1e-3);
    Tensor3 out;
    for (int a = 0; a < 3; ++a) {
        Mat3 d = fd::d1_plain([&](const Vec3& z) { return torsion_pack(chart, frame, z).starK; }, x, a, h);
        for (int b = 0; b < 3; ++b)
            for (int m = 0; m < 3; ++m) {
                double s = d(b, m);
                for (int l = 0; l < 3; ++l) s -= G(l, a, b) * sk(l, m) + G(l, a, m) * sk(b, l);
                out(a, b, m) = s;
            }
    }
    return out;
}

double weitzenbock_metric_residual(const Chart& chart, const Frame& frame, const Vec3& x) {
    TorsionPack p = torsion_pack(chart, frame, x);
    Tensor3 dg = metric_derivative(chart, x);
    double r = 0;
    for (int b = 0; b < 3; ++b)
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
                double s = dg(b, m, n);
                for (int l = 0; l < 3; ++l) s -= p.Upsilon(l, b, m) * p.g(l, n) + p.Upsilon(l, b, n) * p.g(m, l);
                r = std::max(r, std::abs(s));
            }
    return r;
}

double weitzenbock_frame_residual(const Chart& chart, const Frame& frame, const Vec3& x) {
    TorsionPack p = torsion_pack(chart, frame, x);
    Tensor3 de = frame_derivative(frame, x);
    Mat3 e = frame.e(x);
    double r = 0;
    for (int j = 0; j < 3; ++j)
        for (int b = 0; b < 3; ++b)
            for (int a = 0; a < 3; ++a) {
                double s = de[b](j, a);
                for (int c = 0; c < 3; ++c) s += p.Upsilon(a, b, c) * e(j, c);
                r = std::max(r, std::abs(s));
            }
    return r;
}

}  // namespace spinflow
