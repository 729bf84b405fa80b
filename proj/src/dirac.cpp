#include "spinflow/dirac.hpp"

#include <cmath>

#include "spinflow/fd.hpp"

namespace spinflow {

double hamiltonian_h(const Mat3& g, const Vec3& eta) {
    double n = eta.dot(g.inverse() * eta);
    return std::sqrt(std::max(n, 0.0));
}

Mat2c principal_symbol(const Pauli3& sigma, const Vec3& eta) {
    if (eta.norm() == 0.0) throw Error(ErrorKind::ZeroCovector, "eta = 0");
    return eta[0] * sigma[0] + eta[1] * sigma[1] + eta[2] * sigma[2];
}

Mat2c principal_symbol(const Frame& frame, const Vec3& y, const Vec3& eta) {
    return principal_symbol(pauli_project(frame, y), eta);
}

namespace {

// d_b sigma^a = s^j d_b e_j^a
std::array<Pauli3, 3> pauli_derivative(const Tensor3& de) {
    const auto& s = pauli();
    std::array<Pauli3, 3> out;
    for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a) {
            Mat2c m = Mat2c::Zero();
            for (int j = 0; j < 3; ++j) m += de[b](j, a) * s[j];
            out[b][a] = m;
        }
    return out;
}

}  // namespace

Mat2c zero_order_part(const Chart& chart, const Frame& frame, const Vec3& x) {
    Mat3 g = chart.g(x);
    Pauli3 sig = pauli_project(frame, x);
    auto dsig = pauli_derivative(frame_derivative(frame, x));
    Tensor3 G = christoffel(chart, x);
    Pauli3 low;
    for (int b = 0; b < 3; ++b) low[b] = g(b, 0) * sig[0] + g(b, 1) * sig[1] + g(b, 2) * sig[2];
    Mat2c W = Mat2c::Zero();
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            Mat2c inner = dsig[a][b];
            for (int c = 0; c < 3; ++c) inner += G(b, a, c) * sig[c];
            W += sig[a] * low[b] * inner;
        }
    return -0.25 * I * W;
}

Mat2c w_subprincipal(const Chart& chart, const Frame& frame, const Vec3& y) {
    Pauli3 sig = pauli_project(frame, y);
    auto dsig = pauli_derivative(frame_derivative(frame, y));
    Tensor3 G = christoffel(chart, y);
    Mat2c W = zero_order_part(chart, frame, y);
    for (int a = 0; a < 3; ++a) {
        double tr = G(0, a, 0) + G(1, a, 1) + G(2, a, 2);
        W += 0.5 * I * (tr * sig[a] + dsig[a][a]);
    }
    return W;
}

Spinor fix_phase(const Spinor& v) {
    Spinor u = v.normalized();
    int k = std::abs(u[1]) > std::abs(u[0]) ? 1 : 0;
    cplx ph = u[k] / std::abs(u[k]);
    u /= ph;
    u[k] = std::abs(u[k]);
    return u;
}

Spinor range_vector(const Mat2c& P) {
    int col = P.col(1).norm() > P.col(0).norm() ? 1 : 0;
    return fix_phase(P.col(col));
}

Eigenpairs eigenpairs_projections(const Pauli3& sigma, const Mat3& g, const Vec3& eta) {
    Eigenpairs e;
    Mat2c W = principal_symbol(sigma, eta);
    e.h = hamiltonian_h(g, eta);
    e.Pplus = 0.5 * (Mat2c::Identity() + W / e.h);
    e.Pminus = 0.5 * (Mat2c::Identity() - W / e.h);
    e.vplus = range_vector(e.Pplus);
    e.vminus = range_vector(e.Pminus);
    return e;
}

Eigenpairs eigenpairs_projections(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta) {
    return eigenpairs_projections(pauli_project(frame, y), chart.g(y), eta);
}

Spinor apply_dirac(const Chart& chart, const Frame& frame, const SpinorField& u, const Vec3& x, double step) {
    for (int a = 0; a < 3; ++a)
        for (double s : {-2.0, 2.0}) {
            Vec3 z = x;
            z[a] += s * step;
            if (!chart.inside(z)) throw Error(ErrorKind::StencilOutOfDomain, "stencil leaves the chart");
        }
    Pauli3 sig = pauli_project(frame, x);
    Spinor out = zero_order_part(chart, frame, x) * u(x);
    for (int a = 0; a < 3; ++a) {
        Spinor d = fd::d1_plain([&](const Vec3& z) -> Spinor { return u(z); }, x, a, step);
        out += -I * (sig[a] * d);
    }
    return out;
}

Spinor charge_conjugate(const Spinor& v) { return Spinor(-std::conj(v[1]), std::conj(v[0])); }

}  // namespace spinflow
