#pragma once

#include <functional>

#include "spinflow/framing.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

using Spinor = Vec2c;
using SpinorField = std::function<Spinor(const Vec3&)>;

// h = sqrt(g^{ab} eta_a eta_b)
double hamiltonian_h(const Mat3& g, const Vec3& eta);

Mat2c principal_symbol(const Pauli3& sigma, const Vec3& eta);
Mat2c principal_symbol(const Frame& frame, const Vec3& y, const Vec3& eta);

// -(i/4) sigma^a sigma_b (d_a sigma^b + Gamma^b_{ac} sigma^c)
Mat2c zero_order_part(const Chart& chart, const Frame& frame, const Vec3& x);

// W_0 + (i/2) sigma^a Gamma^b_{ab} + (i/2) d_a sigma^a  (independent of eta)
Mat2c w_subprincipal(const Chart& chart, const Frame& frame, const Vec3& y);

struct Eigenpairs {
    double h = 0.0;
    Spinor vplus, vminus;
    Mat2c Pplus, Pminus;

    const Spinor& v(int sign) const { return sign > 0 ? vplus : vminus; }
    const Mat2c& P(int sign) const { return sign > 0 ? Pplus : Pminus; }
};

// unit vector in the range of a rank-one projection, with the largest-modulus
// component real positive (ties: first component)
Spinor fix_phase(const Spinor& v);
Spinor range_vector(const Mat2c& P);

Eigenpairs eigenpairs_projections(const Pauli3& sigma, const Mat3& g, const Vec3& eta);
Eigenpairs eigenpairs_projections(const Chart& chart, const Frame& frame, const Vec3& y, const Vec3& eta);

// -i sigma^a d_a u + W_0 u with 4th-order central differences
Spinor apply_dirac(const Chart& chart, const Frame& frame, const SpinorField& u, const Vec3& x,
                   double step = 1e-3);

Spinor charge_conjugate(const Spinor& v);

}  // namespace spinflow
