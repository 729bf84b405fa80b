#pragma once

#include "spinflow/framing.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

struct TorsionPack {
    Tensor3 Upsilon;  // Upsilon[a](b, c) = Upsilon^a_{bc}, b the derivative index
    Tensor3 T;        // T^a_{bc}
    Tensor3 K;        // K^a_{bc}
    Mat3 starT;       // *T_{ab}
    Mat3 starK;       // *K_{ab}
    Tensor3 E;        // E_{abc} = rho eps_{abc}
    Mat3 g;
    double rho = 0.0;
};

// totally antisymmetric symbol, eps_{123} = +1 (0-based indices)
double levi_civita_symbol(int a, int b, int c);

TorsionPack torsion_pack(const Chart& chart, const Frame& frame, const Vec3& x);

// K^a_{bc} = 1/2 (T^a_{bc} + T_b^a_c + T_c^a_b)
Tensor3 contorsion_from_torsion(const Tensor3& T, const Mat3& g);

// dual on the 2nd and 3rd index of torsion: *T_{ab} = 1/2 T_a^{mn} E_{mnb}
Mat3 star_T(const Tensor3& T, const Mat3& g, double rho);
// dual on the 1st and 3rd index of contorsion: *K_{ab} = 1/2 K^m_a^n E_{mnb}
Mat3 star_K(const Tensor3& K, const Mat3& g, double rho);

// *K = *T - 1/2 tr(*T) g and *T = *K - tr(*K) g, traces taken with g^{-1}
Mat3 starK_from_starT(const Mat3& starT, const Mat3& g);
Mat3 starT_from_starK(const Mat3& starK, const Mat3& g);

// nabla_a *K_{bm} with the Levi-Civita connection: out[a](b, m)
Tensor3 star_K_covariant_derivative(const Chart& chart, const Frame& frame, const Vec3& x);

// Weitzenbock-covariant derivatives of g and of the frame vectors; both vanish
double weitzenbock_metric_residual(const Chart& chart, const Frame& frame, const Vec3& x);
double weitzenbock_frame_residual(const Chart& chart, const Frame& frame, const Vec3& x);

}  // namespace spinflow
