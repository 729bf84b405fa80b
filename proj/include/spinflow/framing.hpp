#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spinflow/geometry.hpp"
#include "spinflow/poly.hpp"

namespace spinflow {

using Pauli3 = std::array<Mat2c, 3>;

// standard Pauli matrices s^1, s^2, s^3
const Pauli3& pauli();

struct Frame {
    std::string id;
    std::string chart_id;
    // rows are the frame vectors: e(x)(j, alpha) = e_j^alpha
    std::function<Mat3(const Vec3&)> e;
    // optional: de(x)[b](j, alpha) = d_b e_j^alpha
    std::function<Tensor3(const Vec3&)> de;
    double fd_scale = 1e-4;

    Mat3 at(const Vec3& x) const { return e(x); }
};

Tensor3 frame_derivative(const Frame& frame, const Vec3& x);

// sigma^alpha = s^j e_j^alpha
Pauli3 pauli_project(const Frame& frame, const Vec3& x);
Pauli3 pauli_project(const Mat3& e);

struct FrameCheckPoint {
    Vec3 x;
    double orthonormality = 0.0;  // max |g(e_j, e_k) - delta_jk|
    double orientation = 0.0;     // det(e) * rho, positive for positive orientation
    double killing = -1.0;        // max |L_{e_j} g|, negative when not requested
};

struct FrameReport {
    std::vector<FrameCheckPoint> points;
    double max_orthonormality = 0.0;
    double max_killing = 0.0;
    bool all_positive = true;
    bool orthonormal(double tol = 1e-9) const { return max_orthonormality < tol; }
};

FrameReport frame_checks(const Chart& chart, const Frame& frame, const std::vector<Vec3>& points,
                         bool killing = false);

struct GaugeTransform {
    std::string chart_id;
    std::function<Mat2c(const Vec3&)> G;
};

bool is_su2(const Mat2c& G, double tol = 1e-10);
// O_j^k = 1/2 tr(s_j G^* s^k G); throws NotSU2. Note O(AB) = O(B) O(A).
Mat3 su2_to_so3(const Mat2c& G);
Mat3 su2_to_so3(const GaugeTransform& G, const Vec3& x);
// rotated frame e'_j = O_j^k e_k
Frame su2_gauge(const Frame& frame, const GaugeTransform& G);

struct Su2Lift {
    Mat2c G;
    // true when the reference forced the lift with Re tr G < 0
    bool flipped = false;
};

// Lift a rotation to SU(2). With a reference element the sign closest to it
// is chosen, otherwise the sign with Re tr G >= 0.
Su2Lift so3_to_su2(const Mat3& O, const Mat2c* reference = nullptr);

// Parallel transport of e(y) along shortest geodesics from y.
class LeviCivitaFrame {
public:
    LeviCivitaFrame(std::shared_ptr<const Chart> chart, Mat3 e_at_y, Vec3 y);

    const Vec3& base() const { return y_; }
    Mat3 transport(const Vec3& x) const;

    // polynomial cache on a ball around y; must be called before cached()
    void build_cache(double radius, int degree, int samples = 0);
    bool has_cache() const { return static_cast<bool>(cache_); }
    double cache_radius() const { return cache_radius_; }

    // frame object evaluating by direct transport, or by the cache when built
    Frame as_frame(bool use_cache) const;

private:
    std::shared_ptr<const Chart> chart_;
    Mat3 ey_;
    Vec3 y_;
    std::shared_ptr<PolyModel> cache_;
    double cache_radius_ = 0.0;
};

std::shared_ptr<LeviCivitaFrame> levi_civita_frame(std::shared_ptr<const Chart> chart, const Frame& frame,
                                                   const Vec3& y);

}  // namespace spinflow
