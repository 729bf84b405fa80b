#pragma once

#include <functional>
#include <memory>
#include <numbers>
#include <string>

#include "spinflow/ode.hpp"
#include "spinflow/types.hpp"

namespace spinflow {

struct Chart {
    std::string id;
    std::function<Mat3(const Vec3&)> metric;
    // optional analytic derivatives: dmetric(x)[c](a,b) = d_c g_ab,
    // ddmetric(x)[d][c](a,b) = d_d d_c g_ab
    std::function<Tensor3(const Vec3&)> dmetric;
    std::function<Tensor4(const Vec3&)> ddmetric;
    std::function<bool(const Vec3&)> contains;
    double injectivity_hint = 1.0;
    double loop_bound = 2.0 * std::numbers::pi;
    // relative finite-difference step for first derivatives of g; charts whose
    // metric is itself the output of an ODE solve use a larger one
    double fd_scale = 1e-4;
    OdeOptions ode{};

    bool inside(const Vec3& x) const { return !contains || contains(x); }
    Mat3 g(const Vec3& x) const;
};

struct CurvaturePack {
    Tensor3 Gamma;    // Gamma[a](b,c)
    Tensor4 Riemann;  // Riemann[a][b](c,d) = R^a_{bcd}
    Mat3 Ricci;
    double scalar = 0.0;
    double rho = 0.0;
};

double density(const Chart& chart, const Vec3& x);
Tensor3 metric_derivative(const Chart& chart, const Vec3& x);
Tensor4 metric_second_derivative(const Chart& chart, const Vec3& x);
Tensor3 christoffel(const Chart& chart, const Vec3& x);
// dGamma[d][a](b,c) = d_d Gamma^a_{bc}
Tensor4 christoffel_derivative(const Chart& chart, const Vec3& x);
CurvaturePack curvature_pack(const Chart& chart, const Vec3& x);

// Gamma(u, v)^a = Gamma^a_{bc} u^b v^c
Vec3 contract(const Tensor3& G, const Vec3& u, const Vec3& v);

struct GeodesicPoint {
    Vec3 x, v;
    // d(x, v)(t) / d(y, v0): rows 0-2 position, 3-5 velocity; columns 0-2 d/dy, 3-5 d/dv0
    Eigen::Matrix<double, 6, 6> jac = Eigen::Matrix<double, 6, 6>::Zero();
};

Vec3 exp_map(const Chart& chart, const Vec3& y, const Vec3& v, double t);
GeodesicPoint geodesic(const Chart& chart, const Vec3& y, const Vec3& v, double t, bool variational);

struct LogResult {
    Vec3 v = Vec3::Zero();
    double dist = 0.0;
    int iterations = 0;
    // d exp_y(v) / dv at the solution
    Mat3 dexp = Mat3::Identity();
};

struct LogOptions {
    int max_iter = 50;
    double tol = 1e-12;
    bool check_radius = true;
};

LogResult log_map_and_distance(const Chart& chart, const Vec3& y, const Vec3& x, const LogOptions& opt = {});

// Normal coordinates at y: x_N -> exp_y(E x_N), with E^T g(y) E = Id.
struct NormalCoordinates {
    std::shared_ptr<const Chart> base;
    Vec3 y;
    Mat3 E;
    Chart chart;

    Vec3 to_base(const Vec3& xn) const;
    // base point and Jacobian d x / d x_N
    std::pair<Vec3, Mat3> map_with_jacobian(const Vec3& xn) const;
    // inverse map through log_map
    Vec3 from_base(const Vec3& x) const;
};

// E defaults to the symmetric inverse square root of g(y).
NormalCoordinates normal_coordinates(std::shared_ptr<const Chart> chart, const Vec3& y,
                                     const Mat3* E = nullptr);

// Polynomial surrogate of a chart's metric on a ball, with analytic first and
// second derivatives. Used where many Christoffel evaluations are needed.
Chart polynomial_chart(const Chart& chart, const Vec3& center, double radius, int degree, int samples,
                       double* fit_error = nullptr);

}  // namespace spinflow
