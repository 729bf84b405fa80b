#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spinflow {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec2c = Eigen::Vector2cd;
using Mat2c = Eigen::Matrix2cd;

inline constexpr cplx I{0.0, 1.0};

// Rank-3 array with a leading index: t[a](b, c).
struct Tensor3 {
    std::array<Mat3, 3> m{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};

    Mat3& operator[](int a) { return m[a]; }
    const Mat3& operator[](int a) const { return m[a]; }
    double& operator()(int a, int b, int c) { return m[a](b, c); }
    double operator()(int a, int b, int c) const { return m[a](b, c); }

    static Tensor3 zero() { return {}; }
    Tensor3& operator+=(const Tensor3& o) { for (int a = 0; a < 3; ++a) m[a] += o.m[a]; return *this; }
    Tensor3& operator-=(const Tensor3& o) { for (int a = 0; a < 3; ++a) m[a] -= o.m[a]; return *this; }
    Tensor3& operator*=(double s) { for (int a = 0; a < 3; ++a) m[a] *= s; return *this; }
    friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
    friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
    friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
    friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
    double max_abs() const {
        double r = 0;
        for (auto& x : m) r = std::max(r, x.cwiseAbs().maxCoeff());
        return r;
    }
};

// Rank-4 array r[a][b](c, d).
struct Tensor4 {
    std::array<Tensor3, 3> m{};
    Tensor3& operator[](int a) { return m[a]; }
    const Tensor3& operator[](int a) const { return m[a]; }
    double& operator()(int a, int b, int c, int d) { return m[a].m[b](c, d); }
    double operator()(int a, int b, int c, int d) const { return m[a].m[b](c, d); }
    Tensor4& operator+=(const Tensor4& o) { for (int a = 0; a < 3; ++a) m[a] += o.m[a]; return *this; }
    Tensor4& operator-=(const Tensor4& o) { for (int a = 0; a < 3; ++a) m[a] -= o.m[a]; return *this; }
    Tensor4& operator*=(double s) { for (int a = 0; a < 3; ++a) m[a] *= s; return *this; }
    friend Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
    friend Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
    friend Tensor4 operator*(double s, Tensor4 a) { return a *= s; }
    double max_abs() const {
        double r = 0;
        for (auto& x : m) r = std::max(r, x.max_abs());
        return r;
    }
};

enum class ErrorKind {
    SingularMetric,
    OutOfChart,
    DerivativeUnavailable,
    ChartExit,
    ToleranceFail,
    NoConvergence,
    OutOfRadius,
    NotSU2,
    ZeroCovector,
    StencilOutOfDomain,
    BranchLoss,
    FitIllConditioned,
    GridTooCoarse,
    TruncationInsufficient,
    UnknownId,
    ConfigInvalid,
};

const char* error_name(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind k, const std::string& what)
        : std::runtime_error(std::string(error_name(k)) + ": " + what), kind_(k) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace spinflow
