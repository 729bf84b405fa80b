#include "spinflow/poly.hpp"

#include <cmath>
#include <functional>

namespace spinflow {

namespace {

void enumerate(int n, int d, std::vector<std::vector<int>>& out) {
    std::vector<int> e(n, 0);
    std::function<void(int, int)> rec = [&](int i, int left) {
        if (i == n - 1) {
            for (int k = 0; k <= left; ++k) {
                e[i] = k;
                out.push_back(e);
            }
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
    };
    rec(0, d);
}

}  // namespace

PolyModel::PolyModel(int nvars, int degree, Eigen::VectorXd center, double radius)
    : n_(nvars), d_(degree), center_(std::move(center)), radius_(radius) {
    enumerate(n_, d_, exps_);
}

Eigen::RowVectorXd PolyModel::basis_row(const Eigen::VectorXd& u, const std::vector<int>& alpha) const {
    Eigen::RowVectorXd row(nterms());
    int order = 0;
    for (int a : alpha) order += a;
    const double scale = std::pow(radius_, -order);
    // pw(i, k) = u_i^k, ff(i, e) = e (e-1) ... (e - a_i + 1)
    const int m = d_ + 1;
    Eigen::MatrixXd pw(n_, m), ff(n_, m);
    for (int i = 0; i < n_; ++i) {
        const int a = alpha.empty() ? 0 : alpha[i];
        pw(i, 0) = 1.0;
        for (int k = 1; k < m; ++k) pw(i, k) = pw(i, k - 1) * u[i];
        for (int e = 0; e < m; ++e) {
            double f = e >= a ? 1.0 : 0.0;
            for (int k = 0; k < a && f != 0.0; ++k) f *= (e - k);
            ff(i, e) = f;
        }
    }
    for (int t = 0; t < nterms(); ++t) {
        double v = scale;
        const std::vector<int>& ex = exps_[t];
        for (int i = 0; i < n_; ++i) {
            const int e = ex[i], a = alpha.empty() ? 0 : alpha[i];
            if (e < a) {
                v = 0.0;
                break;
            }
            v *= ff(i, e) * pw(i, e - a);
        }
        row[t] = v;
    }
    return row;
}

void PolyModel::fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
    const Eigen::Index N = X.rows();
    Eigen::MatrixXd A(N, nterms());
    for (Eigen::Index r = 0; r < N; ++r) {
        Eigen::VectorXd u = (X.row(r).transpose() - center_) / radius_;
        A.row(r) = basis_row(u, {});
    }
    coef_ = A.colPivHouseholderQr().solve(Y);
    residual_ = (A * coef_ - Y).cwiseAbs().maxCoeff();
}

Eigen::VectorXd PolyModel::eval(const Eigen::VectorXd& x) const {
    Eigen::VectorXd u = (x - center_) / radius_;
    return (basis_row(u, {}) * coef_).transpose();
}

Eigen::VectorXd PolyModel::deriv(const Eigen::VectorXd& x, const std::vector<int>& alpha) const {
    Eigen::VectorXd u = (x - center_) / radius_;
    return (basis_row(u, alpha) * coef_).transpose();
}

Eigen::MatrixXd PolyModel::jet2(const Eigen::VectorXd& x) const {
    if (n_ != 3 || d_ > 31) {
        static const std::vector<std::vector<int>> alphas = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                                                             {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
        Eigen::MatrixXd out(10, coef_.cols());
        for (int r = 0; r < 10; ++r) out.row(r) = deriv(x, alphas[r]).transpose();
        return out;
    }
    const int m = d_ + 1;
    double pw[3][32];
    for (int i = 0; i < 3; ++i) {
        const double u = (x[i] - center_[i]) / radius_;
        pw[i][0] = 1.0;
        for (int k = 1; k < m; ++k) pw[i][k] = pw[i][k - 1] * u;
    }
    auto P = [&](int i, int e) { return e < 0 ? 0.0 : pw[i][e]; };
    Eigen::MatrixXd B(10, nterms());
    const double r1 = 1.0 / radius_, r2 = r1 * r1;
    for (int t = 0; t < nterms(); ++t) {
        const int e0 = exps_[t][0], e1 = exps_[t][1], e2 = exps_[t][2];
        const double v0 = P(0, e0), v1 = P(1, e1), v2 = P(2, e2);
        const double d0 = e0 * P(0, e0 - 1), d1 = e1 * P(1, e1 - 1), d2 = e2 * P(2, e2 - 1);
        const double s0 = e0 * (e0 - 1) * P(0, e0 - 2), s1 = e1 * (e1 - 1) * P(1, e1 - 2),
                     s2 = e2 * (e2 - 1) * P(2, e2 - 2);
        B(0, t) = v0 * v1 * v2;
        B(1, t) = r1 * d0 * v1 * v2;
        B(2, t) = r1 * v0 * d1 * v2;
        B(3, t) = r1 * v0 * v1 * d2;
        B(4, t) = r2 * s0 * v1 * v2;
        B(5, t) = r2 * d0 * d1 * v2;
        B(6, t) = r2 * d0 * v1 * d2;
        B(7, t) = r2 * v0 * s1 * v2;
        B(8, t) = r2 * v0 * d1 * d2;
        B(9, t) = r2 * v0 * v1 * s2;
    }
    return B * coef_;
}

}  // namespace spinflow
