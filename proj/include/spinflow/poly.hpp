#pragma once

#include <vector>

#include <Eigen/Dense>

namespace spinflow {

// Least-squares polynomial in n variables, total degree <= d, in the scaled
// variable u = (x - center) / radius. Values may be vector valued.
class PolyModel {
public:
    PolyModel() = default;
    PolyModel(int nvars, int degree, Eigen::VectorXd center, double radius);

    // rows of X are sample points, rows of Y the values.
    void fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

    int nterms() const { return static_cast<int>(exps_.size()); }
    int nvars() const { return n_; }
    int degree() const { return d_; }
    const Eigen::VectorXd& center() const { return center_; }
    double radius() const { return radius_; }
    double fit_residual() const { return residual_; }

    Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
    // partial derivative with multi-index alpha (size n)
    Eigen::VectorXd deriv(const Eigen::VectorXd& x, const std::vector<int>& alpha) const;

    // rows: value, d/dx_0..2, then d2 in the order 00 01 02 11 12 22 (3 variables only)
    Eigen::MatrixXd jet2(const Eigen::VectorXd& x) const;

    const Eigen::MatrixXd& coefficients() const { return coef_; }

private:
    Eigen::RowVectorXd basis_row(const Eigen::VectorXd& u, const std::vector<int>& alpha) const;

    int n_ = 0, d_ = 0;
    Eigen::VectorXd center_;
    double radius_ = 1.0;
    std::vector<std::vector<int>> exps_;
    Eigen::MatrixXd coef_;
    double residual_ = 0.0;
};

}  // namespace spinflow
