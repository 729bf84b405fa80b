#pragma once

#include <string>
#include <vector>

#include "spinflow/catalog.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

struct WeylCoefficients {
    double c2 = 0.0, c1 = 0.0, c0 = 0.0;
    double scalar_curvature = 0.0;
};

// local coefficients of (N'_+- * mu)(lambda), the same for both signs
WeylCoefficients weyl_coefficients(const Chart& chart, const Vec3& y);

struct MollifierOptions {
    // transition psi(s) = f(s) / (f(s) + f(1 - s)), f(s) = exp(-c / s)
    double bump_scale = 1.0;
    int panels = 256;         // Gauss-Legendre panels on the transition [T0 / 3, 2 T0 / 3]
    double grid_max = 0.0;    // largest |lambda| on the tabulated grid; 0 -> 400 / T0
    double grid_step = 0.0;   // 0 -> 0.25 / T0
};

class Mollifier {
public:
    double T0 = 0.0;
    double bump_scale = 1.0;
    // tabulated mu on [-grid_max, grid_max]
    std::vector<double> grid, values;
    // max |mu(lambda)| over the grid for |lambda| >= 40 / T0
    double tail_bound = 0.0;

    double hat_mu(double t) const;
    double mu(double lambda) const;
    double max_lambda() const { return max_lambda_; }

private:
    friend Mollifier build_mollifier(double T0, const MollifierOptions& opt);
    std::vector<double> nodes_, weights_;  // quadrature on [0, 2 T0 / 3]
    double max_lambda_ = 0.0;              // largest |lambda| the quadrature resolves
};

// throws GridTooCoarse when the quadrature cannot resolve the tabulated grid
Mollifier build_mollifier(double T0, const MollifierOptions& opt = {});

// trapezoidal integral of the tabulated mu
double mollifier_mass(const Mollifier& m);

struct CountingResult {
    double value = 0.0;        // sum over the spectrum, not divided by the volume
    double lambda_max = 0.0;   // truncation used
    double truncation = 0.0;   // estimate of the neglected part
};

// (N'_+- * mu)(lambda) = sum over +-lambda_k > 0 of m_k mu(lambda - |lambda_k|).
// lambda_max <= 0 selects lambda + 50 / T0 and raises it until the
// estimated truncation error is below 1e-8.
CountingResult mollified_counting(const SpectrumModel& spectrum, const Mollifier& mol, int sign, double lambda,
                                  double lambda_max = 0.0);

struct ResidualRow {
    double lambda, mollified, c2_term, c1_term, c0_term, residual;
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double tolerance = 1e-3;
    double floor = 1e-12;       // residuals below this count as equal when checking monotonicity
    bool below_tolerance = false;
    bool non_increasing = false;
    bool pass = false;
    double decay_exponent = 0.0;  // least-squares slope of log|r| against log lambda (rows above floor)
    double runtime_s = 0.0;

    std::string csv() const;
};

// residual of the per-unit-volume mollified counting function against the
// Weyl polynomial, over a lambda grid
ResidualReport weyl_residual(const SpectrumModel& spectrum, const Mollifier& mol, double volume,
                             const WeylCoefficients& coeffs, const std::vector<double>& lambdas, int sign = 1,
                             double tolerance = 1e-3);

}  // namespace spinflow
