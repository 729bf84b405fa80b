#include "spinflow/spectral.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

namespace spinflow {

namespace {
constexpr double pi = std::numbers::pi;
}

WeylCoefficients weyl_coefficients(const Chart& chart, const Vec3& y) {
    WeylCoefficients w;
    w.scalar_curvature = curvature_pack(chart, y).scalar;
    w.c2 = 1.0 / (2 * pi * pi);
    w.c1 = 0.0;
    w.c0 = -w.scalar_curvature / (48 * pi * pi);
    return w;
}

namespace {

double transition(double s, double c) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    auto f = [c](double u) { return std::exp(-c / u); };
    double a = f(s), b = f(1.0 - s);
    return a / (a + b);
}

}  // namespace

double Mollifier::hat_mu(double t) const {
    const double a = std::abs(t);
    if (a <= T0 / 3) return 1.0;
    if (a >= 2 * T0 / 3) return 0.0;
    return transition((2 * T0 / 3 - a) / (T0 / 3), bump_scale);
}

double Mollifier::mu(double lambda) const {
    const double l = std::abs(lambda);
    if (l > max_lambda_) throw Error(ErrorKind::GridTooCoarse, fmt::format("mu requested at {} beyond {}", l, max_lambda_));
    // plateau part in closed form, transition by quadrature
    double plateau = l < 1e-12 ? T0 / 3 : std::sin(l * T0 / 3) / l;
    double tr = 0.0;
    for (size_t k = 0; k < nodes_.size(); ++k) tr += weights_[k] * hat_mu(nodes_[k]) * std::cos(nodes_[k] * l);
    return (plateau + tr) / pi;
}

Mollifier build_mollifier(double T0, const MollifierOptions& opt) {
    if (!(T0 > 0.0)) throw Error(ErrorKind::ConfigInvalid, "T0 must be positive");
    if (opt.panels < 4) throw Error(ErrorKind::GridTooCoarse, "need at least 4 quadrature panels");
    using GL = boost::math::quadrature::gauss<double, 20>;
    Mollifier m;
    m.T0 = T0;
    if (!(opt.bump_scale > 0.0)) throw Error(ErrorKind::ConfigInvalid, "bump scale must be positive");
    m.bump_scale = opt.bump_scale;
    const double a = T0 / 3, b = 2 * T0 / 3, w = (b - a) / opt.panels;
    for (int p = 0; p < opt.panels; ++p) {
        const double c = a + (p + 0.5) * w;
        const auto& x = GL::abscissa();
        const auto& wt = GL::weights();
        for (size_t i = 0; i < x.size(); ++i) {
            const double xs[2] = {x[i], -x[i]};
            for (int s = 0; s < (x[i] == 0.0 ? 1 : 2); ++s) {
                m.nodes_.push_back(c + 0.5 * w * xs[s]);
                m.weights_.push_back(0.5 * w * wt[i]);
            }
        }
    }
    // 20-point rule on a panel of width w integrates cos(t lambda) to round-off while lambda w < 10
    m.max_lambda_ = 10.0 / w;

    const double gmax = opt.grid_max > 0 ? opt.grid_max : 400.0 / T0;
    const double step = opt.grid_step > 0 ? opt.grid_step : 0.25 / T0;
    // mu is band limited to |t| <= 2 T0 / 3, so the trapezoidal rule is exact for step < 3 pi / T0
    if (step >= 3 * pi / T0) throw Error(ErrorKind::GridTooCoarse, "grid step aliases the band limit");
    if (gmax > m.max_lambda_)
        throw Error(ErrorKind::GridTooCoarse,
                    fmt::format("grid reaches {} but the quadrature resolves only {}", gmax, m.max_lambda_));
    const long n = static_cast<long>(std::ceil(gmax / step));
    for (long i = -n; i <= n; ++i) {
        const double l = i * step;
        m.grid.push_back(l);
        m.values.push_back(m.mu(l));
        if (std::abs(l) >= 40.0 / T0) m.tail_bound = std::max(m.tail_bound, std::abs(m.values.back()));
    }
    return m;
}

double mollifier_mass(const Mollifier& m) {
    if (m.grid.size() < 2) return 0.0;
    const double step = m.grid[1] - m.grid[0];
    double s = 0.0;
    for (size_t i = 0; i < m.values.size(); ++i)
        s += (i == 0 || i + 1 == m.values.size() ? 0.5 : 1.0) * m.values[i];
    return s * step;
}

namespace {

double sum_levels(const std::vector<SpectrumLevel>& lv, const Mollifier& mol, int sign, double lambda, double lo,
                  double hi, bool absolute) {
    double s = 0.0;
    for (const auto& l : lv) {
        if (sign * l.lambda <= 0.0) continue;
        const double a = std::abs(l.lambda);
        if (a <= lo || a > hi) continue;
        const double v = l.multiplicity * mol.mu(lambda - a);
        s += absolute ? std::abs(v) : v;
    }
    return s;
}

}  // namespace

CountingResult mollified_counting(const SpectrumModel& spectrum, const Mollifier& mol, int sign, double lambda,
                                  double lambda_max) {
    const double width = 50.0 / mol.T0;
    CountingResult r;
    if (lambda_max > 0.0) {
        if (lambda_max < lambda + 40.0 / mol.T0)
            throw Error(ErrorKind::TruncationInsufficient,
                        fmt::format("lambda_max {} below lambda + tail width {}", lambda_max, lambda + 40.0 / mol.T0));
        auto lv = spectrum.levels(lambda_max + width);
        r.lambda_max = lambda_max;
        r.value = sum_levels(lv, mol, sign, lambda, -1.0, lambda_max, false);
        r.truncation = sum_levels(lv, mol, sign, lambda, lambda_max, lambda_max + width, true);
        return r;
    }
    double L = lambda + width;
    for (int it = 0; it < 200; ++it) {
        auto lv = spectrum.levels(L + width);
        r.truncation = sum_levels(lv, mol, sign, lambda, L, L + width, true);
        if (r.truncation < 1e-8) {
            r.lambda_max = L;
            r.value = sum_levels(lv, mol, sign, lambda, -1.0, L, false);
            return r;
        }
        L += width;
    }
    throw Error(ErrorKind::TruncationInsufficient,
                fmt::format("truncation error {} at lambda_max {} still above 1e-8", r.truncation, L));
}

std::string ResidualReport::csv() const {
    std::string s = "lambda,mollified,c2_term,c1_term,c0_term,residual\n";
    for (const auto& r : rows)
        s += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.lambda, r.mollified, r.c2_term,
                         r.c1_term, r.c0_term, r.residual);
    return s;
}

ResidualReport weyl_residual(const SpectrumModel& spectrum, const Mollifier& mol, double volume,
                             const WeylCoefficients& coeffs, const std::vector<double>& lambdas, int sign,
                             double tolerance) {
    auto t0 = std::chrono::steady_clock::now();
    ResidualReport rep;
    rep.tolerance = tolerance;
    for (double l : lambdas) {
        CountingResult c = mollified_counting(spectrum, mol, sign, l);
        ResidualRow row;
        row.lambda = l;
        row.mollified = c.value / volume;
        row.c2_term = coeffs.c2 * l * l;
        row.c1_term = coeffs.c1 * l;
        row.c0_term = coeffs.c0;
        row.residual = row.mollified - row.c2_term - row.c1_term - row.c0_term;
        rep.rows.push_back(row);
    }
    rep.below_tolerance = true;
    rep.non_increasing = true;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < rep.rows.size(); ++i) {
        const double a = std::abs(rep.rows[i].residual);
        if (!(a < tolerance)) rep.below_tolerance = false;
        if (i > 0 && std::max(a, rep.floor) > std::max(std::abs(rep.rows[i - 1].residual), rep.floor))
            rep.non_increasing = false;
        if (a > rep.floor) {
            const double x = std::log(rep.rows[i].lambda), y = std::log(a);
            sx += x, sy += y, sxx += x * x, sxy += x * y;
            ++n;
        }
    }
    if (n >= 2 && n * sxx - sx * sx > 0) rep.decay_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.pass = rep.below_tolerance && rep.non_increasing;
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

}  // namespace spinflow
