#include <doctest.h>

#include <random>

#include "spinflow/catalog.hpp"
#include "spinflow/dirac.hpp"
#include "spinflow/fd.hpp"
#include "test_util.hpp"

using namespace spinflow;

namespace {

Mat3 rodrigues(const Vec3& l) {
    // e = exp(A) with A = [[0, l3, -l2], [-l3, 0, l1], [l2, -l1, 0]]
    Mat3 A;
    A << 0, l[2], -l[1], -l[2], 0, l[0], l[1], -l[0], 0;
    double th = l.norm();
    if (th < 1e-14) return Mat3::Identity() + A;
    return Mat3::Identity() + std::sin(th) / th * A + (1 - std::cos(th)) / (th * th) * A * A;
}

// normal chart at y as a polynomial surrogate, and the Levi-Civita frame of V+ there
struct LcSetup {
    std::shared_ptr<Chart> chart;
    Frame frame;
};

LcSetup lc_setup(const Vec3& y) {
    const auto& s3 = builtin("s3");
    Mat3 E = s3.framing("vplus").e(y).transpose();
    auto nc = normal_coordinates(s3.chart, y, &E);
    auto pc = std::make_shared<Chart>(polynomial_chart(nc.chart, Vec3::Zero(), 0.3, 8, 700));
    Frame id;
    id.e = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
    auto lc = levi_civita_frame(pc, id, Vec3::Zero());
    lc->build_cache(0.3, 8);
    return {pc, lc->as_frame(true)};
}

double hermitian_defect(const Mat2c& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("principal symbol basics") {
    const auto& t3 = builtin("t3_flat");
    Mat2c W = principal_symbol(t3.framing("identity"), Vec3::Zero(), Vec3(0, 0, 1));
    CHECK((W - pauli()[2]).norm() == 0.0);
    CHECK_THROWS_AS(principal_symbol(t3.framing("identity"), Vec3::Zero(), Vec3::Zero()), Error);
    const auto& s3 = builtin("s3");
    std::mt19937_64 rng(2);
    for (const auto& y : testutil::ball_points(100, 1.5, 3)) {
        Vec3 eta = testutil::random_unit(rng) * 2.3;
        Mat2c P = principal_symbol(s3.framing("vplus"), y, eta);
        double h = hamiltonian_h(s3.chart->g(y), eta);
        CHECK(std::abs(P.determinant() + h * h) < 1e-9 * h * h);
        CHECK(std::abs(P.trace()) < 1e-12);
        CHECK((principal_symbol(s3.framing("vplus"), y, 2 * eta) - 2 * P).norm() < 1e-12);
        CHECK(std::abs(hamiltonian_h(s3.chart->g(y), 3 * eta) - 3 * h) < 1e-12 * h);
    }
}

TEST_CASE("eigenpairs and projections") {
    const auto& t3 = builtin("t3_flat");
    auto ep = eigenpairs_projections(*t3.chart, t3.framing("identity"), Vec3::Zero(), Vec3(0, 0, 1));
    CHECK((ep.vplus - Spinor(1, 0)).norm() == 0.0);
    CHECK((ep.vminus - Spinor(0, 1)).norm() == 0.0);
    const auto& s3 = builtin("s3");
    std::mt19937_64 rng(4);
    for (const auto& y : testutil::ball_points(50, 1.5, 5)) {
        Vec3 eta = testutil::random_unit(rng) * 1.7;
        auto e = eigenpairs_projections(*s3.chart, s3.framing("vminus"), y, eta);
        Mat2c W = principal_symbol(s3.framing("vminus"), y, eta);
        CHECK((W * e.vplus - e.h * e.vplus).norm() < 1e-12);
        CHECK((W * e.vminus + e.h * e.vminus).norm() < 1e-12);
        CHECK((e.Pplus + e.Pminus - Mat2c::Identity()).norm() < 1e-12);
        CHECK((e.Pplus * e.Pplus - e.Pplus).norm() < 1e-12);
        CHECK(hermitian_defect(e.Pplus) < 1e-15);
        CHECK((e.vplus * e.vplus.adjoint() - e.Pplus).norm() < 1e-12);
        CHECK(std::abs(e.vplus.norm() - 1) < 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat2c> es(e.Pplus);
        CHECK(std::abs(es.eigenvalues()[0]) < 1e-10);
        // phase convention
        int k = std::abs(e.vplus[1]) > std::abs(e.vplus[0]) ? 1 : 0;
        CHECK(e.vplus[k].imag() == 0.0);
        CHECK(e.vplus[k].real() > 0);
        auto em = eigenpairs_projections(*s3.chart, s3.framing("vminus"), y, Vec3(-eta));
        CHECK((e.Pminus - em.Pplus).norm() == 0.0);
        CHECK(std::abs(std::abs(e.vminus.dot(em.vplus)) - 1) < 1e-12);
        auto again = eigenpairs_projections(*s3.chart, s3.framing("vminus"), y, eta);
        CHECK(again.vplus == e.vplus);
        auto e5 = eigenpairs_projections(*s3.chart, s3.framing("vminus"), y, Vec3(5 * eta));
        CHECK((e5.Pplus - e.Pplus).norm() < 1e-12);
    }
}

TEST_CASE("fix_phase tie goes to the first component") {
    Spinor v(cplx(0, 1), cplx(1, 0));
    Spinor u = fix_phase(v);
    CHECK(u[0].imag() == 0.0);
    CHECK(u[0].real() > 0);
}

TEST_CASE("zero order part") {
    const auto& t3 = builtin("t3_flat");
    CHECK(zero_order_part(*t3.chart, t3.framing("rotated"), Vec3(0.1, 0.2, 0.3)).norm() == 0.0);
    CHECK(w_subprincipal(*t3.chart, t3.framing("rotated"), Vec3(0.1, 0.2, 0.3)).norm() == 0.0);
}

TEST_CASE("Levi-Civita framing in normal coordinates") {
    Vec3 y(0.3, -0.2, 0.1);
    auto s = lc_setup(y);
    CHECK(zero_order_part(*s.chart, s.frame, Vec3::Zero()).norm() < 1e-7);
    CHECK(w_subprincipal(*s.chart, s.frame, Vec3::Zero()).norm() < 1e-6);
    auto cp = curvature_pack(*s.chart, Vec3::Zero());
    Pauli3 sig = pauli_project(s.frame, Vec3::Zero());
    double worst = 0;
    for (int a = 0; a < 3; ++a) {
        Mat2c d = fd::d1([&](const Vec3& x) -> Mat2c { return zero_order_part(*s.chart, s.frame, x); },
                         Vec3(Vec3::Zero()), a, 1e-3);
        Mat2c ref = Mat2c::Zero();
        for (int b = 0; b < 3; ++b) ref += 0.25 * I * cp.Ricci(a, b) * sig[b];
        worst = std::max(worst, (d - ref).cwiseAbs().maxCoeff());
        CHECK(std::abs(d.trace()) < 1e-5);
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("subprincipal symbol is Hermitian") {
    for (const char* id : {"s3", "s2xs1"}) {
        const auto& e = builtin(id);
        for (const auto& [name, f] : e.framings)
            for (const auto& x : testutil::ball_points(20, 0.8, 8))
                CHECK(hermitian_defect(w_subprincipal(*e.chart, f, x)) < 1e-9);
    }
}

TEST_CASE("subprincipal symbol on a synthetic rotated frame") {
    // flat metric, frame exp(A(x)) with linear l(x) = L x
    Mat3 L;
    L << 0.3, -0.7, 0.2, 0.5, -0.4, 1.1, -0.6, 0.9, 0.8;
    Frame f;
    f.e = [L](const Vec3& x) { return rodrigues(L * x); };
    const auto& t3 = builtin("t3_flat");
    Mat2c W = w_subprincipal(*t3.chart, f, Vec3::Zero());
    Mat2c ref = -0.5 * L.trace() * Mat2c::Identity();
    CHECK((W - ref).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("charge conjugation") {
    CHECK((charge_conjugate(Spinor(1, 0)) - Spinor(0, 1)).norm() == 0.0);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    for (int i = 0; i < 10; ++i) {
        Spinor v(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng)));
        CHECK((charge_conjugate(charge_conjugate(v)) + v).norm() < 1e-15);
        cplx a(nd(rng), nd(rng));
        CHECK((charge_conjugate(Spinor(a * v)) - std::conj(a) * charge_conjugate(v)).norm() < 1e-14);
    }
}

namespace {

Spinor test_field(const Vec3& x) {
    return Spinor(cplx(std::cos(x[0]) + x[1], 0.3 * x[2] * x[0]), cplx(std::sin(x[1] * x[2]), 1.0 - x[0] * x[0]));
}

double bump(const Vec3& x, double r) {
    double q = x.squaredNorm() / (r * r);
    return q < 1 ? std::exp(-1.0 / (1 - q)) : 0.0;
}

}  // namespace

TEST_CASE("Dirac operator on constant data and under gauge and charge conjugation") {
    const auto& t3 = builtin("t3_flat");
    SpinorField c = [](const Vec3&) { return Spinor(cplx(1, 2), cplx(-0.5, 0.1)); };
    CHECK(apply_dirac(*t3.chart, t3.framing("rotated"), c, Vec3(0.1, 0.2, 0.3)).norm() < 1e-12);

    const auto& s3 = builtin("s3");
    const auto& G = s3.gauges.at({"vplus", "vminus"}).G;
    SpinorField u = test_field;
    SpinorField Gu = [&](const Vec3& x) -> Spinor { return G(x) * u(x); };
    for (const auto& x : testutil::ball_points(10, 1.0, 13)) {
        Spinor lhs = apply_dirac(*s3.chart, s3.framing("vminus"), u, x);
        Spinor rhs = G(x).adjoint() * apply_dirac(*s3.chart, s3.framing("vplus"), Gu, x);
        CHECK((lhs - rhs).norm() < 1e-6);
        SpinorField Cu = [&](const Vec3& z) { return charge_conjugate(u(z)); };
        Spinor a = apply_dirac(*s3.chart, s3.framing("vplus"), Cu, x);
        Spinor b = charge_conjugate(apply_dirac(*s3.chart, s3.framing("vplus"), u, x));
        CHECK((a - b).norm() < 1e-6);
    }
}

TEST_CASE("Dirac operator is symmetric") {
    const auto& s3 = builtin("s3");
    const Frame& f = s3.framing("vplus");
    double r = 0.8;
    SpinorField u = [r](const Vec3& x) { return Spinor(bump(x, r) * test_field(x)); };
    SpinorField v = [r](const Vec3& x) {
        Vec3 z = x - Vec3(0.1, -0.1, 0.05);
        return Spinor(bump(z, 0.6) * Spinor(cplx(z[0], 1), cplx(0.5, z[1] * z[2])));
    };
    // trapezoid rule on a uniform grid; exact to high order for compactly supported smooth data
    int n = 40;
    double h = 2 * r / n;
    cplx a = 0, b = 0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            for (int k = 0; k <= n; ++k) {
                Vec3 x(-r + i * h, -r + j * h, -r + k * h);
                if (x.norm() >= r) continue;
                double w = density(*s3.chart, x) * h * h * h;
                Spinor ux = u(x), vx = v(x);
                a += w * ux.dot(apply_dirac(*s3.chart, f, v, x));
                b += w * apply_dirac(*s3.chart, f, u, x).dot(vx);
            }
    CHECK(std::abs(a - b) < 1e-5);
    MESSAGE("<u,Wv> = " << a << ", <Wu,v> = " << b);
}
