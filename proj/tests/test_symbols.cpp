#include <doctest.h>

#include <cmath>
#include <random>

#include "spinflow/catalog.hpp"
#include "spinflow/fd.hpp"
#include "spinflow/symbols.hpp"
#include "spinflow/weitzenbock.hpp"
#include "test_util.hpp"

using namespace spinflow;

namespace {

const Mat2c Id = Mat2c::Identity();

Mat2c sigma_dot(const Pauli3& s, const Vec3& v) { return v[0] * s[0] + v[1] * s[1] + v[2] * s[2]; }

// charge conjugation J X J^{-1} = s_2 conj(X) s_2
Mat2c conj_J(const Mat2c& X) {
    const Mat2c& s2 = pauli()[1];
    return s2 * X.conjugate() * s2;
}

Frame lc_frame_at(const CatalogEntry& e, const Frame& f, const Vec3& y) {
    auto lc = levi_civita_frame(e.chart, f, y);
    return lc->as_frame(false);
}

}  // namespace

TEST_CASE("principal symbol at t = 0 and on the S3 pole") {
    const auto& s3 = builtin("s3");
    const Frame& vp = s3.framing("vplus");
    Vec3 y(0.2, -0.4, 0.1), eta(0.3, 0.9, -1.2);
    auto ep = eigenpairs_projections(*s3.chart, vp, y, eta);
    Mat2c sum = Mat2c::Zero();
    for (int sg : {1, -1}) {
        Mat2c a = propagator_principal(*s3.chart, vp, y, eta, 0.0, sg);
        CHECK((a - ep.P(sg)).norm() < 1e-10);
        sum += a;
    }
    CHECK((sum - Id).norm() < 1e-10);

    Mat2c d1 = Mat2c::Zero(), d2 = Mat2c::Zero();
    d1(0, 0) = 1;
    d2(1, 1) = 1;
    for (double t : {0.3, 0.9}) {
        Mat2c ap = propagator_principal(*s3.chart, vp, Vec3::Zero(), Vec3(0, 0, 1), t, 1);
        Mat2c am = propagator_principal(*s3.chart, vp, Vec3::Zero(), Vec3(0, 0, 1), t, -1);
        CHECK((ap - std::exp(-0.5 * I * t) * d1).norm() < 1e-7);
        // the transport gives e^{-it/2} here as well (see the flow tests)
        CHECK((am - std::exp(-0.5 * I * t) * d2).norm() < 1e-7);
    }
}

TEST_CASE("V- principal symbol from the V+ one by the gauge at the flow point") {
    const auto& s3 = builtin("s3");
    const Frame& vp = s3.framing("vplus");
    const Frame& vm = s3.framing("vminus");
    const auto& G = s3.gauges.at({"vplus", "vminus"});
    Vec3 eta(0.2, -0.7, 0.5);
    for (int sg : {1, -1})
        for (double t : {0.2, 0.6}) {
            Mat2c a_plus = propagator_principal(*s3.chart, vp, Vec3::Zero(), eta, t, sg);
            Mat2c a_minus = propagator_principal(*s3.chart, vm, Vec3::Zero(), eta, t, sg);
            Vec3 x = hamiltonian_flow(*s3.chart, Vec3::Zero(), eta, t, sg).x;
            Mat2c mapped = G.G(x).adjoint() * a_plus * G.G(Vec3::Zero());
            CHECK((mapped - a_minus).norm() < 1e-7);
        }
}

TEST_CASE("q route: flat constant frame and the S3 pole") {
    const auto& t3 = builtin("t3_flat");
    const Frame& rot = t3.framing("rotated");
    Vec3 y(0.3, 0.1, -0.2), eta(0.5, -1.0, 0.4);
    for (int sg : {1, -1}) {
        CHECK(std::abs(q_phase(*t3.chart, rot, y, eta, sg)) < 1e-10);
        auto r = principal_via_q(*t3.chart, rot, y, eta, 0.7, sg);
        CHECK((r.symbol - eigenpairs_projections(*t3.chart, rot, y, eta).P(sg)).norm() < 1e-10);
    }
    const auto& s3 = builtin("s3");
    for (double t : {0.3, 1.0}) {
        auto r = principal_via_q(*s3.chart, s3.framing("vplus"), Vec3::Zero(), Vec3(0, 0, 1), t, 1);
        CHECK(std::abs(r.integral - 0.5 * t) < 1e-6);
    }
}

TEST_CASE("two routes to the principal symbol agree") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-0.3, 0.3);
    for (const char* id : {"s3", "s2xs1"}) {
        const auto& e = builtin(id);
        const Frame& f = e.framing(e.default_framing);
        auto ys = testutil::ball_points(20, 0.5, 23);
        for (int k = 0; k < 20; ++k) {
            Vec3 eta = testutil::random_unit(rng) * (0.5 + std::abs(U(rng)) * 3);
            double t = U(rng);
            int sg = k % 2 ? 1 : -1;
            auto r = principal_via_q(*e.chart, f, ys[k], eta, t, sg);
            Mat2c a = propagator_principal(*e.chart, f, ys[k], eta, t, sg);
            CHECK((r.symbol - a).norm() < 1e-5);
        }
    }
}

TEST_CASE("U(0) subprincipal symbol") {
    const auto& s3 = builtin("s3");
    const auto& sx = builtin("s2xs1");
    const auto& t3 = builtin("t3_flat");
    Vec3 eta(0.4, -0.3, 1.1);
    for (int sg : {1, -1}) {
        CHECK(u0_subprincipal(*sx.chart, sx.framing("lc0"), Vec3::Zero(), eta, sg).norm() < 1e-6);
        CHECK(u0_subprincipal(*t3.chart, t3.framing("rotated"), Vec3(0.1, 0.2, 0.3), eta, sg).norm() < 1e-10);
        for (const auto& y : testutil::ball_points(4, 0.6, 3)) {
            double h = hamiltonian_h(s3.chart->g(y), eta);
            Mat2c u = u0_subprincipal(*s3.chart, s3.framing("vplus"), y, eta, sg);
            CHECK((u - sg / (2 * h) * Id).norm() < 1e-6);
        }
    }
}

TEST_CASE("gauge derivatives") {
    const auto& s3 = builtin("s3");
    const Frame& vp = s3.framing("vplus");
    const Frame& vm = s3.framing("vminus");
    Vec3 y(0.2, 0.1, -0.3);

    auto same = gauge_derivatives(*s3.chart, vp, vp, y);
    for (int a = 0; a < 3; ++a) {
        CHECK(same.dG[a].norm() < 1e-12);
        for (int b = 0; b < 3; ++b) CHECK(same.ddG[a][b].norm() < 1e-12);
    }

    // V- relative to its own Levi-Civita framing: dG = -(i/2) sigma_alpha
    Frame lc = lc_frame_at(s3, vm, y);
    auto gd = gauge_derivatives(*s3.chart, vm, lc, y);
    Pauli3 sig = pauli_project(vm, y);
    Mat3 g = s3.chart->g(y);
    for (int a = 0; a < 3; ++a) {
        Mat2c lowered = g(a, 0) * sig[0] + g(a, 1) * sig[1] + g(a, 2) * sig[2];
        CHECK((gd.dG[a] + 0.5 * I * lowered).norm() < 1e-6);
        for (int b = 0; b < 3; ++b) CHECK((gd.ddG[a][b] - gd.ddG[b][a]).norm() < 1e-8);
    }

    // first derivatives against central differences of the catalog gauge,
    // lifted so that it is +Id at the pole
    const auto& Gc = s3.gauges.at({"vplus", "vminus"});
    CHECK((Gc.G(Vec3::Zero()) + Id).norm() < 1e-12);
    auto Ghat = [&](const Vec3& x) -> Mat2c { return -Gc.G(x); };
    auto pole = gauge_derivatives(*s3.chart, vm, vp, Vec3::Zero());
    for (int a = 0; a < 3; ++a) {
        Vec3 o = Vec3::Zero();
        Mat2c fd = fd::d1(Ghat, o, a, 1e-3);
        CHECK((fd - pole.dG[a]).norm() < 1e-5);
    }

    // Id part of the second derivatives against the gauge to the Levi-Civita framing
    Frame lcp = lc_frame_at(s3, vp, y);
    auto gp = gauge_derivatives(*s3.chart, vp, lcp, y);
    auto Gl = [&](const Vec3& x) -> Mat2c { return gauge_between(*s3.chart, vp, lcp, x, Id); };
    CHECK((Gl(y) - Id).norm() < 1e-8);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            const double hh = 2e-3;
            Vec3 pp = y, pm = y, mp = y, mm = y;
            pp[a] += hh, pp[b] += hh;
            pm[a] += hh, pm[b] -= hh;
            mp[a] -= hh, mp[b] += hh;
            mm[a] -= hh, mm[b] -= hh;
            Mat2c fd2 = (Gl(pp) - Gl(pm) - Gl(mp) + Gl(mm)) / (4 * hh * hh);
            cplx id_fd = 0.5 * fd2.trace(), id_formula = 0.5 * gp.ddG[a][b].trace();
            CHECK(std::abs(id_fd - id_formula) < 1e-4);
        }
}

TEST_CASE("invariant small-time symbols: special cases") {
    const auto& t3 = builtin("t3_flat");
    Vec3 eta(0.6, -0.2, 0.9);
    for (int sg : {1, -1}) {
        auto r = smalltime_invariant(*t3.chart, t3.framing("rotated"), Vec3(0.2, 0.1, 0.0), eta, sg);
        for (const auto& c : r.deg_1.coeffs) CHECK(c.norm() < 1e-10);
        CHECK(r.deg0.coeffs[1].norm() < 1e-10);
        CHECK(r.deg0.coeffs[2].norm() < 1e-10);
    }

    // S2xS1 at the base point of its Levi-Civita framing, normal coordinates
    const auto& sx = builtin("s2xs1");
    Pauli3 sig = pauli_project(sx.framing("lc0"), Vec3::Zero());
    for (int sg : {1, -1}) {
        auto r = smalltime_invariant(*sx.chart, sx.framing("lc0"), Vec3::Zero(), eta, sg);
        double h = eta.norm();
        Mat2c expect = -(I / (24 * h * h)) * (sg * h * Id + 4.0 * sigma_dot(sig, eta) - 3.0 * eta[2] * sig[2]);
        CHECK(r.deg_1.coeffs[0].norm() < 1e-8);
        CHECK((r.deg_1.coeffs[1] - expect).norm() < 1e-6);
        auto ep = eigenpairs_projections(*sx.chart, sx.framing("lc0"), Vec3::Zero(), eta);
        CHECK((r.deg0.coeffs[0] - ep.P(sg)).norm() < 1e-12);
        CHECK(r.deg0.coeffs[1].norm() < 1e-6);
    }

    // S3 V+ at the pole
    const auto& s3 = builtin("s3");
    Pauli3 s = pauli_project(s3.framing("vplus"), Vec3::Zero());
    for (int sg : {1, -1}) {
        auto r = smalltime_invariant(*s3.chart, s3.framing("vplus"), Vec3::Zero(), eta, sg);
        double h = eta.norm();
        auto ep = eigenpairs_projections(*s3.chart, s3.framing("vplus"), Vec3::Zero(), eta);
        CHECK((r.deg_1.coeffs[0] - sg / (2 * h) * Id).norm() < 1e-8);
        const double sd = sg;
        Mat2c t1 = -sd * (0.75 * I / h) * ep.P(sg) + sd * (0.25 * I / h) * ep.P(-sg);
        CHECK((r.deg_1.coeffs[1] - t1).norm() < 1e-6);
        // degree 0, t^1: -+(i/2) h_eta^a *K_ab sigma^b P with *K = -g
        Mat2c d01 = sd * 0.5 * I * sigma_dot(s, Vec3(-eta / h)) * ep.P(sg);
        CHECK((r.deg0.coeffs[1] - d01).norm() < 1e-7);
        CHECK((r.deg0.coeffs[1] + 0.5 * I * ep.P(sg)).norm() < 1e-7);
        CHECK(r.deg0.coeffs[1].norm() > 0.1);
    }
}

TEST_CASE("charge conjugation pairing of the small-time coefficients") {
    const auto& s3 = builtin("s3");
    Vec3 y(0.1, 0.3, -0.2), eta(0.7, -0.4, 0.5);
    for (int sg : {1, -1}) {
        auto a = smalltime_invariant(*s3.chart, s3.framing("vplus"), y, eta, sg);
        auto b = smalltime_invariant(*s3.chart, s3.framing("vplus"), y, Vec3(-eta), sg);
        for (int k = 0; k < 3; ++k) {
            double pm = k % 2 ? -1.0 : 1.0;
            CHECK((b.deg0.coeffs[k] - pm * conj_J(a.deg0.coeffs[k])).norm() < 1e-5);
        }
        for (int k = 0; k < 2; ++k) {
            double pm = k % 2 ? -1.0 : 1.0;
            CHECK((b.deg_1.coeffs[k] - pm * conj_J(a.deg_1.coeffs[k])).norm() < 1e-5);
        }
    }
}

TEST_CASE("time polynomial fit") {
    std::vector<double> ts = {0.05, -0.05, 0.025, -0.025, 0.0125, -0.0125, 0.00625, -0.00625};
    Mat2c c0 = Mat2c::Random(), c1 = Mat2c::Random(), c2 = Mat2c::Random();
    std::vector<Mat2c> vals;
    for (double t : ts) vals.push_back(c0 + t * c1 + t * t * c2);
    auto c = fit_time_polynomial(ts, vals, 3);
    REQUIRE(c.size() == 4);
    CHECK((c[0] - c0).norm() < 1e-10);
    CHECK((c[1] - c1).norm() < 1e-8);
    CHECK((c[2] - c2).norm() < 1e-6);
    CHECK(c[3].norm() < 1e-4);
    CHECK_THROWS_AS(fit_time_polynomial(ts, vals, 7, 1e2), Error);
}

TEST_CASE("reducer stencil on polynomial amplitudes") {
    ReducerStencil red;
    // a = x_0 eta_1 M + x_1^2 eta_2 N
    Mat2c M = Mat2c::Random(), N = Mat2c::Random();
    auto a = [&](const Vec3& x, const Vec3& e) -> Mat2c { return x[0] * e[1] * M + x[1] * x[1] * e[2] * N; };
    Vec3 eta(0.3, 0.8, -0.5), xp(0.1, -0.2, 0.05);
    CHECK((red.s0(a, xp, eta) - a(xp, eta)).norm() < 1e-15);
    // sum_a d^2/dx^a deta_a vanishes here; the hessian term picks up 2 N eta_2 h_{eta_1 eta_1}
    double h = eta.norm();
    double h11 = (h * h - eta[1] * eta[1]) / (h * h * h);
    double t = 0.1;
    Mat2c expect = I * (0.5 * t) * h11 * 2.0 * eta[2] * N;
    CHECK((red.s1(a, xp, eta, t, 1) - expect).norm() < 1e-7);
    // b = x_0 x_1 eta_0 eta_1 K: (1/2)(i d_x d_eta)^2 b = -(1/2) * 2 K at x = 0
    Mat2c K = Mat2c::Random();
    auto b = [&](const Vec3& x, const Vec3& e) -> Mat2c { return x[0] * x[1] * e[0] * e[1] * K; };
    CHECK((red.s2_at_zero(b, eta) + K).norm() < 1e-6);
}

TEST_CASE("g-subprincipal conversion") {
    const auto& s3 = builtin("s3");
    Vec3 y(0.2, -0.1, 0.3), eta(0.5, 0.2, -0.8);
    Mat2c sub = Mat2c::Random();
    PrincipalFunction one = [](const Vec3&, const Vec3&) -> Mat2c { return Mat2c::Identity(); };
    CHECK((gsub_convert(one, sub, *s3.chart, y, eta, 0.0) - sub).norm() < 1e-12);

    // U(0) at the base point of a Levi-Civita framing, in normal coordinates
    const auto& sx = builtin("s2xs1");
    const Frame& lc0 = sx.framing("lc0");
    for (int sg : {1, -1}) {
        PrincipalFunction P = [&](const Vec3& yy, const Vec3& ee) -> Mat2c {
            return eigenpairs_projections(*sx.chart, lc0, yy, ee).P(sg);
        };
        Mat2c u0 = u0_subprincipal(*sx.chart, lc0, Vec3::Zero(), eta, sg);
        CHECK(gsub_convert(P, u0, *sx.chart, Vec3::Zero(), eta, 0.0).norm() < 1e-6);
    }

    // the epsilon term
    const Frame& vp = s3.framing("vplus");
    PrincipalFunction P = [&](const Vec3& yy, const Vec3& ee) -> Mat2c {
        return eigenpairs_projections(*s3.chart, vp, yy, ee).P(1);
    };
    Mat2c d = gsub_convert(P, sub, *s3.chart, y, eta, 1.0) - gsub_convert(P, sub, *s3.chart, y, eta, 0.0);
    Mat3 g = s3.chart->g(y), gi = g.inverse();
    auto hP = [&](const Vec3& e, int b) -> Mat2c {
        double h = std::sqrt(e.dot(gi * e));
        return h * fd::d1([&](const Vec3& z) -> Mat2c { return P(y, z); }, e, b, 1e-4);
    };
    Mat2c term = Mat2c::Zero();
    for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
            term += g(b, c) * fd::d1([&](const Vec3& z) -> Mat2c { return hP(z, b); }, eta, c, 1e-3);
    CHECK((d + 0.5 * term).norm() < 1e-5);
}

TEST_CASE("numeric fit reproduces the invariant formulas") {
    const auto& s3 = builtin("s3");
    Vec3 y(0.1, -0.2, 0.15), eta(0.3, -0.5, 0.8);
    SymbolFitContext ctx(s3.chart, s3.framing("vplus"), y);
    for (int sg : {1, -1}) {
        auto nf = ctx.fit(eta, sg);
        auto inv = smalltime_invariant(*s3.chart, s3.framing("vplus"), y, eta, sg);
        for (int k = 0; k < 3; ++k) CHECK((nf.deg0.coeffs[k] - inv.deg0.coeffs[k]).norm() < 1e-4);
        for (int k = 0; k < 2; ++k) CHECK((nf.deg_1.coeffs[k] - inv.deg_1.coeffs[k]).norm() < 1e-4);
    }

    // Levi-Civita framing of V+ at y: the t^0 coefficient vanishes
    auto lc = levi_civita_frame(s3.chart, s3.framing("vplus"), y);
    lc->build_cache(0.6, 8);
    Frame lcf = lc->as_frame(true);
    auto nf = smalltime_numeric_fit(s3.chart, lcf, y, eta, 1);
    CHECK(nf.deg_1.coeffs[0].norm() < 1e-5);
    auto inv = smalltime_invariant(*s3.chart, lcf, y, eta, 1);
    CHECK((nf.deg_1.coeffs[1] - inv.deg_1.coeffs[1]).norm() < 1e-4);
}

TEST_CASE("numeric fit on S2xS1 matches the Levi-Civita closed form") {
    const auto& sx = builtin("s2xs1");
    Vec3 eta(0.3, -0.5, 0.8);
    Pauli3 sig = pauli_project(sx.framing("lc0"), Vec3::Zero());
    double h = eta.norm();
    SymbolFitContext ctx(sx.chart, sx.framing("lc0"), Vec3::Zero());
    for (int sg : {1, -1}) {
        auto nf = ctx.fit(eta, sg);
        Mat2c expect = -(I / (24 * h * h)) * (sg * h * Id + 4.0 * sigma_dot(sig, eta) - 3.0 * eta[2] * sig[2]);
        CHECK(nf.deg_1.coeffs[0].norm() < 1e-5);
        CHECK((nf.deg_1.coeffs[1] - expect).norm() < 1e-4);
    }
}

TEST_CASE("errors") {
    const auto& s3 = builtin("s3");
    CHECK_THROWS_AS(smalltime_invariant(*s3.chart, s3.framing("vplus"), Vec3::Zero(), Vec3::Zero(), 1), Error);
    PrincipalFunction bad = [](const Vec3&, const Vec3&) -> Mat2c {
        Mat2c m = Mat2c::Zero();
        m(0, 0) = std::nan("");
        return m;
    };
    CHECK_THROWS_AS(gsub_convert(bad, Mat2c::Zero(), *s3.chart, Vec3::Zero(), Vec3(1, 0, 0), 0.0), Error);
}
