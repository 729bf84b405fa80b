#include <doctest.h>

#include "spinflow/catalog.hpp"
#include "spinflow/weitzenbock.hpp"
#include "test_util.hpp"

using namespace spinflow;

TEST_CASE("constant frame on flat space has no torsion") {
    const auto& t3 = builtin("t3_flat");
    auto p = torsion_pack(*t3.chart, t3.framing("rotated"), Vec3(0.3, 0.2, 0.1));
    CHECK(p.Upsilon.max_abs() == 0.0);
    CHECK(p.T.max_abs() == 0.0);
    CHECK(p.K.max_abs() == 0.0);
}

TEST_CASE("S3 framings are Einstein: *K = -+ g") {
    const auto& s3 = builtin("s3");
    for (const auto& x : testutil::ball_points(30, 2.0, 12)) {
        Mat3 g = s3.chart->g(x);
        auto pp = torsion_pack(*s3.chart, s3.framing("vplus"), x);
        auto pm = torsion_pack(*s3.chart, s3.framing("vminus"), x);
        CHECK((pp.starK + g).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((pm.starK - g).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((pp.starT - 2 * g).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((pm.starT + 2 * g).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("hand computation at the S3 pole") {
    // d_b e_j^a = eps_{j b a} for V+, so Upsilon_{abc} = eps_{abc}, T = 2 eps, K = eps
    const auto& s3 = builtin("s3");
    auto p = torsion_pack(*s3.chart, s3.framing("vplus"), Vec3::Zero());
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) {
                CHECK(std::abs(p.Upsilon(a, b, c) - levi_civita_symbol(a, b, c)) < 1e-14);
                CHECK(std::abs(p.T(a, b, c) - 2 * levi_civita_symbol(a, b, c)) < 1e-14);
                CHECK(std::abs(p.K(a, b, c) - levi_civita_symbol(a, b, c)) < 1e-14);
            }
}

TEST_CASE("Weitzenbock coefficients split into Christoffel plus contorsion") {
    for (const char* id : {"s3", "s2xs1"}) {
        const auto& e = builtin(id);
        for (const auto& [name, f] : e.framings)
            for (const auto& x : testutil::ball_points(10, 0.8, 21)) {
                auto p = torsion_pack(*e.chart, f, x);
                Tensor3 G = christoffel(*e.chart, x);
                CHECK((p.Upsilon - G - p.K).max_abs() < 1e-8);
                Mat3 g = p.g;
                for (int a = 0; a < 3; ++a) CHECK((p.T[a] + p.T[a].transpose()).cwiseAbs().maxCoeff() < 1e-14);
                // K_{abc} = -K_{cba} after lowering the first index
                double anti = 0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c) {
                            double kabc = 0, kcba = 0;
                            for (int l = 0; l < 3; ++l) {
                                kabc += g(a, l) * p.K(l, b, c);
                                kcba += g(c, l) * p.K(l, b, a);
                            }
                            anti = std::max(anti, std::abs(kabc + kcba));
                        }
                CHECK(anti < 1e-12);
                CHECK((p.starK - starK_from_starT(p.starT, g)).cwiseAbs().maxCoeff() < 1e-9);
                CHECK((p.starT - starT_from_starK(p.starK, g)).cwiseAbs().maxCoeff() < 1e-9);
            }
    }
}

TEST_CASE("star identities round trip") {
    for (const char* id : {"s3", "s2xs1", "t3_flat"}) {
        const auto& e = builtin(id);
        const Frame& f = e.framing("");
        for (const auto& x : testutil::ball_points(100, 0.8, 31)) {
            auto p = torsion_pack(*e.chart, f, x);
            Mat3 back = starT_from_starK(starK_from_starT(p.starT, p.g), p.g);
            CHECK((back - p.starT).cwiseAbs().maxCoeff() < 1e-12);
            Mat3 back2 = starK_from_starT(starT_from_starK(p.starK, p.g), p.g);
            CHECK((back2 - p.starK).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("Weitzenbock connection is metric compatible and annihilates the frame") {
    for (const char* id : {"s3", "s2xs1"}) {
        const auto& e = builtin(id);
        for (const auto& [name, f] : e.framings)
            for (const auto& x : testutil::ball_points(10, 0.8, 41)) {
                CHECK(weitzenbock_metric_residual(*e.chart, f, x) < 1e-8);
                CHECK(weitzenbock_frame_residual(*e.chart, f, x) < 1e-8);
            }
    }
}

TEST_CASE("Levi-Civita framing is torsion free at its base point") {
    const auto& s3 = builtin("s3");
    Vec3 y(0.3, -0.4, 0.2);
    auto lc = levi_civita_frame(s3.chart, s3.framing("vplus"), y);
    auto p = torsion_pack(*s3.chart, lc->as_frame(false), y);
    CHECK(p.T.max_abs() < 1e-6);
    CHECK(p.K.max_abs() < 1e-6);
    // the S2xS1 catalog framing is Levi-Civita at the chart origin
    const auto& sx = builtin("s2xs1");
    auto q = torsion_pack(*sx.chart, sx.framing("lc0"), Vec3::Zero());
    CHECK(q.T.max_abs() < 1e-9);
}

TEST_CASE("S3 Einstein framing has parallel *K") {
    const auto& s3 = builtin("s3");
    Tensor3 d = star_K_covariant_derivative(*s3.chart, s3.framing("vplus"), Vec3(0.3, 0.1, -0.2));
    CHECK(d.max_abs() < 1e-8);
}
