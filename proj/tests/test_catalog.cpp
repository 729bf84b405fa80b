#include <doctest.h>

#include <json.hpp>

#include "spinflow/catalog.hpp"
#include "spinflow/weitzenbock.hpp"
#include "test_util.hpp"

using namespace spinflow;

TEST_CASE("S3 metric at the pole is Euclidean") {
    CHECK((builtin("s3").chart->g(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("S3 spectrum") {
    auto lv = builtin("s3").spectrum->levels(2.6);
    REQUIRE(lv.size() == 4);
    CHECK(lv[0].lambda == -2.5);
    CHECK(lv[0].multiplicity == 6);
    CHECK(lv[1].lambda == -1.5);
    CHECK(lv[1].multiplicity == 2);
    CHECK(lv[2].lambda == 1.5);
    CHECK(lv[2].multiplicity == 2);
    CHECK(lv[3].lambda == 2.5);
    CHECK(lv[3].multiplicity == 6);
}

TEST_CASE("flat torus curvature vanishes") {
    const auto& t3 = builtin("t3_flat");
    for (const auto& x : testutil::ball_points(10, 3.0, 1)) CHECK(curvature_pack(*t3.chart, x).Riemann.max_abs() == 0.0);
}

TEST_CASE("unknown ids") {
    CHECK_THROWS_AS(builtin("s4"), Error);
    try {
        builtin("s4");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownId);
    }
    CHECK_THROWS_AS(builtin("s3").framing("nope"), Error);
}

TEST_CASE("entries pass their invariant suites on load") {
    for (const auto& id : builtin_ids()) {
        const auto& e = builtin(id);
        auto pts = testutil::ball_points(100, 0.9, 77);
        for (const auto& [name, f] : e.framings) {
            auto rep = frame_checks(*e.chart, f, pts, id == "s3");
            CHECK(rep.max_orthonormality < 1e-9);
            CHECK(rep.all_positive);
            if (id == "s3") CHECK(rep.max_killing < 1e-7);
        }
        for (const auto& x : pts) {
            auto cp = curvature_pack(*e.chart, x);
            if (id == "s3") CHECK(std::abs(cp.scalar - 6) < 1e-6);
            if (id == "s2xs1") CHECK(std::abs(cp.scalar - 2) < 1e-6);
        }
    }
}

TEST_CASE("manifest lists the entries") {
    auto j = nlohmann::json::parse(catalog_manifest_json());
    REQUIRE(j["entries"].size() == 3);
    CHECK(j["entries"][1]["id"] == "s3");
    CHECK(j["entries"][1]["volume"].get<double>() == doctest::Approx(2 * M_PI * M_PI));
}
