#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

namespace {

constexpr double pi = std::numbers::pi;

struct Run {
    int code = -1;
    std::string out;
};

// runs the CLI through the shell; stderr goes to out when merge is set
Run run(const std::string& args, bool merge = false, const std::string& env = "") {
    std::string cmd = env + " " + SPINFLOW_CLI_PATH + std::string(" ") + args + (merge ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string value_of(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
    return "";
}

// data rows of a CSV artifact, without the provenance line and the header
std::vector<std::vector<double>> rows(const std::string& csv) {
    std::vector<std::vector<double>> out;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<double> r;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) r.push_back(std::stod(cell));
        out.push_back(r);
    }
    return out;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / fmt::format("spinflow_test_{}_{}", getpid(), name);
}

}  // namespace

TEST_CASE("weyl prints the S3 coefficients") {
    auto r = run("weyl --manifold s3");
    REQUIRE(r.code == 0);
    CHECK(std::abs(std::stod(value_of(r.out, "c2")) - 1 / (2 * pi * pi)) < 1e-6);
    CHECK(value_of(r.out, "c1") == "0");
    CHECK(std::abs(std::stod(value_of(r.out, "c0")) + 1 / (8 * pi * pi)) < 1e-6);
    CHECK(r.out.rfind("# provenance ", 0) == 0);
    auto prov = nlohmann::json::parse(r.out.substr(13, r.out.find('\n') - 13));
    CHECK(prov["catalog_id"] == "s3");
    CHECK(prov["seed"] == 12345);
    CHECK(prov.contains("tolerances"));
    CHECK(prov.contains("version"));
}

TEST_CASE("invalid configurations exit with 2") {
    CHECK(run("weyl --manifold nope").code == 2);
    CHECK(run("weyl").code == 2);
    CHECK(run("nonsense").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("flow --manifold s3 --momentum 0,0,0").code == 2);
    CHECK(run("flow --manifold s3 --momentum 1,0").code == 2);
    CHECK(run("flow --manifold s3 --momentum 0,0,1 --sign x").code == 2);
    CHECK(run("flow --manifold s3 --momentum 0,0,1 --t-grid 0:1:-0.1").code == 2);
    CHECK(run("symbol --manifold s3 --momentum 0,0,1 --order -1 --route transport").code == 2);
    CHECK(run("symbol --manifold s3 --framing nope --momentum 0,0,1").code == 2);
    CHECK(run("spectrum verify --manifold s2xs1").code == 2);
    CHECK(run("spectrum verify --manifold s3 --tolerance -1").code == 2);
    CHECK(run("verify all --manifold t3_flat --samples 0").code == 2);
    CHECK(run("weyl --manifold s3", false, "SPINFLOW_THREADS=abc").code == 0);  // weyl does not use the pool
    CHECK(run("verify all --manifold t3_flat", false, "SPINFLOW_THREADS=abc").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("flow CSV follows the S3 closed form and is deterministic") {
    const std::string args = "flow --manifold s3 --momentum=0.3,-0.5,0.8 --sign - --t-grid 0:1.2:0.2";
    auto a = run(args), b = run(args);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("t,x1,x2,x3,xi1,xi2,xi3,h_drift\n") != std::string::npos);
    auto rs = rows(a.out);
    REQUIRE(rs.size() == 7);
    const double eta[3] = {0.3, -0.5, 0.8};
    const double h = std::sqrt(0.98);
    for (const auto& r : rs) {
        const double t = r[0];
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(r[1 + i] + 2 * std::tan(t / 2) * eta[i] / h) < 1e-7);
            CHECK(std::abs(r[4 + i] - std::pow(std::cos(t / 2), 2) * eta[i]) < 1e-7);
        }
        CHECK(r[7] < 1e-9);
    }
    // 17 significant digits
    CHECK(a.out.find("0.20000000000000001") != std::string::npos);
}

TEST_CASE("transport CSV gives the pole phase") {
    auto r = run("transport --manifold s3 --framing vplus --momentum=0,0,1 --t 0.6");
    REQUIRE(r.code == 0);
    auto rs = rows(r.out);
    REQUIRE(rs.size() == 1);
    CHECK(std::abs(rs[0][7] - std::cos(0.3)) < 1e-7);
    CHECK(std::abs(rs[0][8] + std::sin(0.3)) < 1e-7);
    CHECK(r.out.find("\"framing\":\"vplus\"") != std::string::npos);
}

TEST_CASE("symbol JSON") {
    auto r = run("symbol --manifold s3 --momentum=0,0,1 --order -1 --sign +");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["route"] == "invariant");
    CHECK(j["order"] == -1);
    REQUIRE(j["coefficients"].size() == 2);
    // t^0 coefficient Id / (2h) at the pole
    CHECK(std::abs(j["coefficients"][0]["re"][0][0].get<double>() - 0.5) < 1e-8);
    CHECK(std::abs(j["coefficients"][0]["re"][1][1].get<double>() - 0.5) < 1e-8);

    auto q = nlohmann::json::parse(run("symbol --manifold s3 --momentum=0.2,0.1,0.9 --t 0.3 --route q").out);
    auto tr = nlohmann::json::parse(run("symbol --manifold s3 --momentum=0.2,0.1,0.9 --t 0.3").out);
    CHECK(tr["route"] == "transport");
    for (const char* part : {"re", "im"})
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k)
                CHECK(std::abs(q["value"][part][i][k].get<double>() - tr["value"][part][i][k].get<double>()) < 1e-5);

    auto nf = run("symbol --manifold t3_flat --framing rotated --momentum=0.4,-0.2,0.7 --order 0 --route numeric --t 0.01");
    REQUIRE(nf.code == 0);
    CHECK(nlohmann::json::parse(nf.out)["coefficients"].size() == 3);
}

TEST_CASE("spectrum verify") {
    auto r = run("spectrum verify --manifold s3 --lambda 10:40:10");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("lambda,mollified,c2_term,c1_term,c0_term,residual\n") != std::string::npos);
    auto rs = rows(r.out);
    REQUIRE(rs.size() == 4);
    for (const auto& row : rs) CHECK(std::abs(row[5]) < 1e-3);
    CHECK(rs[3][0] == 40.0);

    // an unreachable tolerance names the first failing row and exits 1
    auto f = run("spectrum verify --manifold s3 --lambda 10:40:10 --tolerance 1e-12", true);
    CHECK(f.code == 1);
    CHECK(f.out.find("assertion failed: spectrum.residual[lambda=10]") != std::string::npos);
}

TEST_CASE("config file, output file and catalog list") {
    auto cfg = temp_file("cfg.json");
    {
        std::ofstream o(cfg);
        o << R"({"schema_version": 1, "command": "flow", "manifold": "s3", "momentum": [0.3, -0.5, 0.8],
                 "sign": "-", "t_grid": "0:1.2:0.2"})";
    }
    auto viaconfig = run("--config " + cfg.string());
    REQUIRE(viaconfig.code == 0);
    CHECK(viaconfig.out == run("flow --manifold s3 --momentum=0.3,-0.5,0.8 --sign - --t-grid 0:1.2:0.2").out);
    // flags given after the config win
    CHECK(run("--config " + cfg.string() + " --t 0.5").out == run("flow --manifold s3 --momentum=0.3,-0.5,0.8 --sign - --t 0.5").out);
    {
        std::ofstream o(cfg);
        o << R"({"command": "flow", "manifold": "s3", "momentm": [1, 0, 0]})";
    }
    CHECK(run("--config " + cfg.string()).code == 2);
    {
        std::ofstream o(cfg);
        o << "{not json";
    }
    CHECK(run("--config " + cfg.string()).code == 2);
    CHECK(run("--config /nonexistent/file.json").code == 2);
    std::filesystem::remove(cfg);

    auto outp = temp_file("weyl.txt");
    auto w = run("weyl --manifold t3_flat --output " + outp.string());
    CHECK(w.code == 0);
    CHECK(w.out.empty());
    std::ifstream in(outp);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(value_of(ss.str(), "c0") == "0");
    std::filesystem::remove(outp);

    auto cat = nlohmann::json::parse(run("catalog list").out);
    CHECK(cat["entries"].size() == 3);
}

TEST_CASE("curvature table") {
    auto r = run("curvature --manifold s3 --point=0.3,-0.2,0.1");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("scalar_curvature  6\n") != std::string::npos);
    auto j = nlohmann::json::parse(run("curvature --manifold s2xs1 --format json").out);
    CHECK(std::abs(j["ricci"][0][0].get<double>() - 1) < 1e-7);
    CHECK(std::abs(j["ricci"][2][2].get<double>()) < 1e-7);
}

TEST_CASE("verify all on the flat torus") {
    auto a = run("verify all --manifold t3_flat --samples 2");
    REQUIRE(a.code == 0);
    auto j = nlohmann::json::parse(a.out);
    CHECK(j["failed"] == 0);
    CHECK(j["first_failure"].is_null());
    CHECK(j["provenance"]["seed"] == 12345);
    for (const auto& c : j["checks"]) {
        CHECK(c["pass"] == true);
        CHECK(!c["anchor"].get<std::string>().empty());
        CHECK(!c["module"].get<std::string>().empty());
    }
    // same seed, same bytes; also with a different thread cap
    CHECK(run("verify all --manifold t3_flat --samples 2", false, "SPINFLOW_THREADS=1").out == a.out);
    auto other = run("verify all --manifold t3_flat --samples 2 --seed 7");
    CHECK(other.code == 0);
    CHECK(other.out != a.out);
}
