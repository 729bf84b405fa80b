#include "spinflow/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "spinflow/catalog.hpp"
#include "spinflow/flow.hpp"
#include "spinflow/spectral.hpp"
#include "spinflow/symbols.hpp"
#include "spinflow/verify.hpp"

namespace spinflow {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

// failed check, reported with exit code 1
struct AssertionFailed {
    std::string check;
    std::string message;
};

struct RunConfig {
    std::string manifold;
    std::string framing;
    std::string point = "0,0,0";
    std::string momentum;
    std::string sign = "+";
    std::optional<double> t;
    std::string t_grid = "0:1.2:0.1";
    std::string lambda = "10:40:10";
    std::string route;
    int order = 0;
    double tolerance = 1e-3;
    double bump_scale = 1.0;
    std::string format = "table";
    std::string output;
    std::uint64_t seed = 12345;
    int samples = 10;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ConfigInvalid, fmt::format("{}: cannot read '{}' as a number", what, item));
        }
    }
    return v;
}

Vec3 parse_vec3(const std::string& s, const char* what) {
    auto v = parse_list(s, what);
    if (v.size() != 3) throw Error(ErrorKind::ConfigInvalid, fmt::format("{} needs 3 comma separated values", what));
    Vec3 x(v[0], v[1], v[2]);
    if (!x.allFinite()) throw Error(ErrorKind::ConfigInvalid, fmt::format("{} is not finite", what));
    return x;
}

// start:stop:step, both ends included
std::vector<double> parse_grid(const std::string& s, const char* what) {
    std::vector<double> p;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) p.push_back(parse_list(item, what).at(0));
    if (p.size() == 1) return p;
    if (p.size() != 3 || !(p[2] != 0.0) || (p[1] - p[0]) * p[2] < 0 || !std::isfinite(p[0] + p[1] + p[2]))
        throw Error(ErrorKind::ConfigInvalid, fmt::format("{} must be start:stop:step with a step towards stop", what));
    const double n = std::floor((p[1] - p[0]) / p[2] + 1e-9);
    if (n > 1e6) throw Error(ErrorKind::ConfigInvalid, fmt::format("{} has too many points", what));
    std::vector<double> out;
    for (long k = 0; k <= static_cast<long>(n); ++k) out.push_back(p[0] + k * p[2]);
    return out;
}

int parse_sign(const std::string& s) {
    if (s == "+" || s == "+1" || s == "1" || s == "plus") return 1;
    if (s == "-" || s == "-1" || s == "minus") return -1;
    throw Error(ErrorKind::ConfigInvalid, fmt::format("sign must be + or -, got '{}'", s));
}

Vec3 momentum_of(const RunConfig& c) {
    if (c.momentum.empty()) throw Error(ErrorKind::ConfigInvalid, "--momentum is required");
    Vec3 eta = parse_vec3(c.momentum, "--momentum");
    if (eta.norm() == 0.0) throw Error(ErrorKind::ConfigInvalid, "momentum must be nonzero");
    return eta;
}

const CatalogEntry& entry_of(const RunConfig& c) {
    if (c.manifold.empty()) throw Error(ErrorKind::ConfigInvalid, "--manifold is required");
    return builtin(c.manifold);
}

std::string framing_of(const RunConfig& c, const CatalogEntry& e) {
    const std::string name = c.framing.empty() ? e.default_framing : c.framing;
    e.framing(name);
    return name;
}

ojson provenance(const std::string& command, const RunConfig& c, const ojson& tolerances) {
    ojson p;
    p["tool"] = "spinflow";
    p["version"] = SPINFLOW_VERSION;
    p["schema_version"] = kSchemaVersion;
    p["command"] = command;
    p["catalog_id"] = c.manifold.empty() ? ojson() : ojson(c.manifold);
    p["seed"] = c.seed;
    p["tolerances"] = tolerances;
    return p;
}

std::string csv_header(const ojson& prov) { return "# provenance " + prov.dump() + "\n"; }

std::string g17(double v) { return fmt::format("{:.17g}", v); }

std::string fixed6(double v) { return v == 0.0 ? std::string("0") : fmt::format("{:.6f}", v); }

ojson ode_tolerances(const Chart& chart) { return ojson{{"ode_abs", chart.ode.abs_tol}, {"ode_rel", chart.ode.rel_tol}}; }

ojson matrix_json(const Mat2c& m) {
    ojson re = ojson::array(), im = ojson::array();
    for (int i = 0; i < 2; ++i) {
        re.push_back({m(i, 0).real(), m(i, 1).real()});
        im.push_back({m(i, 0).imag(), m(i, 1).imag()});
    }
    return ojson{{"re", re}, {"im", im}};
}

ojson vec_json(const Vec3& v) { return ojson::array({v[0], v[1], v[2]}); }

std::string table_matrix(const Mat3& m) {
    std::string s;
    for (int i = 0; i < 3; ++i) s += fmt::format("  {:>14.6g} {:>14.6g} {:>14.6g}\n", m(i, 0), m(i, 1), m(i, 2));
    return s;
}

std::string cmd_curvature(const RunConfig& c) {
    const auto& e = entry_of(c);
    Vec3 x = parse_vec3(c.point, "--point");
    if (!e.chart->inside(x)) throw Error(ErrorKind::ConfigInvalid, "point lies outside the chart");
    auto cp = curvature_pack(*e.chart, x);
    Mat3 g = e.chart->g(x);
    ojson prov = provenance("curvature", c, ojson{{"fd_scale", e.chart->fd_scale}});
    if (c.format == "json") {
        ojson j;
        j["provenance"] = prov;
        j["point"] = vec_json(x);
        auto mat = [](const Mat3& m) {
            ojson a = ojson::array();
            for (int i = 0; i < 3; ++i) a.push_back({m(i, 0), m(i, 1), m(i, 2)});
            return a;
        };
        j["metric"] = mat(g);
        j["ricci"] = mat(cp.Ricci);
        j["scalar_curvature"] = cp.scalar;
        j["density"] = cp.rho;
        return j.dump(2) + "\n";
    }
    if (c.format != "table") throw Error(ErrorKind::ConfigInvalid, "--format must be table or json");
    std::string s = csv_header(prov);
    s += fmt::format("point  {:.6g} {:.6g} {:.6g}\n", x[0], x[1], x[2]);
    s += "metric\n" + table_matrix(g);
    s += "ricci\n" + table_matrix(cp.Ricci);
    s += fmt::format("scalar_curvature  {:.6g}\n", cp.scalar);
    s += fmt::format("density  {:.6g}\n", cp.rho);
    return s;
}

std::vector<double> times_of(const RunConfig& c) {
    if (c.t) return {*c.t};
    return parse_grid(c.t_grid, "--t-grid");
}

std::string cmd_flow(const RunConfig& c) {
    const auto& e = entry_of(c);
    Vec3 y = parse_vec3(c.point, "--point"), eta = momentum_of(c);
    const int sg = parse_sign(c.sign);
    std::string s = csv_header(provenance("flow", c, ode_tolerances(*e.chart)));
    s += "t,x1,x2,x3,xi1,xi2,xi3,h_drift\n";
    for (double t : times_of(c)) {
        auto f = hamiltonian_flow(*e.chart, y, eta, t, sg);
        s += fmt::format("{},{},{},{},{},{},{},{}\n", g17(t), g17(f.x[0]), g17(f.x[1]), g17(f.x[2]), g17(f.xi[0]),
                         g17(f.xi[1]), g17(f.xi[2]), g17(f.h_drift));
    }
    return s;
}

std::string cmd_transport(const RunConfig& c) {
    const auto& e = entry_of(c);
    const std::string fr = framing_of(c, e);
    Vec3 y = parse_vec3(c.point, "--point"), eta = momentum_of(c);
    const int sg = parse_sign(c.sign);
    ojson prov = provenance("transport", c, ode_tolerances(*e.chart));
    prov["framing"] = fr;
    std::string s = csv_header(prov);
    s += "t,x1,x2,x3,xi1,xi2,xi3,zeta1_re,zeta1_im,zeta2_re,zeta2_im\n";
    for (double t : times_of(c)) {
        auto r = spinor_transport(*e.chart, e.framing(fr), y, eta, t, sg);
        const auto& f = r.state;
        s += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", g17(t), g17(f.x[0]), g17(f.x[1]), g17(f.x[2]),
                         g17(f.xi[0]), g17(f.xi[1]), g17(f.xi[2]), g17(r.zeta[0].real()), g17(r.zeta[0].imag()),
                         g17(r.zeta[1].real()), g17(r.zeta[1].imag()));
    }
    return s;
}

std::string cmd_symbol(const RunConfig& c) {
    const auto& e = entry_of(c);
    const std::string fr = framing_of(c, e);
    const Frame& f = e.framing(fr);
    Vec3 y = parse_vec3(c.point, "--point"), eta = momentum_of(c);
    const int sg = parse_sign(c.sign);
    const double t = c.t.value_or(0.0);
    if (c.order != 0 && c.order != -1) throw Error(ErrorKind::ConfigInvalid, "--order must be 0 or -1");
    std::string route = c.route.empty() ? (c.order == 0 ? "transport" : "invariant") : c.route;
    const bool small_time = route == "invariant" || route == "numeric";
    if (!small_time && (c.order != 0 || (route != "transport" && route != "q")))
        throw Error(ErrorKind::ConfigInvalid,
                    fmt::format("route '{}' is not available for order {}", route, c.order));

    ojson tol = ode_tolerances(*e.chart);
    if (route == "numeric") {
        NumericFitOptions o;
        tol["fit_tau_scale"] = o.tau_scale;
        tol["fit_cond_limit"] = o.cond_limit;
    }
    ojson j;
    j["provenance"] = provenance("symbol", c, tol);
    j["provenance"]["framing"] = fr;
    j["order"] = c.order;
    j["route"] = route;
    j["sign"] = sg > 0 ? "+" : "-";
    j["t"] = t;
    j["point"] = vec_json(y);
    j["momentum"] = vec_json(eta);
    if (!small_time) {
        Mat2c a = route == "q" ? principal_via_q(*e.chart, f, y, eta, t, sg).symbol
                               : propagator_principal(*e.chart, f, y, eta, t, sg);
        j["value"] = matrix_json(a);
        return j.dump(2) + "\n";
    }
    SmallTimePair p = route == "invariant" ? smalltime_invariant(*e.chart, f, y, eta, sg)
                                           : smalltime_numeric_fit(e.chart, f, y, eta, sg);
    const SmallTimeSymbol& s = c.order == 0 ? p.deg0 : p.deg_1;
    j["value"] = matrix_json(s.eval(t));
    ojson co = ojson::array();
    for (size_t k = 0; k < s.coeffs.size(); ++k) {
        ojson ck = matrix_json(s.coeffs[k]);
        ck["power"] = k;
        co.push_back(ck);
    }
    j["coefficients"] = co;
    j["remainder_order"] = s.remainder_order;
    return j.dump(2) + "\n";
}

std::string cmd_weyl(const RunConfig& c) {
    const auto& e = entry_of(c);
    Vec3 y = parse_vec3(c.point, "--point");
    auto w = weyl_coefficients(*e.chart, y);
    std::string s = csv_header(provenance("weyl", c, ojson{{"fd_scale", e.chart->fd_scale}}));
    s += fmt::format("c2={}\nc1={}\nc0={}\nscalar_curvature={}\n", fixed6(w.c2), fixed6(w.c1), fixed6(w.c0 + 0.0),
                     fixed6(w.scalar_curvature + 0.0));
    return s;
}

std::string cmd_spectrum_verify(const RunConfig& c, std::optional<AssertionFailed>& failed) {
    const auto& e = entry_of(c);
    if (!e.spectrum) throw Error(ErrorKind::ConfigInvalid, fmt::format("catalog entry '{}' has no spectrum model", e.id));
    if (!(c.tolerance > 0)) throw Error(ErrorKind::ConfigInvalid, "--tolerance must be positive");
    auto lambdas = parse_grid(c.lambda, "--lambda");
    MollifierOptions mo;
    mo.bump_scale = c.bump_scale;
    Mollifier m = build_mollifier(e.T0, mo);
    auto rep = weyl_residual(*e.spectrum, m, e.volume, weyl_coefficients(*e.chart, Vec3::Zero()), lambdas,
                             parse_sign(c.sign), c.tolerance);
    ojson tol{{"residual", c.tolerance}, {"truncation", 1e-8}, {"monotonicity_floor", rep.floor}};
    ojson prov = provenance("spectrum verify", c, tol);
    prov["T0"] = e.T0;
    prov["bump_scale"] = m.bump_scale;
    prov["mollifier_tail_bound"] = m.tail_bound;
    std::string s = csv_header(prov) + rep.csv();
    for (const auto& r : rep.rows)
        if (!(std::abs(r.residual) < c.tolerance)) {
            failed = AssertionFailed{fmt::format("spectrum.residual[lambda={}]", r.lambda),
                                     fmt::format("|residual| = {:.3e} not below {:.3e}", std::abs(r.residual), c.tolerance)};
            return s;
        }
    if (!rep.non_increasing) failed = AssertionFailed{"spectrum.non_increasing", "residuals increase along the grid"};
    return s;
}

std::string cmd_verify_all(const RunConfig& c, std::optional<AssertionFailed>& failed) {
    VerifyOptions vo;
    if (!c.manifold.empty()) vo.manifolds = {c.manifold};
    vo.seed = c.seed;
    vo.samples = c.samples;
    vo.threads = thread_cap();
    auto results = verify_all(vo);

    ojson j;
    ojson prov = provenance("verify all", c, "per check");
    std::vector<std::string> ids = vo.manifolds.empty() ? builtin_ids() : vo.manifolds;
    prov["catalog_id"] = ids;
    prov["samples"] = c.samples;
    j["provenance"] = prov;
    ojson checks = ojson::array();
    int passed = 0;
    for (const auto& r : results) {
        ojson o;
        o["name"] = r.name;
        o["module"] = r.module;
        o["anchor"] = r.anchor;
        o["manifold"] = r.manifold.empty() ? ojson() : ojson(r.manifold);
        o["criterion"] = r.criterion ? ojson(r.criterion) : ojson();
        o["value"] = std::isfinite(r.value) ? ojson(r.value) : ojson(std::isnan(r.value) ? "nan" : "inf");
        o["tolerance"] = r.tolerance;
        o["pass"] = r.pass;
        if (!r.detail.empty()) o["error"] = r.detail;
        checks.push_back(o);
        if (r.pass)
            ++passed;
        else if (!failed)
            failed = AssertionFailed{r.name, r.detail.empty() ? fmt::format("value {:.3e} above tolerance {:.3e}", r.value, r.tolerance)
                                                               : r.detail};
    }
    j["checks"] = checks;
    j["passed"] = passed;
    j["failed"] = static_cast<int>(results.size()) - passed;
    j["first_failure"] = failed ? ojson(failed->check) : ojson();
    return j.dump(2) + "\n";
}

// JSON config -> flags; explicit command line arguments come after and win
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw Error(ErrorKind::ConfigInvalid, "--config needs a path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigInvalid, fmt::format("cannot open config '{}'", path));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const std::exception& ex) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("config '{}' is not valid JSON: {}", path, ex.what()));
    }
    if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "config must be a JSON object");
    static const std::vector<std::string> keys = {"schema_version", "command", "manifold", "framing",  "point",
                                                  "momentum",       "sign",    "t",        "t_grid",   "lambda",
                                                  "route",          "order",   "tolerance", "bump_scale", "format",
                                                  "output",         "seed",    "samples"};
    std::vector<std::string> out;
    const bool has_command = !rest.empty() && rest[0].rfind("-", 0) != 0;
    if (!has_command) {
        if (!j.contains("command") || !j["command"].is_string())
            throw Error(ErrorKind::ConfigInvalid, "config needs a \"command\" string when none is given");
        std::stringstream ss(j["command"].get<std::string>());
        std::string w;
        while (ss >> w) out.push_back(w);
    } else {
        const bool nested = rest.size() > 1 && (rest[0] == "spectrum" || rest[0] == "verify" || rest[0] == "catalog");
        for (size_t i = 0; i < (nested ? 2u : 1u); ++i) out.push_back(rest[i]);
    }
    const size_t taken = out.size() * has_command;
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw Error(ErrorKind::ConfigInvalid, fmt::format("unknown config key '{}'", k));
        if (k == "command") continue;
        if (k == "schema_version") {
            if (v != kSchemaVersion) throw Error(ErrorKind::ConfigInvalid, "unsupported config schema_version");
            continue;
        }
        std::string flag = "--" + k;
        std::replace(flag.begin(), flag.end(), '_', '-');
        std::string val;
        if (v.is_string()) {
            val = v.get<std::string>();
        } else if (v.is_number()) {
            val = v.is_number_float() ? g17(v.get<double>()) : v.dump();
        } else if (v.is_array()) {
            for (size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) throw Error(ErrorKind::ConfigInvalid, fmt::format("config '{}' must hold numbers", k));
                val += (i ? "," : "") + g17(v[i].get<double>());
            }
        } else {
            throw Error(ErrorKind::ConfigInvalid, fmt::format("config '{}' has an unsupported type", k));
        }
        out.push_back(flag + "=" + val);
    }
    for (size_t i = taken; i < rest.size(); ++i) out.push_back(rest[i]);
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"spinflow: Dirac propagator symbols on 3-manifolds", "spinflow"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    auto manifold = [&](CLI::App* s, bool required) {
        auto* o = s->add_option("--manifold", c.manifold, "catalog id");
        if (required) o->required();
    };
    auto common_point = [&](CLI::App* s) {
        s->add_option("--point", c.point, "base point x,y,z (use --point=-1,0,0 for negatives)");
    };
    auto phase_space = [&](CLI::App* s) {
        common_point(s);
        s->add_option("--momentum", c.momentum, "covector eta1,eta2,eta3")->required();
        s->add_option("--sign", c.sign, "+ or -");
    };
    auto output = [&](CLI::App* s) {
        s->add_option("--output", c.output, "write the artifact to this file");
        s->add_option("--seed", c.seed, "seed for randomized sweeps");
    };

    std::function<std::string(std::optional<AssertionFailed>&)> action;

    auto* curv = app.add_subcommand("curvature", "metric, Ricci and scalar curvature at a point");
    manifold(curv, true);
    common_point(curv);
    curv->add_option("--format", c.format, "table or json");
    output(curv);
    curv->callback([&] { action = [&](auto&) { return cmd_curvature(c); }; });

    auto* flow = app.add_subcommand("flow", "Hamiltonian flow samples as CSV");
    manifold(flow, true);
    phase_space(flow);
    flow->add_option("--t", c.t, "single time");
    flow->add_option("--t-grid", c.t_grid, "start:stop:step");
    output(flow);
    flow->callback([&] { action = [&](auto&) { return cmd_flow(c); }; });

    auto* tr = app.add_subcommand("transport", "spin transport of v^+- along the flow as CSV");
    manifold(tr, true);
    tr->add_option("--framing", c.framing, "framing name");
    phase_space(tr);
    tr->add_option("--t", c.t, "single time");
    tr->add_option("--t-grid", c.t_grid, "start:stop:step");
    output(tr);
    tr->callback([&] { action = [&](auto&) { return cmd_transport(c); }; });

    auto* sym = app.add_subcommand("symbol", "propagator symbols as JSON");
    manifold(sym, true);
    sym->add_option("--framing", c.framing, "framing name");
    phase_space(sym);
    sym->add_option("--order", c.order, "0 or -1");
    sym->add_option("--t", c.t, "time");
    sym->add_option("--route", c.route, "transport, q, invariant or numeric");
    output(sym);
    sym->callback([&] { action = [&](auto&) { return cmd_symbol(c); }; });

    auto* weyl = app.add_subcommand("weyl", "local Weyl coefficients");
    manifold(weyl, true);
    common_point(weyl);
    output(weyl);
    weyl->callback([&] { action = [&](auto&) { return cmd_weyl(c); }; });

    auto* spec = app.add_subcommand("spectrum", "spectral checks");
    spec->require_subcommand(1);
    auto* sv = spec->add_subcommand("verify", "mollified counting function against the Weyl polynomial, as CSV");
    manifold(sv, true);
    sv->add_option("--lambda", c.lambda, "start:stop:step");
    sv->add_option("--tolerance", c.tolerance, "residual tolerance");
    sv->add_option("--sign", c.sign, "+ or -");
    sv->add_option("--bump-scale", c.bump_scale, "mollifier transition constant");
    output(sv);
    sv->callback([&] { action = [&](auto& f) { return cmd_spectrum_verify(c, f); }; });

    auto* ver = app.add_subcommand("verify", "verification suites");
    ver->require_subcommand(1);
    auto* va = ver->add_subcommand("all", "every invariant and acceptance check, JSON summary");
    manifold(va, false);
    va->add_option("--samples", c.samples, "random (y, eta) per manifold for the numeric fit comparison");
    output(va);
    va->callback([&] { action = [&](auto& f) { return cmd_verify_all(c, f); }; });

    auto* cat = app.add_subcommand("catalog", "catalog");
    cat->require_subcommand(1);
    auto* cl = cat->add_subcommand("list", "JSON manifest of the built-in entries");
    output(cl);
    cl->callback([&] { action = [&](auto&) { return catalog_manifest_json() + "\n"; }; });

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
        std::optional<AssertionFailed> failed;
        std::string artifact = action(failed);
        if (c.output.empty()) {
            out << artifact;
        } else {
            std::ofstream f(c.output, std::ios::binary);
            if (!f) throw Error(ErrorKind::ConfigInvalid, fmt::format("cannot write '{}'", c.output));
            f << artifact;
        }
        if (failed) {
            err << "assertion failed: " << failed->check << ": " << failed->message << "\n";
            return 1;
        }
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "ConfigInvalid: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return e.kind() == ErrorKind::ConfigInvalid || e.kind() == ErrorKind::UnknownId ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace spinflow
