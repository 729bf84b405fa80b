#include "spinflow/catalog.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

namespace spinflow {

namespace {

constexpr double pi = std::numbers::pi;

// --- unit S^3, stereographic chart ---

Chart s3_chart() {
    Chart c;
    c.id = "s3";
    c.metric = [](const Vec3& x) -> Mat3 {
        double f2 = x.squaredNorm() / 4;
        return Mat3::Identity() / ((1 + f2) * (1 + f2));
    };
    c.dmetric = [](const Vec3& x) {
        double f2 = x.squaredNorm() / 4;
        double p3 = std::pow(1 + f2, -3);
        Tensor3 d;
        for (int k = 0; k < 3; ++k) d[k] = -x[k] * p3 * Mat3::Identity();
        return d;
    };
    c.ddmetric = [](const Vec3& x) {
        double f2 = x.squaredNorm() / 4;
        double p3 = std::pow(1 + f2, -3), p4 = std::pow(1 + f2, -4);
        Tensor4 d;
        for (int l = 0; l < 3; ++l)
            for (int k = 0; k < 3; ++k)
                d[l][k] = ((l == k ? -p3 : 0.0) + 1.5 * x[k] * x[l] * p4) * Mat3::Identity();
        return d;
    };
    c.contains = [](const Vec3& x) { return x.norm() <= 1e3; };
    c.injectivity_hint = 1.0;
    c.loop_bound = 2 * pi;
    return c;
}

Mat3 s3_frame(const Vec3& x, double sg) {
    double u = x[0], v = x[1], w = x[2];
    double f2 = x.squaredNorm() / 4;
    Mat3 e;
    e << 2 - 2 * f2 + u * u, u * v - sg * 2 * w, u * w + sg * 2 * v,
        u * v + sg * 2 * w, 2 - 2 * f2 + v * v, v * w - sg * 2 * u,
        u * w - sg * 2 * v, v * w + sg * 2 * u, 2 - 2 * f2 + w * w;
    return 0.5 * e;
}

Tensor3 s3_frame_derivative(const Vec3& x, double sg) {
    double u = x[0], v = x[1], w = x[2];
    Tensor3 d;
    // d/du
    d[0] << u, v, w,
        v, -u, -sg * 2,
        w, sg * 2, -u;
    // d/dv
    d[1] << -v, u, sg * 2,
        u, v, w,
        -sg * 2, w, -v;
    // d/dw
    d[2] << -w, -sg * 2, u,
        sg * 2, -w, v,
        u, v, w;
    for (int b = 0; b < 3; ++b) d[b] *= 0.5;
    return d;
}

}  // namespace

Mat2c s3_gauge_literal(const Vec3& x) {
    double u = x[0], v = x[1], w = x[2];
    double f2 = x.squaredNorm() / 4;
    Mat2c G;
    G << u * u + v * v + (w - 2.0 * I) * (w - 2.0 * I), 4.0 * (v - I * u),
        -4.0 * (v + I * u), u * u + v * v + (w + 2.0 * I) * (w + 2.0 * I);
    return G / (4 * (1 + f2));
}

namespace {

// the literal matrix relates V+ to V- only after complex conjugation
Mat2c s3_gauge(const Vec3& x) { return s3_gauge_literal(x).conjugate(); }

std::vector<SpectrumLevel> s3_levels(double lambda_max) {
    std::vector<SpectrumLevel> out;
    for (long k = 1; k + 0.5 <= lambda_max; ++k) {
        out.push_back({-(k + 0.5), k * (k + 1)});
        out.push_back({k + 0.5, k * (k + 1)});
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
    return out;
}

CatalogEntry make_s3() {
    CatalogEntry e;
    e.id = "s3";
    e.description = "unit round 3-sphere, stereographic chart from the south pole";
    e.chart = std::make_shared<Chart>(s3_chart());
    for (double sg : {1.0, -1.0}) {
        Frame f;
        f.id = sg > 0 ? "vplus" : "vminus";
        f.chart_id = "s3";
        f.e = [sg](const Vec3& x) { return s3_frame(x, sg); };
        f.de = [sg](const Vec3& x) { return s3_frame_derivative(x, sg); };
        e.framings[f.id] = f;
    }
    e.default_framing = "vplus";
    e.gauges[{"vplus", "vminus"}] = GaugeTransform{"s3", s3_gauge};
    e.spectrum = SpectrumModel{"+-(k+1/2), multiplicity k(k+1), k>=1", s3_levels};
    e.injectivity_hint = e.chart->injectivity_hint;
    e.T0 = 2 * pi;
    e.volume = 2 * pi * pi;
    e.caustic_t = pi / 2;
    return e;
}

// --- S^2 x S^1 in normal coordinates at a point ---

// g = Id + Q(s) (s Id - x x^T) on the first n coordinates, s = |x|^2 there
Mat3 round_normal_metric(const Vec3& x, int n) {
    double s = 0;
    for (int a = 0; a < n; ++a) s += x[a] * x[a];
    QJet q = s2xs1_q(s);
    Mat3 g = Mat3::Identity();
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) += q.q * ((a == b ? s : 0.0) - x[a] * x[b]);
    return g;
}

Tensor3 round_normal_dmetric(const Vec3& x, int n) {
    double s = 0;
    for (int a = 0; a < n; ++a) s += x[a] * x[a];
    QJet q = s2xs1_q(s);
    Tensor3 d;
    for (int c = 0; c < n; ++c)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double A = (a == b ? s : 0.0) - x[a] * x[b];
                double dA = (a == b ? 2 * x[c] : 0.0) - (a == c ? x[b] : 0.0) - (b == c ? x[a] : 0.0);
                d[c](a, b) = 2 * x[c] * q.dq * A + q.q * dA;
            }
    return d;
}

Tensor4 round_normal_ddmetric(const Vec3& x, int n) {
    double s = 0;
    for (int a = 0; a < n; ++a) s += x[a] * x[a];
    QJet q = s2xs1_q(s);
    Tensor4 dd;
    auto dA = [&](int c, int a, int b) {
        return (a == b ? 2 * x[c] : 0.0) - (a == c ? x[b] : 0.0) - (b == c ? x[a] : 0.0);
    };
    for (int dI = 0; dI < n; ++dI)
        for (int c = 0; c < n; ++c)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double A = (a == b ? s : 0.0) - x[a] * x[b];
                    double ddA = (c == dI && a == b ? 2.0 : 0.0) - (a == c && b == dI ? 1.0 : 0.0) -
                                 (a == dI && b == c ? 1.0 : 0.0);
                    dd[dI][c](a, b) = (c == dI ? 2 * q.dq * A : 0.0) + 4 * x[c] * x[dI] * q.ddq * A +
                                      2 * x[c] * q.dq * dA(dI, a, b) + 2 * x[dI] * q.dq * dA(c, a, b) +
                                      q.q * ddA;
                }
    return dd;
}

// (r / sin r - 1) / r^2
double s2xs1_frame_factor(double s) {
    if (s < 1e-2) {
        static const double c[] = {1.0 / 6, 7.0 / 360, 31.0 / 15120, 127.0 / 604800, 73.0 / 3421440,
                                   1414477.0 / 653837184000.0};
        double r = 0, p = 1;
        for (double ci : c) {
            r += ci * p;
            p *= s;
        }
        return r;
    }
    double r = std::sqrt(s);
    return (r / std::sin(r) - 1) / s;
}

Mat3 s2xs1_lc0(const Vec3& x) {
    double s = x[0] * x[0] + x[1] * x[1];
    double R = s2xs1_frame_factor(s);
    Mat3 e = Mat3::Identity();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) e(a, b) += R * ((a == b ? s : 0.0) - x[a] * x[b]);
    return e;
}

CatalogEntry make_s2xs1() {
    CatalogEntry e;
    e.id = "s2xs1";
    e.description = "round S^2 x S^1 (circle of length 2 pi), normal coordinates at a point";
    auto c = std::make_shared<Chart>();
    c->id = "s2xs1";
    c->metric = [](const Vec3& x) { return round_normal_metric(x, 2); };
    c->dmetric = [](const Vec3& x) { return round_normal_dmetric(x, 2); };
    c->ddmetric = [](const Vec3& x) { return round_normal_ddmetric(x, 2); };
    c->contains = [](const Vec3& x) {
        return x[0] * x[0] + x[1] * x[1] < std::pow(0.95 * pi, 2) && std::abs(x[2]) < pi;
    };
    c->injectivity_hint = 1.0;
    c->loop_bound = 2 * pi;
    e.chart = c;
    Frame f;
    f.id = "lc0";
    f.chart_id = "s2xs1";
    f.e = s2xs1_lc0;
    e.framings["lc0"] = f;
    e.default_framing = "lc0";
    e.injectivity_hint = 1.0;
    e.T0 = 2 * pi;
    e.volume = 8 * pi * pi;
    e.caustic_t = pi / 2;
    return e;
}

// --- flat 3-torus, box of side 2 pi ---

CatalogEntry make_t3() {
    CatalogEntry e;
    e.id = "t3_flat";
    e.description = "flat 3-torus, periodic box of side 2 pi";
    auto c = std::make_shared<Chart>();
    c->id = "t3_flat";
    c->metric = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
    c->dmetric = [](const Vec3&) { return Tensor3{}; };
    c->ddmetric = [](const Vec3&) { return Tensor4{}; };
    c->injectivity_hint = 1.0;
    c->loop_bound = 2 * pi;
    e.chart = c;
    Frame id;
    id.id = "identity";
    id.chart_id = "t3_flat";
    id.e = [](const Vec3&) -> Mat3 { return Mat3::Identity(); };
    id.de = [](const Vec3&) { return Tensor3{}; };
    e.framings["identity"] = id;
    Frame rot = id;
    rot.id = "rotated";
    Mat3 R = (Eigen::AngleAxisd(0.7, Vec3(1, 2, 2).normalized())).toRotationMatrix();
    rot.e = [R](const Vec3&) -> Mat3 { return R; };
    e.framings["rotated"] = rot;
    e.default_framing = "identity";
    e.injectivity_hint = 1.0;
    e.T0 = 2 * pi;
    e.volume = 8 * pi * pi * pi;
    e.caustic_t = 1e3;
    return e;
}

}  // namespace

QJet s2xs1_q(double s) {
    QJet j{0, 0, 0};
    if (s < 1.0) {
        // Q = sum_{m>=1} (-1)^m 2^{2m+1} s^{m-1} / (2m+2)!
        double fact = 24.0;  // (2m+2)! at m=1
        double pw = 8.0;     // 2^{2m+1}
        for (int m = 1; m <= 30; ++m) {
            double c = (m % 2 ? -1.0 : 1.0) * pw / fact;
            j.q += c * std::pow(s, m - 1);
            if (m >= 2) j.dq += c * (m - 1) * std::pow(s, m - 2);
            if (m >= 3) j.ddq += c * (m - 1) * (m - 2) * std::pow(s, m - 3);
            pw *= 4;
            fact *= (2.0 * m + 3) * (2.0 * m + 4);
        }
        return j;
    }
    double r = std::sqrt(s);
    double sn = std::sin(r), s2r = std::sin(2 * r), c2r = std::cos(2 * r);
    double S = sn * sn / s;
    double dS = s2r / (2 * r * s) - sn * sn / (s * s);
    double dSdr = c2r / (r * s) - 2.5 * s2r / (s * s) + 4 * sn * sn / (s * s * r);
    double ddS = dSdr / (2 * r);
    j.q = (S - 1) / s;
    j.dq = (dS - j.q) / s;
    j.ddq = (ddS - 2 * j.dq) / s;
    return j;
}

Chart s3_normal_chart() {
    Chart c;
    c.id = "s3_normal";
    c.metric = [](const Vec3& x) { return round_normal_metric(x, 3); };
    c.dmetric = [](const Vec3& x) { return round_normal_dmetric(x, 3); };
    c.ddmetric = [](const Vec3& x) { return round_normal_ddmetric(x, 3); };
    c.contains = [](const Vec3& x) { return x.norm() < 0.95 * pi; };
    c.injectivity_hint = 1.0;
    c.loop_bound = 2 * pi;
    return c;
}

const Frame& CatalogEntry::framing(const std::string& name) const {
    auto it = framings.find(name.empty() ? default_framing : name);
    if (it == framings.end()) throw Error(ErrorKind::UnknownId, "no framing '" + name + "' on " + id);
    return it->second;
}

const CatalogEntry& builtin(const std::string& id) {
    static const std::map<std::string, CatalogEntry> all = [] {
        std::map<std::string, CatalogEntry> m;
        m["s3"] = make_s3();
        m["s2xs1"] = make_s2xs1();
        m["t3_flat"] = make_t3();
        return m;
    }();
    auto it = all.find(id);
    if (it == all.end()) throw Error(ErrorKind::UnknownId, "unknown manifold '" + id + "'");
    return it->second;
}

std::vector<std::string> builtin_ids() { return {"s2xs1", "s3", "t3_flat"}; }

std::string catalog_manifest_json() {
    nlohmann::ordered_json j;
    j["schema"] = "spinflow.catalog/1";
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& id : builtin_ids()) {
        const auto& e = builtin(id);
        nlohmann::ordered_json o;
        o["id"] = e.id;
        o["description"] = e.description;
        std::vector<std::string> fr;
        for (const auto& [k, v] : e.framings) fr.push_back(k);
        o["framings"] = fr;
        o["default_framing"] = e.default_framing;
        std::vector<std::string> ga;
        for (const auto& [k, v] : e.gauges) ga.push_back(k.first + "->" + k.second);
        o["gauges"] = ga;
        o["spectrum"] = e.spectrum ? nlohmann::ordered_json(e.spectrum->description) : nlohmann::ordered_json();
        o["injectivity_hint"] = e.injectivity_hint;
        o["T0"] = e.T0;
        o["volume"] = e.volume;
        o["caustic_t"] = e.caustic_t;
        j["entries"].push_back(o);
    }
    return j.dump(2);
}

}  // namespace spinflow
