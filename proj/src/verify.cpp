#include "spinflow/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>

#include "spinflow/catalog.hpp"
#include "spinflow/dirac.hpp"
#include "spinflow/fd.hpp"
#include "spinflow/flow.hpp"
#include "spinflow/spectral.hpp"
#include "spinflow/symbols.hpp"
#include "spinflow/weitzenbock.hpp"

namespace spinflow {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();
const Mat2c Id = Mat2c::Identity();

using Rng = std::mt19937_64;

struct Job {
    std::string name, module, anchor, manifold;
    int criterion = 0;
    double tol = 0.0;
    std::function<double(Rng&)> run;
};

std::vector<Vec3> ball(Rng& rng, int n, double radius) {
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    std::vector<Vec3> out;
    for (int i = 0; i < n; ++i) {
        Vec3 d(nd(rng), nd(rng), nd(rng));
        out.push_back(d.normalized() * radius * std::cbrt(ud(rng)));
    }
    return out;
}

Vec3 unit(Rng& rng) {
    std::normal_distribution<double> nd;
    return Vec3(nd(rng), nd(rng), nd(rng)).normalized();
}

Mat2c random_su2(Rng& rng) {
    std::normal_distribution<double> nd;
    Eigen::Vector4d q(nd(rng), nd(rng), nd(rng), nd(rng));
    q.normalize();
    Mat2c G;
    G << cplx(q[0], q[3]), cplx(q[2], q[1]), cplx(-q[2], q[1]), cplx(q[0], -q[3]);
    return G;
}

Mat2c sigma_dot(const Pauli3& s, const Vec3& v) { return v[0] * s[0] + v[1] * s[1] + v[2] * s[2]; }

Mat2c conj_J(const Mat2c& X) {
    const Mat2c& s2 = pauli()[1];
    return s2 * X.conjugate() * s2;
}

double maxabs(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

void geometry_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"geometry.riemann_symmetries", "geometry", "Riemann antisymmetries, pair symmetry, first Bianchi identity, Ric symmetry", id, 0, 1e-8,
                    [&c](Rng& rng) {
                        double worst = 0;
                        for (const auto& x : ball(rng, 100, 0.8)) {
                            auto cp = curvature_pack(c, x);
                            Mat3 g = c.g(x);
                            auto low = [&](int a, int b, int cc, int d) {
                                double s = 0;
                                for (int k = 0; k < 3; ++k) s += g(a, k) * cp.Riemann(k, b, cc, d);
                                return s;
                            };
                            for (int a = 0; a < 3; ++a)
                                for (int b = 0; b < 3; ++b)
                                    for (int cc = 0; cc < 3; ++cc)
                                        for (int d = 0; d < 3; ++d) {
                                            worst = std::max(worst, std::abs(cp.Riemann(a, b, cc, d) + cp.Riemann(a, b, d, cc)));
                                            worst = std::max(worst, std::abs(low(a, b, cc, d) + low(b, a, cc, d)));
                                            worst = std::max(worst, std::abs(low(a, b, cc, d) - low(cc, d, a, b)));
                                            worst = std::max(worst, std::abs(cp.Riemann(a, b, cc, d) + cp.Riemann(a, cc, d, b) +
                                                                             cp.Riemann(a, d, b, cc)));
                                        }
                            worst = std::max(worst, maxabs(cp.Ricci - cp.Ricci.transpose()));
                        }
                        return worst;
                    }});
    jobs.push_back({"geometry.exp_log_roundtrip", "geometry", "log(y, exp(y, v)) = v within half the injectivity hint", id, 0, 1e-7,
                    [&c, &e](Rng& rng) {
                        double worst = 0;
                        std::normal_distribution<double> nd;
                        for (const auto& y : ball(rng, 10, 0.4)) {
                            Vec3 v(nd(rng), nd(rng), nd(rng));
                            v *= 0.5 * e.injectivity_hint / std::sqrt(v.dot(c.g(y) * v));
                            auto lr = log_map_and_distance(c, y, exp_map(c, y, v, 1.0));
                            worst = std::max(worst, (lr.v - v).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"geometry.geodesic_speed", "geometry", "geodesic speed is constant", id, 0, 1e-9, [&c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 10, 0.4)) {
                            Vec3 v = 0.6 * unit(rng);
                            auto gp = geodesic(c, y, v, 1.0, false);
                            worst = std::max(worst, std::abs(v.dot(c.g(y) * v) - gp.v.dot(c.g(gp.x) * gp.v)));
                        }
                        return worst;
                    }});
    jobs.push_back({"geometry.normal_coordinates", "geometry", "normal coordinates: g(0) = delta, Gamma(0) = 0", id, 0, 1e-8,
                    [&e](Rng& rng) {
                        Vec3 y = ball(rng, 1, 0.4)[0];
                        auto nc = normal_coordinates(e.chart, y);
                        return std::max(maxabs(nc.chart.g(Vec3::Zero()) - Mat3::Identity()),
                                        christoffel(nc.chart, Vec3::Zero()).max_abs());
                    }});
    if (id == "s3")
        jobs.push_back({"geometry.s3_scalar_curvature", "geometry", "unit 3-sphere has scalar curvature 6", id, 1, 1e-6,
                        [&c](Rng& rng) {
                            double worst = 0;
                            for (const auto& x : ball(rng, 100, 1.5))
                                worst = std::max(worst, std::abs(curvature_pack(c, x).scalar - 6.0));
                            return worst;
                        }});
    if (id == "s2xs1")
        jobs.push_back({"geometry.s2xs1_ricci_origin", "geometry", "S2xS1 Ric(0) = diag(1, 1, 0)", id, 1, 1e-7, [&c](Rng&) {
                            Mat3 ref = Vec3(1, 1, 0).asDiagonal();
                            return maxabs(curvature_pack(c, Vec3::Zero()).Ricci - ref);
                        }});
    if (id == "t3_flat")
        jobs.push_back({"geometry.flat_curvature", "geometry", "flat torus has vanishing curvature", id, 0, 1e-12, [&c](Rng& rng) {
                            double worst = 0;
                            for (const auto& x : ball(rng, 10, 2.0)) worst = std::max(worst, curvature_pack(c, x).Riemann.max_abs());
                            return worst;
                        }});
}

void framing_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"framing.pauli_trace_hermitian", "framing", "projected Pauli matrices are traceless and Hermitian", id, 0, 1e-12,
                    [&e](Rng& rng) {
                        double worst = 0;
                        auto pts = ball(rng, 20, 0.9);
                        for (const auto& [name, f] : e.framings)
                            for (const auto& x : pts) {
                                auto sig = pauli_project(f, x);
                                for (int a = 0; a < 3; ++a) {
                                    worst = std::max(worst, std::abs(sig[a].trace()));
                                    worst = std::max(worst, (sig[a] - sig[a].adjoint()).norm());
                                }
                            }
                        return worst;
                    }});
    jobs.push_back({"framing.frames_orthonormal", "framing", "catalog framings are orthonormal and positively oriented", id, 0, 1e-9,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        auto pts = ball(rng, 100, 0.9);
                        for (const auto& [name, f] : e.framings) {
                            auto rep = frame_checks(c, f, pts);
                            worst = std::max(worst, rep.all_positive ? rep.max_orthonormality : inf);
                        }
                        return worst;
                    }});
    if (id == "s3")
        jobs.push_back({"catalog.s3_killing", "catalog", "V+ and V- are Killing framings", id, 0, 1e-7, [&e, &c](Rng& rng) {
                            double worst = 0;
                            auto pts = ball(rng, 100, 0.9);
                            for (const char* name : {"vplus", "vminus"})
                                worst = std::max(worst, frame_checks(c, e.framing(name), pts, true).max_killing);
                            return worst;
                        }});
    if (id == "s3")
        jobs.push_back({"catalog.s3_gauge_relation", "catalog", "stored gauge maps the V+ framing to V-", id, 0, 1e-7,
                        [&e](Rng& rng) {
                            const auto& G = e.gauges.at({"vplus", "vminus"});
                            double worst = 0;
                            for (const auto& x : ball(rng, 20, 0.5)) {
                                Mat3 O = su2_to_so3(G, x);
                                worst = std::max(worst, maxabs(O * e.framing("vplus").e(x) - e.framing("vminus").e(x)));
                            }
                            return worst;
                        }});
    jobs.push_back({"framing.su2_gauge_preserves_frames", "framing", "SU(2) gauge preserves orthonormality and orientation", id, 0, 1e-9,
                    [&e, &c](Rng& rng) {
                        Mat2c A = random_su2(rng);
                        GaugeTransform G{c.id, [A](const Vec3&) { return A; }};
                        auto pts = ball(rng, 20, 0.9);
                        const Frame& f = e.framing("");
                        auto before = frame_checks(c, f, pts);
                        auto after = frame_checks(c, su2_gauge(f, G), pts);
                        if (before.all_positive != after.all_positive) return inf;
                        return std::abs(after.max_orthonormality - before.max_orthonormality);
                    }});
    jobs.push_back({"framing.levi_civita_first_derivatives", "framing", "Levi-Civita framing has no linear term at its base point", id, 0, 1e-6,
                    [&e, &c](Rng& rng) {
                        Vec3 y = ball(rng, 1, 0.4)[0];
                        auto lc = levi_civita_frame(e.chart, e.framing(""), y);
                        Tensor3 de = frame_derivative(lc->as_frame(false), y);
                        Tensor3 G = christoffel(c, y);
                        Mat3 ey = lc->transport(y);
                        double worst = 0;
                        for (int b = 0; b < 3; ++b)
                            for (int j = 0; j < 3; ++j)
                                for (int a = 0; a < 3; ++a) {
                                    double s = de[b](j, a);
                                    for (int k = 0; k < 3; ++k) s += G(a, b, k) * ey(j, k);
                                    worst = std::max(worst, std::abs(s));
                                }
                        return worst;
                    }});
    jobs.push_back({"dirac.clifford", "dirac", "sigma^a sigma^b + sigma^b sigma^a = 2 g^ab", id, 0, 1e-9, [&e, &c](Rng& rng) {
                        double worst = 0;
                        auto pts = ball(rng, 20, 0.9);
                        for (const auto& [name, f] : e.framings)
                            for (const auto& x : pts) {
                                auto s = pauli_project(f, x);
                                Mat3 gi = c.g(x).inverse();
                                for (int a = 0; a < 3; ++a)
                                    for (int b = 0; b < 3; ++b)
                                        worst = std::max(worst, (s[a] * s[b] + s[b] * s[a] - 2 * gi(a, b) * Id).norm());
                            }
                        return worst;
                    }});
}


void weitzenbock_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"weitzenbock.star_roundtrip", "weitzenbock", "conversions between *T and *K are mutually inverse", id,
                    id == "s3" ? 4 : 0, 1e-12, [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& x : ball(rng, 100, 0.8)) {
                            auto p = torsion_pack(c, e.framing(""), x);
                            worst = std::max(worst, maxabs(starT_from_starK(starK_from_starT(p.starT, p.g), p.g) - p.starT));
                            worst = std::max(worst, maxabs(starK_from_starT(starT_from_starK(p.starK, p.g), p.g) - p.starK));
                        }
                        return worst;
                    }});
    if (id == "s3")
        jobs.push_back({"weitzenbock.s3_einstein", "weitzenbock", "*K = -g for V+ and *K = +g for V- (Einstein property)", id, 4, 1e-7,
                        [&e, &c](Rng& rng) {
                            double worst = 0;
                            for (const auto& x : ball(rng, 100, 2.0)) {
                                Mat3 g = c.g(x);
                                worst = std::max(worst, maxabs(torsion_pack(c, e.framing("vplus"), x).starK + g));
                                worst = std::max(worst, maxabs(torsion_pack(c, e.framing("vminus"), x).starK - g));
                            }
                            return worst;
                        }});
    jobs.push_back({"weitzenbock.levi_civita_torsion_free", "weitzenbock", "Levi-Civita framing has T(y) = K(y) = 0", id, 0, 1e-6,
                    [&e, &c](Rng& rng) {
                        Vec3 y = ball(rng, 1, 0.4)[0];
                        auto lc = levi_civita_frame(e.chart, e.framing(""), y);
                        auto p = torsion_pack(c, lc->as_frame(false), y);
                        return std::max(p.T.max_abs(), p.K.max_abs());
                    }});
    jobs.push_back({"weitzenbock.metric_compatibility", "weitzenbock", "Weitzenbock connection is metric compatible", id, 0, 1e-8,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        auto pts = ball(rng, 10, 0.8);
                        for (const auto& [name, f] : e.framings)
                            for (const auto& x : pts) worst = std::max(worst, weitzenbock_metric_residual(c, f, x));
                        return worst;
                    }});
    jobs.push_back({"weitzenbock.frame_annihilation", "weitzenbock", "Weitzenbock connection annihilates the frame", id, 0, 1e-8,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        auto pts = ball(rng, 10, 0.8);
                        for (const auto& [name, f] : e.framings)
                            for (const auto& x : pts) worst = std::max(worst, weitzenbock_frame_residual(c, f, x));
                        return worst;
                    }});
    if (id == "t3_flat")
        jobs.push_back({"weitzenbock.flat_torsion", "weitzenbock", "constant framings of flat space have no torsion", id, 0, 1e-12,
                        [&e, &c](Rng& rng) {
                            double worst = 0;
                            for (const auto& x : ball(rng, 10, 2.0))
                                for (const auto& [name, f] : e.framings) {
                                    auto p = torsion_pack(c, f, x);
                                    worst = std::max({worst, p.T.max_abs(), p.K.max_abs()});
                                }
                            return worst;
                        }});
}

void dirac_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"dirac.homogeneity", "dirac", "h is homogeneous of degree 1 and P of degree 0 in eta", id, 0, 1e-12,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 20, 0.9)) {
                            Vec3 eta = unit(rng) * 1.7;
                            auto a = eigenpairs_projections(c, e.framing(""), y, eta);
                            auto b = eigenpairs_projections(c, e.framing(""), y, Vec3(3 * eta));
                            worst = std::max(worst, std::abs(b.h - 3 * a.h) / a.h);
                            worst = std::max(worst, (b.Pplus - a.Pplus).norm());
                            worst = std::max(worst, (b.Pminus - a.Pminus).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"dirac.phase_convention_deterministic", "dirac", "eigenvector phase convention is reproducible", id, 0, 0.0,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 20, 0.9)) {
                            Vec3 eta = unit(rng);
                            auto a = eigenpairs_projections(c, e.framing(""), y, eta);
                            auto b = eigenpairs_projections(c, e.framing(""), y, eta);
                            if (!(a.vplus == b.vplus) || !(a.vminus == b.vminus) || !(a.Pplus == b.Pplus)) worst = 1;
                        }
                        return worst;
                    }});
    jobs.push_back({"dirac.projection_rank_one", "dirac", "P+ and P- are rank one projections", id, 0, 1e-10,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 20, 0.9)) {
                            Vec3 eta = unit(rng) * 0.8;
                            auto p = eigenpairs_projections(c, e.framing(""), y, eta);
                            for (const Mat2c* P : {&p.Pplus, &p.Pminus}) {
                                Eigen::SelfAdjointEigenSolver<Mat2c> es(*P);
                                worst = std::max(worst, std::abs(es.eigenvalues()[0]));
                                worst = std::max(worst, std::abs(es.eigenvalues()[1] - 1));
                            }
                        }
                        return worst;
                    }});
}

void flow_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"flow.h_conservation", "flow", "h is conserved along the Hamiltonian flows", id, 0, 1e-9, [&c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 5, 0.5)) {
                            Vec3 eta = unit(rng) * 1.3;
                            for (int sg : {1, -1})
                                for (double t : {-1.0, -0.5, 0.5, 1.0})
                                    worst = std::max(worst, hamiltonian_flow(c, y, eta, t, sg).h_drift);
                        }
                        return worst;
                    }});
    jobs.push_back({"flow.phase_relation", "flow", "phi^-(t, x; y, eta) = -conj phi^+(t, x; y, -eta)", id, 0, 1e-8,
                    [&c](Rng& rng) {
                        double worst = 0;
                        Vec3 y = ball(rng, 1, 0.3)[0];
                        Vec3 eta = unit(rng);
                        PhaseOptions o;
                        o.weight = false;
                        for (double eps : {0.0, 0.7}) {
                            o.epsilon = eps;
                            auto fs = hamiltonian_flow(c, y, eta, 0.3, -1);
                            for (const auto& dx : ball(rng, 3, 0.3)) {
                                Vec3 x = fs.x + dx;
                                auto m = phase_and_weight(c, y, eta, 0.3, x, -1, o);
                                auto p = phase_and_weight(c, y, Vec3(-eta), 0.3, x, 1, o);
                                worst = std::max(worst, std::abs(m.value + std::conj(p.value)));
                            }
                        }
                        return worst;
                    }});
    jobs.push_back({"flow.caustic_free", "flow", "det phi_{x eta} does not vanish below the caustic-free bound", id, 0, 0.0,
                    [&e, &c](Rng& rng) {
                        // strictly below the bound: on S3 the determinant reaches zero at t = pi / 2 itself
                        const double tmax = 0.99 * std::min(e.caustic_t, pi / 2);
                        for (const auto& y : ball(rng, 3, 0.2))
                            for (int sg : {1, -1})
                                if (first_caustic(c, y, unit(rng), sg, tmax, 8) >= 0) return 1.0;
                        return 0.0;
                    }});
    jobs.push_back({"flow.transport_group_action", "flow", "spin transport composes along the trajectory", id, 0, 1e-8,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 3, 0.3)) {
                            Vec3 eta = unit(rng) * 1.2;
                            for (int sg : {1, -1}) {
                                auto a = spinor_transport(c, e.framing(""), y, eta, 0.9, sg);
                                auto b = spinor_transport(c, e.framing(""), y, eta, 0.4, sg);
                                auto d = spinor_transport_from(c, e.framing(""), b.state.x, b.state.xi, b.zeta, 0.5, sg);
                                worst = std::max(worst, (d.zeta - a.zeta).norm());
                            }
                        }
                        return worst;
                    }});
    if (id != "s3") return;
    jobs.push_back({"flow.s3_closed_form", "flow", "S3 flow from the pole: x = +-2 tan(t/2) eta/|eta|, xi = cos^2(t/2) eta", id, 2, 1e-7,
                    [&c](Rng&) {
                        double worst = 0;
                        Vec3 eta(0.3, -0.5, 0.8);
                        for (int sg : {1, -1})
                            for (int k = 0; k <= 12; ++k) {
                                const double t = 0.1 * k;
                                auto fs = hamiltonian_flow(c, Vec3::Zero(), eta, t, sg);
                                worst = std::max(worst, (fs.x - sg * 2 * std::tan(t / 2) * eta.normalized()).norm());
                                worst = std::max(worst, (fs.xi - std::pow(std::cos(t / 2), 2) * eta).norm());
                            }
                        return worst;
                    }});
    jobs.push_back({"flow.s3_h_drift", "flow", "h drift along the S3 flow from the pole", id, 2, 1e-9, [&c](Rng&) {
                        double worst = 0;
                        Vec3 eta(0.3, -0.5, 0.8);
                        for (int sg : {1, -1})
                            for (int k = 0; k <= 12; ++k)
                                worst = std::max(worst, hamiltonian_flow(c, Vec3::Zero(), eta, 0.1 * k, sg).h_drift);
                        return worst;
                    }});
    // the printed phases, checked literally for each sign
    for (int sg : {1, -1})
        jobs.push_back({sg > 0 ? "flow.s3_transport_phase_plus" : "flow.s3_transport_phase_minus", "flow",
                        sg > 0 ? "zeta^+(t) = e^{-it/2} v^+ on S3 (V+) at the pole"
                               : "zeta^-(t) = e^{+it/2} v^- on S3 (V+) at the pole",
                        id, 3, 1e-7, [&e, &c, sg](Rng&) {
                            double worst = 0;
                            const Spinor v = sg > 0 ? Spinor(1, 0) : Spinor(0, 1);
                            for (int k = 1; k <= 12; ++k) {
                                const double t = 0.1 * k;
                                auto r = spinor_transport(c, e.framing("vplus"), Vec3::Zero(), Vec3(0, 0, 1), t, sg);
                                worst = std::max(worst, (r.zeta - std::exp(-sg * 0.5 * I * t) * v).norm());
                            }
                            return worst;
                        }});
    jobs.push_back({"flow.s3_phase_weight_expansion", "flow", "curvature terms of the phase and weight expansions on S3", id, 8, 5e-4,
                    [](Rng&) {
                        Chart nc = s3_normal_chart();
                        Vec3 eta(0.3, -0.5, 0.8);
                        const double h = eta.norm();
                        Mat3 Rq = h * h * Mat3::Identity() - eta * eta.transpose();
                        double worst = 0;
                        for (int sg : {1, -1}) {
                            auto x = phase_weight_expansion(nc, eta, sg);
                            worst = std::max(worst, std::abs(x.phase_t + sg * h));
                            worst = std::max(worst, maxabs(x.phase_txx - sg * (2.0 / (3 * h)) * Rq));
                            worst = std::max(worst, std::abs(x.weight0 - 1));
                            worst = std::max(worst, maxabs(x.weight_xx - (4.0 / 12) * Mat3::Identity()));
                            worst = std::max(worst, (x.weight_tx + sg * (2.0 / (3 * h)) * eta).cwiseAbs().maxCoeff());
                        }
                        return worst;
                    }});
}

Mat2c deg0_t1_direct(const Chart& c, const Frame& f, const Vec3& y, const Vec3& eta, int sign) {
    auto tp = torsion_pack(c, f, y);
    auto ep = eigenpairs_projections(c, f, y, eta);
    Pauli3 s = pauli_project(f, y);
    Vec3 heta = c.g(y).inverse() * eta / ep.h;
    Vec3 w = tp.starK.transpose() * heta;
    return double(sign) * 0.5 * I * sigma_dot(s, w) * ep.P(sign);
}

void symbols_jobs(std::vector<Job>& jobs, const CatalogEntry& e, int samples) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"symbols.two_routes", "symbols", "transport route and q-integral route give the same principal symbol", id,
                    id == "t3_flat" ? 0 : 5, 1e-5, [&e, &c](Rng& rng) {
                        std::uniform_real_distribution<double> U(-0.3, 0.3);
                        double worst = 0;
                        auto ys = ball(rng, 20, 0.5);
                        for (int k = 0; k < 20; ++k) {
                            Vec3 eta = unit(rng) * (0.5 + std::abs(U(rng)) * 3);
                            const double t = U(rng);
                            const int sg = k % 2 ? 1 : -1;
                            auto r = principal_via_q(c, e.framing(""), ys[k], eta, t, sg);
                            worst = std::max(worst, (r.symbol - propagator_principal(c, e.framing(""), ys[k], eta, t, sg)).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"symbols.initial_value", "symbols", "a_0^+-(0) = P^+- and a_0^+(0) + a_0^-(0) = Id", id, 0, 1e-10,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 5, 0.5)) {
                            Vec3 eta = unit(rng) * 1.1;
                            auto ep = eigenpairs_projections(c, e.framing(""), y, eta);
                            Mat2c sum = Mat2c::Zero();
                            for (int sg : {1, -1}) {
                                Mat2c a = propagator_principal(c, e.framing(""), y, eta, 0.0, sg);
                                worst = std::max(worst, (a - ep.P(sg)).norm());
                                sum += a;
                            }
                            worst = std::max(worst, (sum - Id).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"symbols.deg0_t1_levi_civita", "symbols", "degree-0 t^1 coefficient vanishes on a Levi-Civita framing", id, 0, 1e-6,
                    [&e, &c](Rng& rng) {
                        Vec3 eta = unit(rng) * 1.2;
                        Vec3 y = Vec3::Zero();
                        Frame f = e.framing("");
                        if (e.id == "s3") {
                            y = ball(rng, 1, 0.4)[0];
                            auto lc = levi_civita_frame(e.chart, e.framing("vplus"), y);
                            lc->build_cache(0.6, 8);
                            f = lc->as_frame(true);
                        }
                        double worst = 0;
                        for (int sg : {1, -1}) worst = std::max(worst, smalltime_invariant(c, f, y, eta, sg).deg0.coeffs[1].norm());
                        return worst;
                    }});
    jobs.push_back({"symbols.u0_levi_civita", "symbols", "U^+-(0) vanishes for a Levi-Civita framing at its base point", id, 11, 1e-6,
                    [&e, &c](Rng& rng) {
                        Vec3 eta = unit(rng) * 1.2;
                        Vec3 y = Vec3::Zero();
                        Frame f = e.framing("");
                        if (e.id == "s3") {
                            y = ball(rng, 1, 0.4)[0];
                            f = levi_civita_frame(e.chart, e.framing("vplus"), y)->as_frame(false);
                        } else if (e.id == "t3_flat") {
                            y = ball(rng, 1, 2.0)[0];
                        }
                        double worst = 0;
                        for (int sg : {1, -1}) worst = std::max(worst, u0_subprincipal(c, f, y, eta, sg).norm());
                        return worst;
                    }});
    for (int k = 0; k < samples; ++k)
        jobs.push_back({fmt::format("symbols.numeric_vs_invariant[{}]", k), "symbols",
                        "transport-equation reconstruction matches the invariant small-time formulas coefficientwise", id, 7, 1e-4,
                        [&e](Rng& rng) {
                            std::uniform_real_distribution<double> U(0.6, 1.5);
                            Vec3 y = ball(rng, 1, 0.5)[0];
                            Vec3 eta = unit(rng) * U(rng);
                            SymbolFitContext ctx(e.chart, e.framing(""), y);
                            double worst = 0;
                            for (int sg : {1, -1}) {
                                auto nf = ctx.fit(eta, sg);
                                auto inv = smalltime_invariant(*e.chart, e.framing(""), y, eta, sg);
                                for (int j = 0; j < 3; ++j) worst = std::max(worst, (nf.deg0.coeffs[j] - inv.deg0.coeffs[j]).norm());
                                for (int j = 0; j < 2; ++j) worst = std::max(worst, (nf.deg_1.coeffs[j] - inv.deg_1.coeffs[j]).norm());
                            }
                            return worst;
                        }});

    if (id == "s2xs1")
        for (int sg : {1, -1})
            jobs.push_back({sg > 0 ? "symbols.s2xs1_subprincipal_printed_plus" : "symbols.s2xs1_subprincipal_printed_minus", "symbols",
                            "S2xS1 anisotropic form -+(i t/24h^2)[h + (-3 +- 1) eta.sigma + 3 eta_3 sigma^3]", id, 6, 1e-6,
                            [&e, &c, sg](Rng&) {
                                Vec3 eta(0.3, -0.5, 0.8);
                                const double h = eta.norm(), sd = sg;
                                Pauli3 s = pauli_project(e.framing("lc0"), Vec3::Zero());
                                auto r = smalltime_invariant(c, e.framing("lc0"), Vec3::Zero(), eta, sg);
                                Mat2c printed = -sd * (I / (24 * h * h)) *
                                                (h * Id + (-3.0 + sd) * sigma_dot(s, eta) + 3.0 * eta[2] * s[2]);
                                return std::max(r.deg_1.coeffs[0].norm(), (r.deg_1.coeffs[1] - printed).norm());
                            }});
    if (id != "s3") return;

    jobs.push_back({"symbols.s3_deg0_t1_direct", "symbols", "degree-0 t^1 coefficient equals its direct *K evaluation and is nonzero on S3", id, 0, 1e-7,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const char* name : {"vplus", "vminus"}) {
                            Vec3 y = ball(rng, 1, 0.4)[0];
                            Vec3 eta = unit(rng) * 1.1;
                            for (int sg : {1, -1}) {
                                auto r = smalltime_invariant(c, e.framing(name), y, eta, sg);
                                Mat2c d = deg0_t1_direct(c, e.framing(name), y, eta, sg);
                                if (r.deg0.coeffs[1].norm() < 0.1) return inf;
                                worst = std::max(worst, (r.deg0.coeffs[1] - d).norm());
                            }
                        }
                        return worst;
                    }});
    jobs.push_back({"symbols.charge_conjugation_pairing", "symbols", "a_k(t; y, -eta) = (-1)^k J a_k(t; y, eta) J^-1 on S3", id, 0, 1e-5,
                    [&e, &c](Rng& rng) {
                        double worst = 0;
                        Vec3 y = ball(rng, 1, 0.4)[0];
                        Vec3 eta = unit(rng) * 0.9;
                        for (int sg : {1, -1}) {
                            auto a = smalltime_invariant(c, e.framing("vplus"), y, eta, sg);
                            auto b = smalltime_invariant(c, e.framing("vplus"), y, Vec3(-eta), sg);
                            for (int k = 0; k < 3; ++k)
                                worst = std::max(worst, (b.deg0.coeffs[k] - (k % 2 ? -1.0 : 1.0) * conj_J(a.deg0.coeffs[k])).norm());
                            for (int k = 0; k < 2; ++k)
                                worst = std::max(worst, (b.deg_1.coeffs[k] - (k % 2 ? -1.0 : 1.0) * conj_J(a.deg_1.coeffs[k])).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"symbols.s3_subprincipal_printed", "symbols", "S3 V+ a_{-1}^+ = (1 - i t)/(4|eta|) Id at |eta| = 1", id, 6, 1e-6,
                    [&e, &c](Rng&) {
                        auto r = smalltime_invariant(c, e.framing("vplus"), Vec3::Zero(), Vec3(0, 0, 1), 1);
                        return std::max((r.deg_1.coeffs[0] - 0.25 * Id).norm(), (r.deg_1.coeffs[1] + 0.25 * I * Id).norm());
                    }});
    jobs.push_back({"symbols.gauge_first_derivatives", "symbols", "closed-form dG against central differences of the S3 gauge", id, 10, 1e-5,
                    [&e, &c](Rng&) {
                        const auto& Gc = e.gauges.at({"vplus", "vminus"});
                        // the closed forms are for the lift with G(y) = +Id; the catalog gauge is -Id at the pole
                        auto Ghat = [&](const Vec3& x) -> Mat2c { return -Gc.G(x); };
                        auto gd = gauge_derivatives(c, e.framing("vminus"), e.framing("vplus"), Vec3::Zero());
                        double worst = 0;
                        for (int a = 0; a < 3; ++a) {
                            Vec3 o = Vec3::Zero();
                            worst = std::max(worst, (fd::d1(Ghat, o, a, 1e-3) - gd.dG[a]).norm());
                        }
                        return worst;
                    }});
    jobs.push_back({"symbols.gauge_second_derivatives_id", "symbols", "Id part of the closed-form second derivatives against central differences", id, 10, 1e-4,
                    [&e, &c](Rng& rng) {
                        Vec3 y = ball(rng, 1, 0.4)[0];
                        const Frame& vp = e.framing("vplus");
                        Frame lc = levi_civita_frame(e.chart, vp, y)->as_frame(false);
                        auto gp = gauge_derivatives(c, vp, lc, y);
                        auto Gl = [&](const Vec3& x) -> Mat2c { return gauge_between(c, vp, lc, x, Id); };
                        double worst = 0;
                        const double hh = 2e-3;
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b) {
                                Vec3 pp = y, pm = y, mp = y, mm = y;
                                pp[a] += hh, pp[b] += hh;
                                pm[a] += hh, pm[b] -= hh;
                                mp[a] -= hh, mp[b] += hh;
                                mm[a] -= hh, mm[b] -= hh;
                                Mat2c d2 = (Gl(pp) - Gl(pm) - Gl(mp) + Gl(mm)) / (4 * hh * hh);
                                worst = std::max(worst, std::abs(0.5 * d2.trace() - 0.5 * gp.ddG[a][b].trace()));
                            }
                        return worst;
                    }});
    jobs.push_back({"symbols.u0_s3_vplus", "symbols", "U^+-(0) = +-Id/(2h) for S3 V+", id, 11, 1e-6, [&e, &c](Rng& rng) {
                        double worst = 0;
                        for (const auto& y : ball(rng, 4, 0.6)) {
                            Vec3 eta = unit(rng) * 1.3;
                            const double h = hamiltonian_h(c.g(y), eta);
                            for (int sg : {1, -1})
                                worst = std::max(worst, (u0_subprincipal(c, e.framing("vplus"), y, eta, sg) - sg / (2 * h) * Id).norm());
                        }
                        return worst;
                    }});
}

const Mollifier& s3_mollifier(double T0) {
    static const Mollifier m = build_mollifier(T0);
    return m;
}

void spectral_jobs(std::vector<Job>& jobs, const CatalogEntry& e) {
    const std::string& id = e.id;
    const Chart& c = *e.chart;
    jobs.push_back({"spectral.weyl_coefficients", "spectral", "Weyl coefficients (1/2pi^2, 0, -R/48pi^2) from the scalar curvature", id,
                    id == "s3" ? 9 : 0, 1e-6, [&e, &c](Rng& rng) {
                        Vec3 y = Vec3::Zero();
                        double expect = 2.0;
                        if (e.id == "s3") y = ball(rng, 1, 1.0)[0], expect = 6.0;
                        if (e.id == "t3_flat") y = ball(rng, 1, 2.0)[0], expect = 0.0;
                        auto w = weyl_coefficients(c, y);
                        if (w.c2 != 1 / (2 * pi * pi) || w.c1 != 0.0 || w.c0 != -w.scalar_curvature / (48 * pi * pi)) return inf;
                        return std::abs(w.scalar_curvature - expect);
                    }});
    if (id != "s3" || !e.spectrum) return;
    jobs.push_back({"spectral.s3_weyl_residual", "spectral", "mollified counting function minus (lambda^2 - 1/4)/2pi^2 is small and non-increasing on 10..40", id, 9, 1e-3,
                    [&e, &c](Rng&) {
                        auto rep = weyl_residual(*e.spectrum, s3_mollifier(e.T0), e.volume, weyl_coefficients(c, Vec3::Zero()), {10, 20, 30, 40});
                        if (!rep.non_increasing) return inf;
                        double worst = 0;
                        for (const auto& r : rep.rows) worst = std::max(worst, std::abs(r.residual));
                        return worst;
                    }});
    jobs.push_back({"spectral.mollifier_independence", "spectral", "residuals do not depend on the admissible mollifier", id, 0, 1e-6,
                    [&e, &c](Rng&) {
                        MollifierOptions other;
                        other.bump_scale = 1.5;
                        Mollifier m2 = build_mollifier(e.T0, other);
                        auto w = weyl_coefficients(c, Vec3::Zero());
                        auto a = weyl_residual(*e.spectrum, s3_mollifier(e.T0), e.volume, w, {20, 30, 40});
                        auto b = weyl_residual(*e.spectrum, m2, e.volume, w, {20, 30, 40});
                        double worst = 0;
                        for (size_t i = 0; i < a.rows.size(); ++i)
                            worst = std::max(worst, std::abs(a.rows[i].residual - b.rows[i].residual));
                        return worst;
                    }});
    jobs.push_back({"spectral.antiderivative", "spectral", "integral of the mollified counting function matches the integrated Weyl polynomial", id, 0, 1e-5,
                    [&e, &c](Rng&) {
                        const Mollifier& m = s3_mollifier(e.T0);
                        auto w = weyl_coefficients(c, Vec3::Zero());
                        auto poly = [&](double l) { return w.c2 / 3 * l * l * l + w.c1 / 2 * l * l + w.c0 * l; };
                        auto dens = [&](double l) { return mollified_counting(*e.spectrum, m, 1, l).value / e.volume; };
                        using GL = boost::math::quadrature::gauss<double, 30>;
                        double integral = 0;
                        for (int p = 0; p < 10; ++p) integral += GL::integrate(dens, 20.0 + p, 21.0 + p);
                        return std::abs(integral - (poly(30.0) - poly(20.0)));
                    }});
    jobs.push_back({"spectral.even_multiplicities", "spectral", "all S3 multiplicities are even", id, 0, 0.0, [&e](Rng&) {
                        double odd = 0;
                        for (const auto& l : e.spectrum->levels(60.0))
                            if (l.multiplicity % 2) odd += 1;
                        return odd;
                    }});
    jobs.push_back({"spectral.mollifier_mass", "spectral", "mollifier has unit mass", id, 0, 1e-8,
                    [&e](Rng&) { return std::abs(mollifier_mass(s3_mollifier(e.T0)) - 1.0); }});
}

void common_jobs(std::vector<Job>& jobs) {
    jobs.push_back({"framing.so3_composition", "framing", "the double cover respects products", "", 0, 1e-10, [](Rng& rng) {
                        double worst = 0;
                        for (int i = 0; i < 20; ++i) {
                            Mat2c A = random_su2(rng), B = random_su2(rng);
                            // with O_j^k stored as (row j, column k) products come out reversed
                            Mat3 lhs = su2_to_so3(Mat2c(A * B)).transpose();
                            Mat3 rhs = su2_to_so3(A).transpose() * su2_to_so3(B).transpose();
                            worst = std::max(worst, maxabs(lhs - rhs));
                        }
                        return worst;
                    }});
}

}  // namespace

std::uint64_t check_seed(std::uint64_t seed, const std::string& name) {
    // FNV-1a over the name, mixed with the run seed
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (unsigned char ch : name) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

int thread_cap() {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    const char* env = std::getenv("SPINFLOW_THREADS");
    if (!env || !*env) return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw Error(ErrorKind::ConfigInvalid, fmt::format("SPINFLOW_THREADS must be a positive integer, got '{}'", env));
    return static_cast<int>(std::min<long>(v, hw));
}

std::vector<CheckResult> verify_all(const VerifyOptions& opt) {
    if (opt.samples < 1) throw Error(ErrorKind::ConfigInvalid, "samples must be positive");
    std::vector<std::string> ids = builtin_ids();
    if (!opt.manifolds.empty()) {
        for (const auto& m : opt.manifolds) builtin(m);
        std::vector<std::string> keep;
        for (const auto& id : ids)
            if (std::find(opt.manifolds.begin(), opt.manifolds.end(), id) != opt.manifolds.end()) keep.push_back(id);
        ids = keep;
    }
    std::vector<Job> jobs;
    common_jobs(jobs);
    for (const auto& id : ids) {
        const auto& e = builtin(id);
        geometry_jobs(jobs, e);
        framing_jobs(jobs, e);
        weitzenbock_jobs(jobs, e);
        dirac_jobs(jobs, e);
        flow_jobs(jobs, e);
        symbols_jobs(jobs, e, opt.samples);
        spectral_jobs(jobs, e);
    }

    std::vector<CheckResult> out(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < jobs.size(); i = next++) {
            const Job& j = jobs[i];
            CheckResult& r = out[i];
            r.name = j.manifold.empty() ? j.name : j.name + "@" + j.manifold;
            r.module = j.module;
            r.anchor = j.anchor;
            r.manifold = j.manifold;
            r.criterion = j.criterion;
            r.tolerance = j.tol;
            auto t0 = std::chrono::steady_clock::now();
            Rng rng(check_seed(opt.seed, r.name));
            try {
                r.value = j.run(rng);
                r.pass = r.value <= j.tol;
            } catch (const std::exception& ex) {
                r.value = std::numeric_limits<double>::quiet_NaN();
                r.pass = false;
                r.detail = ex.what();
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    const int n = std::max(1, std::min<int>(opt.threads, static_cast<int>(jobs.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return out;
}

}  // namespace spinflow
