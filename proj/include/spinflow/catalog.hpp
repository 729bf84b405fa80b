#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinflow/framing.hpp"
#include "spinflow/geometry.hpp"

namespace spinflow {

struct SpectrumLevel {
    double lambda;
    long multiplicity;
};

struct SpectrumModel {
    std::string description;
    // all eigenvalues with |lambda| <= lambda_max, ascending
    std::function<std::vector<SpectrumLevel>(double lambda_max)> levels;
};

struct CatalogEntry {
    std::string id;
    std::string description;
    std::shared_ptr<const Chart> chart;
    std::map<std::string, Frame> framings;
    std::string default_framing;
    // key: (from, to) framing names
    std::map<std::pair<std::string, std::string>, GaugeTransform> gauges;
    std::optional<SpectrumModel> spectrum;
    double injectivity_hint = 1.0;
    double T0 = 0.0;
    double volume = 0.0;
    double caustic_t = 0.0;

    const Frame& framing(const std::string& name) const;
};

const CatalogEntry& builtin(const std::string& id);
std::vector<std::string> builtin_ids();

// JSON text describing all entries and their constants
std::string catalog_manifest_json();

// S^3 gauge matrix in its literal closed form; the stored vplus->vminus map is
// its complex conjugate
Mat2c s3_gauge_literal(const Vec3& x);

// geodesic normal coordinates of the unit 3-sphere at any point (closed form)
Chart s3_normal_chart();

// s2xs1 metric helper Q(s) = (sin^2 r / r^2 - 1) / s, s = r^2, with derivatives in s
struct QJet {
    double q, dq, ddq;
};
QJet s2xs1_q(double s);

}  // namespace spinflow
