#pragma once

#include <random>
#include <vector>

#include "spinflow/types.hpp"

namespace testutil {

// uniform points in a ball around the origin
inline std::vector<spinflow::Vec3> ball_points(int n, double radius, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud;
    std::vector<spinflow::Vec3> out;
    for (int i = 0; i < n; ++i) {
        spinflow::Vec3 d(nd(rng), nd(rng), nd(rng));
        out.push_back(d.normalized() * radius * std::cbrt(ud(rng)));
    }
    return out;
}

inline spinflow::Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    return spinflow::Vec3(nd(rng), nd(rng), nd(rng)).normalized();
}

}  // namespace testutil
