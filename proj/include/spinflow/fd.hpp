#pragma once

// Central finite differences. All stencils are 4th order; d1 applies one
// Richardson pass on top (h and h/2).

#include <type_traits>
#include <utility>

#include "spinflow/types.hpp"

namespace spinflow::fd {

inline double default_step(const Vec3& x, double scale = 1e-4) { return scale * (1.0 + x.norm()); }

template <class F>
auto d1_plain_s(F&& f, double s0, double h) {
    using R = std::decay_t<decltype(f(s0))>;
    R a = f(s0 + h), b = f(s0 - h), c = f(s0 + 2 * h), d = f(s0 - 2 * h);
    R out = (8.0 * (a - b) - (c - d)) * (1.0 / (12.0 * h));
    return out;
}

template <class F>
auto d1_s(F&& f, double s0, double h) {
    using R = std::decay_t<decltype(f(s0))>;
    R coarse = d1_plain_s(f, s0, h);
    R fine = d1_plain_s(f, s0, 0.5 * h);
    R out = (16.0 * fine - coarse) * (1.0 / 15.0);
    return out;
}

template <class F>
auto d2_plain_s(F&& f, double s0, double h) {
    using R = std::decay_t<decltype(f(s0))>;
    R c = f(s0);
    R out = (-1.0 * (f(s0 + 2 * h) + f(s0 - 2 * h)) + 16.0 * (f(s0 + h) + f(s0 - h)) - 30.0 * c) *
            (1.0 / (12.0 * h * h));
    return out;
}

template <class F, class V>
auto d1_plain(F&& f, const V& x, int dir, double h) {
    return d1_plain_s(
        [&](double s) {
            V y = x;
            y[dir] = s;
            return f(y);
        },
        x[dir], h);
}

template <class F, class V>
auto d1(F&& f, const V& x, int dir, double h) {
    return d1_s(
        [&](double s) {
            V y = x;
            y[dir] = s;
            return f(y);
        },
        x[dir], h);
}

}  // namespace spinflow::fd
