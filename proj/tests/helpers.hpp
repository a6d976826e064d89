#pragma once

#include <cmath>
#include <random>

#include "qpat/boundary.hpp"
#include "qpat/coefficients.hpp"
#include "qpat/norms.hpp"

namespace qpat::test {

inline SpatialGrid unit_grid(int n, double delta = 0.0) {
    return SpatialGrid(n, n, 0.0, 0.0, 1.0, 1.0, delta);
}

/// Homogeneous transport medium with all fields = 1 and generous declared
/// bounds.
inline CoefficientSet homogeneous(const SpatialGrid& g, double sa = 1.0, double ss = 1.0,
                                  double sb = 1.0, double xi = 1.0) {
    CoefficientSet c = CoefficientSet::constants(g, xi, sa, sb, ss, 1.0, 0.0, 0.0);
    c.c0 = std::min({xi, sa, ss > 0.0 ? ss : sa, sb > 0.0 ? sb : sa, 1.0});
    c.C0 = std::max({xi, sa, ss, sb, 1.0});
    return c;
}

/// Smooth positive bump field frozen to `base` on the delta-vicinity.
inline ScalarField bump_field(const SpatialGrid& g, double base, double amp, double cx,
                              double cy, double rad) {
    ScalarField f(g, base);
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            if (g.in_boundary_layer(i, j)) continue;
            const double dx = g.cx(i) - cx, dy = g.cy(j) - cy;
            f.at(i, j) = base + amp * std::exp(-(dx * dx + dy * dy) / (2.0 * rad * rad));
        }
    return f;
}

inline PhaseField random_phase(const SpatialGrid& g, int nv, std::uint64_t seed,
                               double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    PhaseField f(g, nv);
    for (double& v : f.data()) v = u(rng);
    return f;
}

inline double rel_l2_error(const ScalarField& got, const ScalarField& want,
                           const SpatialGrid& g) {
    const double wn = l2_norm(want, g);
    return wn > 0.0 ? l2_norm(got - want, g) / wn : l2_norm(got, g);
}

/// Boundary profile that is C^1 around the perimeter (flat at the corners),
/// so pure-absorption solutions have no corner-shadow kinks.
inline double smooth_boundary_profile(const SpatialGrid& g, Vec2 x) {
    auto hump = [](double s) {
        const double t = std::sin(3.14159265358979323846 * s);
        return t * t;
    };
    double s = 0.0;
    if (std::abs(x.y - g.y0()) < 1e-12 || std::abs(x.y - g.y1()) < 1e-12)
        s = (x.x - g.x0()) / g.width();
    else
        s = (x.y - g.y0()) / g.height();
    return 0.4 + 0.6 * hump(s);
}

} // namespace qpat::test
