#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qpat/linearization.hpp"

using namespace qpat;
using test::unit_grid;

namespace {

BoundarySource smooth_source(const SpatialGrid& g, const AngularQuadrature& q,
                             double scale = 1.0) {
    return BoundarySource::from_function(g, q, [&g, scale](Vec2 x, Vec2) {
        return scale * test::smooth_boundary_profile(g, x);
    });
}

} // namespace

TEST_CASE("transport u1") {
    const SpatialGrid g = unit_grid(20, 0.1);
    const AngularQuadrature q = AngularQuadrature::uniform(8);
    const ScatteringKernel kern = ScatteringKernel::isotropic(q);
    CoefficientSet c = test::homogeneous(g, 0.8, 0.9);

    SUBCASE("zero source gives zero") {
        CHECK(solve_u1_transport(c, g, q, kern, BoundarySource(g, q)).max_abs() == 0.0);
    }

    SUBCASE("u1 is independent of sigma_b, bitwise") {
        const BoundarySource src = smooth_source(g, q);
        const PhaseField a = solve_u1_transport(c, g, q, kern, src);
        CoefficientSet c2 = c;
        c2.sigma_b = test::bump_field(g, 2.0, 1.0, 0.3, 0.7, 0.2);
        const PhaseField b = solve_u1_transport(c2, g, q, kern, src);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
    }

    SUBCASE("positive data keeps u1 above the positivity bound") {
        const BoundarySource src = smooth_source(g, q);
        const PhaseField u1 = solve_u1_transport(c, g, q, kern, src);
        const double eps = positivity_lower_bound(c, g, src);
        CHECK(u1.min() >= eps - 2.0 * g.h_max() * 1.7 * src.max_abs());
    }

    SUBCASE("homogeneity") {
        const BoundarySource src = smooth_source(g, q);
        const PhaseField a = solve_u1_transport(c, g, q, kern, src);
        const PhaseField b = solve_u1_transport(c, g, q, kern, 2.5 * src);
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            worst = std::max(worst, std::abs(b.data()[i] - 2.5 * a.data()[i]));
        CHECK(worst <= 1e-8 * src.max_abs());
    }
}

TEST_CASE("transport u2") {
    const SpatialGrid g = unit_grid(20, 0.1);
    const AngularQuadrature q = AngularQuadrature::uniform(8);
    const ScatteringKernel kern = ScatteringKernel::isotropic(q);
    CoefficientSet c = test::homogeneous(g);
    const BoundarySource src = smooth_source(g, q);
    const PhaseField u1 = solve_u1_transport(c, g, q, kern, src);

    SUBCASE("vanishes with sigma_b or with u1") {
        CoefficientSet c0 = c;
        c0.sigma_b = ScalarField(g, 0.0);
        CHECK(solve_u2_transport(c0, g, q, kern, u1).max_abs() == 0.0);
        const PhaseField zero(g, q.n_dirs());
        CHECK(solve_u2_transport(c, g, q, kern, zero).max_abs() == 0.0);
    }

    SUBCASE("nonpositive for isotropic nonnegative data") {
        const PhaseField u2 = solve_u2_transport(c, g, q, kern, u1);
        CHECK(u2.max() <= 1e-12 * linf_norm(u1));
        CHECK(u2.min() < 0.0);
    }

    SUBCASE("quadratic scaling in the data") {
        const PhaseField u2 = solve_u2_transport(c, g, q, kern, u1);
        const PhaseField u1s = solve_u1_transport(c, g, q, kern, 3.0 * src);
        const PhaseField u2s = solve_u2_transport(c, g, q, kern, u1s);
        double worst = 0.0;
        for (std::size_t i = 0; i < u2.size(); ++i)
            worst = std::max(worst, std::abs(u2s.data()[i] - 9.0 * u2.data()[i]));
        CHECK(worst <= 1e-7 * linf_norm(u2));
    }
}

TEST_CASE("diffusion linearizations") {
    const SpatialGrid g = unit_grid(20, 0.1);
    CoefficientSet c = test::homogeneous(g);
    const DirichletTrace tr(g, 1.0);

    SUBCASE("zero data") {
        const DirichletTrace zero(g, 0.0);
        CHECK(solve_u1_diffusion(c, g, zero).max_abs() == 0.0);
        const LinearizationBundle b = linearize_diffusion(c, g, zero);
        CHECK(b.u2_diffusion.max_abs() == 0.0);
    }

    SUBCASE("sigma_b = 0 gives u2 = 0") {
        CoefficientSet c0 = c;
        c0.sigma_b = ScalarField(g, 0.0);
        const LinearizationBundle b = linearize_diffusion(c0, g, tr);
        CHECK(b.u2_diffusion.max_abs() == 0.0);
    }

    SUBCASE("u2 < 0 in the interior for unit data") {
        const LinearizationBundle b = linearize_diffusion(c, g, tr);
        CHECK(b.u2_diffusion.max() < 0.0);
    }

    SUBCASE("homogeneity and quadratic scaling") {
        const LinearizationBundle b1 = linearize_diffusion(c, g, tr);
        const LinearizationBundle b2 = linearize_diffusion(c, g, 2.0 * tr);
        double w1 = 0.0, w2 = 0.0;
        for (std::size_t i = 0; i < b1.u1_diffusion.size(); ++i) {
            w1 = std::max(w1, std::abs(b2.u1_diffusion[i] - 2.0 * b1.u1_diffusion[i]));
            w2 = std::max(w2, std::abs(b2.u2_diffusion[i] - 4.0 * b1.u2_diffusion[i]));
        }
        CHECK(w1 <= 1e-9);
        CHECK(w2 <= 1e-8);
    }
}

TEST_CASE("derivative verification (transport)") {
    const SpatialGrid g = unit_grid(16, 0.125);
    const AngularQuadrature q = AngularQuadrature::uniform(8);
    const ScatteringKernel kern = ScatteringKernel::isotropic(q);
    CoefficientSet c = test::homogeneous(g);
    c.c0 = 0.5;
    c.C0 = 1.5;
    c.sigma_b = test::bump_field(g, 0.8, 0.5, 0.45, 0.55, 0.2);
    const BoundarySource unit = smooth_source(g, q);

    SUBCASE("Richardson ratios near 2") {
        const DerivativeCheckReport rep =
            verify_derivatives_transport(c, g, q, kern, unit, {1e-2, 5e-3, 2.5e-3});
        CHECK(rep.ratios_ok);
        for (double r : rep.r1_ratio) {
            CHECK(r >= 1.5);
            CHECK(r <= 2.5);
        }
        for (double r : rep.r2_ratio) {
            CHECK(r >= 1.5);
            CHECK(r <= 2.5);
        }
        // Finite-eps derivative equations vs centered divided differences:
        // O(de^2) agreement with de = eps/2 = 5e-3.
        const double de2 = 2.5e-5;
        CHECK(rep.u1_eps_dd_error <= 3.0 * de2 * rep.u1_eps_dd_scale);
        CHECK(rep.u2_eps_dd_error <= 3.0 * de2 * std::max(rep.u2_eps_dd_scale, 1.0));
    }

    SUBCASE("sigma_b = 0 gives zero first remainder") {
        CoefficientSet c0 = c;
        c0.sigma_b = ScalarField(g, 0.0);
        const DerivativeCheckReport rep =
            verify_derivatives_transport(c0, g, q, kern, unit, {1e-2});
        CHECK(rep.sigma_b_zero);
        CHECK(rep.r1[0] <= 1e-9);
    }
}
