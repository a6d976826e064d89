#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qpat/quadrature.hpp"

using namespace qpat;
using test::unit_grid;

TEST_CASE("uniform quadrature invariants") {
    for (int n : {4, 8, 12, 16, 32}) {
        const AngularQuadrature q = AngularQuadrature::uniform(n);
        double ws = 0.0;
        for (int k = 0; k < n; ++k) {
            ws += q.weight(k);
            CHECK(std::abs(std::hypot(q.dir(k).x, q.dir(k).y) - 1.0) <= 1e-14);
            const Vec2 opp = q.dir(q.opposite(k));
            CHECK(std::abs(opp.x + q.dir(k).x) <= 1e-13);
            CHECK(std::abs(opp.y + q.dir(k).y) <= 1e-13);
        }
        CHECK(std::abs(ws - 1.0) <= 1e-14);
    }
    CHECK_THROWS_AS(AngularQuadrature::uniform(7), PreconditionError);
    CHECK_THROWS_AS(AngularQuadrature::uniform(2), PreconditionError);
}

TEST_CASE("velocity_average basics") {
    const SpatialGrid g = unit_grid(8);
    const AngularQuadrature q = AngularQuadrature::uniform(8);

    PhaseField ones(g, 8, 1.0);
    ScalarField m = velocity_average(ones, q);
    for (double v : m.data()) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    PhaseField vx(g, 8);
    for (std::size_t c = 0; c < vx.n_cells(); ++c)
        for (int k = 0; k < 8; ++k) vx(c, k) = q.dir(k).x;
    m = velocity_average(vx, q);
    for (double v : m.data()) CHECK(std::abs(v) <= 1e-15);

    // Indicator of v_x > 0 on the 8-point offset quadrature: exactly half.
    PhaseField ind(g, 8);
    for (std::size_t c = 0; c < ind.n_cells(); ++c)
        for (int k = 0; k < 8; ++k) {
            CHECK(q.dir(k).x != 0.0);
            ind(c, k) = q.dir(k).x > 0.0 ? 1.0 : 0.0;
        }
    m = velocity_average(ind, q);
    for (double v : m.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("scattering kernel normalization and zero mean") {
    const SpatialGrid g = unit_grid(6);
    const int nv = 12;
    const AngularQuadrature q = AngularQuadrature::uniform(nv);

    SUBCASE("direction-independent fields are in the kernel of K") {
        const ScatteringKernel kern = ScatteringKernel::isotropic(q);
        PhaseField u(g, nv, 3.25);
        const PhaseField k = apply_scattering(u, kern, q);
        CHECK(linf_norm(k) <= 1e-14);
    }

    SUBCASE("isotropic kernel collapses to <u> - u") {
        const ScatteringKernel kern = ScatteringKernel::isotropic(q);
        const PhaseField u = test::random_phase(g, nv, 7);
        const ScalarField m = velocity_average(u, q);
        const PhaseField k = apply_scattering(u, kern, q);
        for (std::size_t c = 0; c < u.n_cells(); ++c)
            for (int d = 0; d < nv; ++d)
                CHECK(k(c, d) == doctest::Approx(m[c] - u(c, d)).epsilon(1e-13));
    }

    SUBCASE("random doubly normalized kernel has mean-free K(u)") {
        // Sinkhorn-normalize a random positive matrix so both
        // quadrature-weighted sums equal 1, then check <K(u)> = 0.
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> uni(0.2, 2.0);
        std::vector<double> th(nv * nv);
        for (double& v : th) v = uni(rng);
        for (int sweep = 0; sweep < 200; ++sweep) {
            for (int k = 0; k < nv; ++k) {
                double rs = 0.0;
                for (int j = 0; j < nv; ++j) rs += q.weight(j) * th[k * nv + j];
                for (int j = 0; j < nv; ++j) th[k * nv + j] /= rs;
            }
            for (int j = 0; j < nv; ++j) {
                double cs = 0.0;
                for (int k = 0; k < nv; ++k) cs += q.weight(k) * th[k * nv + j];
                for (int k = 0; k < nv; ++k) th[k * nv + j] /= cs;
            }
        }
        const ScatteringKernel kern(q, th);
        const PhaseField u = test::random_phase(g, nv, 13);
        const PhaseField ku = apply_scattering(u, kern, q);
        const ScalarField mean = velocity_average(ku, q);
        CHECK(linf_norm(mean) <= 1e-12 * linf_norm(u));
    }

    SUBCASE("non-normalized kernel rejected") {
        std::vector<double> th(nv * nv, 1.1);
        CHECK_THROWS_AS(ScatteringKernel(q, th), PreconditionError);
    }

    SUBCASE("henyey-greenstein is doubly normalized") {
        const ScatteringKernel kern = ScatteringKernel::henyey_greenstein(q, 0.6);
        for (int k = 0; k < nv; ++k) {
            double rs = 0.0, cs = 0.0;
            for (int j = 0; j < nv; ++j) {
                rs += q.weight(j) * kern.theta(k, j);
                cs += q.weight(j) * kern.theta(j, k);
            }
            CHECK(rs == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(cs == doctest::Approx(1.0).epsilon(1e-12));
        }
        CHECK_FALSE(kern.is_isotropic());
    }
}

TEST_CASE("boundary_distance geometry") {
    const SpatialGrid g = unit_grid(16);
    CHECK(boundary_distance({0.5, 0.5}, {1.0, 0.0}, g) == doctest::Approx(0.5).epsilon(1e-14));
    const double s = std::sqrt(0.5);
    CHECK(boundary_distance({0.5, 0.5}, {s, s}, g) ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
    // Point already on the inflow face: tau = 0.
    CHECK(boundary_distance({0.0, 0.5}, {1.0, 0.0}, g) == doctest::Approx(0.0));
    CHECK_THROWS_AS(boundary_distance({1.5, 0.5}, {1.0, 0.0}, g), PreconditionError);

    // Chord property: tau(x, v) + tau(x, -v) is the full chord length.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    for (int t = 0; t < 200; ++t) {
        const Vec2 x{uni(rng), uni(rng)};
        const double th = ang(rng);
        const Vec2 v{std::cos(th), std::sin(th)};
        const double fwd = boundary_distance(x, {-v.x, -v.y}, g);
        const double bwd = boundary_distance(x, v, g);
        const Vec2 a = x - bwd * v;
        const Vec2 b = x + fwd * v;
        const double chord = std::hypot(b.x - a.x, b.y - a.y);
        CHECK(fwd + bwd == doctest::Approx(chord).epsilon(1e-12));
    }
}

TEST_CASE("discrete norms") {
    const SpatialGrid g = unit_grid(10);
    const AngularQuadrature q = AngularQuadrature::uniform(8);

    SUBCASE("zero and unit fields") {
        ScalarField z(g, 0.0);
        CHECK(l2_norm(z, g) == 0.0);
        CHECK(linf_norm(z) == 0.0);
        CHECK(w2p_norm(z, g, 4.0) == 0.0);
        ScalarField one(g, 1.0);
        CHECK(l2_norm(one, g) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(lp_norm(one, g, 4.0) == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("W2p requires p > 2 and is exact for constants") {
        ScalarField c(g, 2.5);
        CHECK_THROWS_AS(w2p_norm(c, g, 2.0), PreconditionError);
        // Constant field: derivative terms vanish, norm = |c| |Omega|^{1/p}.
        CHECK(w2p_norm(c, g, 4.0) == doctest::Approx(2.5).epsilon(1e-13));
        CHECK(w1p_norm(c, g, 4.0) == doctest::Approx(2.5).epsilon(1e-13));
    }

    SUBCASE("Jensen inequality on discrete norms") {
        for (int t = 0; t < 20; ++t) {
            const PhaseField phi = test::random_phase(g, 8, 100 + t);
            CHECK(l2_norm(velocity_average(phi, q), g) <= l2_norm_phase(phi, g, q));
        }
    }

    SUBCASE("norm tag dispatch") {
        ScalarField f(g, 1.0);
        CHECK(discrete_norm(f, g, NormKind::L2_Omega) == doctest::Approx(1.0));
        CHECK_THROWS_AS(discrete_norm(f, g, NormKind::L2_X), PreconditionError);
        const PhaseField u(g, 8, 1.0);
        CHECK(discrete_norm(u, g, q, NormKind::L2_X) == doctest::Approx(1.0));
        CHECK_THROWS_AS(discrete_norm(u, g, q, NormKind::Lp_Omega), PreconditionError);
    }
}

TEST_CASE("grid invariants and vicinity") {
    CHECK_THROWS_AS(SpatialGrid(2, 8, 0, 0, 1, 1), PreconditionError);
    CHECK_THROWS_AS(SpatialGrid(8, 8, 0, 0, -1, 1), PreconditionError);
    CHECK_THROWS_AS(SpatialGrid(8, 8, 0, 0, 1, 1, 0.6), PreconditionError);

    const SpatialGrid g(8, 8, 0, 0, 2, 1, 0.2);
    CHECK(g.diameter() == doctest::Approx(std::sqrt(5.0)));
    CHECK(g.in_boundary_layer(0, 0));
    CHECK(g.in_boundary_layer(0, 4));
    CHECK_FALSE(g.in_boundary_layer(4, 4));
}

TEST_CASE("validate_coefficients certificates") {
    const SpatialGrid g = unit_grid(8, 0.125);

    SUBCASE("nu and C2 for the unit medium") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 1.0, 1.0);
        const CoefficientCertificate cert = validate_coefficients(c, g, Regime::Transport);
        CHECK(cert.ok);
        CHECK(cert.nu == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(cert.C2 == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(cert.sigma_bar == doctest::Approx(2.0));
    }

    SUBCASE("0.1 / 0.9 split") {
        CoefficientSet c = CoefficientSet::constants(g, 0.5, 0.1, 0.5, 0.9, 1.0, 0.1, 1.0);
        const CoefficientCertificate cert = validate_coefficients(c, g, Regime::Transport);
        CHECK(cert.nu == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(cert.sigma_bar == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("zero field value rejected") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 0.5, 2.0);
        c.sigma_a.at(3, 3) = 0.0;
        CHECK_THROWS_AS(validate_coefficients(c, g, Regime::Transport), PreconditionError);
        const CoefficientCertificate cert =
            validate_coefficients(c, g, Regime::Transport, false);
        CHECK_FALSE(cert.ok);
    }

    SUBCASE("vicinity constancy of sigma_a enforced") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 0.5, 2.0);
        c.sigma_a.at(0, 0) = 1.5; // inside the delta-vicinity
        CHECK_THROWS_AS(validate_coefficients(c, g, Regime::Transport), PreconditionError);
        // A bump away from the vicinity passes.
        CoefficientSet cb = c;
        cb.sigma_a = test::bump_field(g, 1.0, 0.5, 0.5, 0.5, 0.15);
        CHECK(validate_coefficients(cb, g, Regime::Transport).ok);
    }
}
