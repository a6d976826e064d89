#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qpat/reconstruction.hpp"

using namespace qpat;
using test::rel_l2_error;
using test::unit_grid;

namespace {

BoundarySource smooth_source(const SpatialGrid& g, const AngularQuadrature& q,
                             double scale = 1.0) {
    return BoundarySource::from_function(g, q, [&g, scale](Vec2 x, Vec2) {
        return scale * test::smooth_boundary_profile(g, x);
    });
}

struct TransportSetup {
    SpatialGrid g = unit_grid(32, 1.0 / 16);
    AngularQuadrature q = AngularQuadrature::uniform(12);
    ScatteringKernel kern = ScatteringKernel::isotropic(q);
    CoefficientSet c;
    BoundarySource src;

    TransportSetup() : src(smooth_source(g, q)) {
        c = CoefficientSet::constants(g, 1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 2.0);
        c.sigma_a = test::bump_field(g, 0.9, 0.5, 0.4, 0.6, 0.18);
        c.sigma_b = test::bump_field(g, 0.8, 0.6, 0.6, 0.4, 0.2);
        c.sigma_s = test::bump_field(g, 1.0, 0.3, 0.5, 0.5, 0.25);
    }
};

} // namespace

TEST_CASE("admissibility certificate") {
    const SpatialGrid g = unit_grid(24, 1.0 / 12);
    const AngularQuadrature q = AngularQuadrature::uniform(12);
    const ScatteringKernel kern = ScatteringKernel::isotropic(q);

    SUBCASE("Pi matches a direct evaluation for homogeneous data") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 1.0, 1.0);
        const BoundarySource src = BoundarySource::constant(g, q, 1.0);
        const LinearizationBundle b = linearize_transport(c, g, q, kern, src);
        const InternalData d = linearized_data(c, g, b, &q);
        const AdmissibilityCertificate cert = certify_admissibility(c, g, q, kern, src, d.h1);
        // C2 = 1/(nu c0) = 2, C0 = 1, ratio = g / min boundary h1.
        double h1min = std::numeric_limits<double>::infinity();
        for (Side s : all_sides)
            for (int f = 0; f < g.n_faces(s); ++f)
                h1min = std::min(h1min, d.h1[g.face_cell(s, f)]);
        CHECK(cert.C2 == doctest::Approx(2.0));
        CHECK(cert.Pi == doctest::Approx(2.0 * 1.0 / h1min).epsilon(1e-12));
        CHECK(cert.boundary_ratio > 1.0); // the sup of g/<u1> always exceeds 1
        CHECK_FALSE(cert.in_A2);
        CHECK(std::isnan(cert.stability_constant));
    }

    SUBCASE("constant h1 gives alpha = inf sigma_a and A1 membership") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 0.7, 1, 1, 1, 0.2, 2.0);
        const BoundarySource src = BoundarySource::constant(g, q, 1.0);
        const ScalarField h1(g, 0.5); // synthetic spatially constant data
        const AdmissibilityCertificate cert = certify_admissibility(c, g, q, kern, src, h1);
        CHECK(cert.alpha == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(cert.in_A1);
    }

    SUBCASE("nonpositive h1 rejected") {
        CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 0.2, 2.0);
        const BoundarySource src = BoundarySource::constant(g, q, 1.0);
        ScalarField h1(g, 1.0);
        h1.at(5, 5) = 0.0;
        CHECK_THROWS_AS(certify_admissibility(c, g, q, kern, src, h1), PreconditionError);
    }

    SUBCASE("compensated illumination reaches A1 and satisfies the maximum bound") {
        // Weakly scattering medium; the source is flattened by one pass of
        // compensation so that <u1> has a small logarithmic gradient.
        const SpatialGrid g2 = unit_grid(32, 1.0 / 16);
        const AngularQuadrature q2 = AngularQuadrature::uniform(12);
        const ScatteringKernel k2 = ScatteringKernel::isotropic(q2);
        CoefficientSet c = CoefficientSet::constants(g2, 1, 0.2, 1, 0.05, 1, 0.04, 2.5);
        const BoundarySource flat = BoundarySource::constant(g2, q2, 1.0);
        const PhaseField u0 = solve_u1_transport(c, g2, q2, k2, flat);
        const ScalarField m0 = velocity_average(u0, q2);
        double msum = 0.0;
        int cnt = 0;
        for (Side s : all_sides)
            for (int f = 0; f < g2.n_faces(s); ++f) {
                msum += m0[g2.face_cell(s, f)];
                ++cnt;
            }
        const double mbar = msum / cnt;
        BoundarySource comp(g2, q2);
        for (Side s : all_sides)
            for (int f = 0; f < g2.n_faces(s); ++f)
                for (int k = 0; k < q2.n_dirs(); ++k)
                    if (comp.is_inflow(s, k))
                        comp.at(s, f, k) = mbar / m0[g2.face_cell(s, f)];
        const LinearizationBundle b = linearize_transport(c, g2, q2, k2, comp);
        const InternalData d = linearized_data(c, g2, b, &q2);
        const AdmissibilityCertificate cert =
            certify_admissibility(c, g2, q2, k2, comp, d.h1);
        CHECK(cert.alpha > 0.0);
        CHECK(cert.in_A1);
        // Lemma bound holds in A1: max u1/<u1> <= boundary ratio.
        CHECK(cert.lemma_ok);
        CHECK(cert.lemma_lhs <= cert.lemma_rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("transport sigma_a reconstruction") {
    const TransportSetup s;
    const LinearizationBundle b = linearize_transport(s.c, s.g, s.q, s.kern, s.src);
    const InternalData d = linearized_data(s.c, s.g, b, &s.q);

    SUBCASE("inverse-crime round trip") {
        const ReconstructionResult r =
            reconstruct_sigma_a_transport(s.c, s.g, s.q, s.kern, s.src, d.h1);
        CHECK(rel_l2_error(r.recovered, s.c.sigma_a, s.g) <= 1e-8);
        CHECK(r.data_misfit <= 1e-8);
        CHECK(r.masked_cells == 0);
        // Recovered field equals the declared values on the vicinity exactly.
        for (int j = 0; j < s.g.ny(); ++j)
            for (int i = 0; i < s.g.nx(); ++i)
                if (s.g.in_boundary_layer(i, j))
                    CHECK(r.recovered.at(i, j) == s.c.sigma_a.at(i, j));
    }

    SUBCASE("constant truth with exact initial guess converges in one iteration") {
        CoefficientSet cc = CoefficientSet::constants(s.g, 1.0, 0.9, 0.7, 1.1, 1, 0.3, 2.0);
        const LinearizationBundle bc = linearize_transport(cc, s.g, s.q, s.kern, s.src);
        const InternalData dc = linearized_data(cc, s.g, bc, &s.q);
        ReconstructionOptions opt;
        opt.initial_guess = cc.sigma_a;
        const ReconstructionResult r =
            reconstruct_sigma_a_transport(cc, s.g, s.q, s.kern, s.src, dc.h1, opt);
        CHECK(r.iterations == 1);
        CHECK(r.residual <= 1e-12);
    }

    SUBCASE("relative error is O(eta) under data perturbation") {
        double errs[2];
        int idx = 0;
        for (double eta : {1e-3, 5e-4}) {
            ScalarField h1p = d.h1;
            h1p *= 1.0 + eta;
            const ReconstructionResult r =
                reconstruct_sigma_a_transport(s.c, s.g, s.q, s.kern, s.src, h1p);
            errs[idx++] = rel_l2_error(r.recovered, s.c.sigma_a, s.g);
        }
        CHECK(errs[0] <= 5.0 * 1e-3);  // O(eta) with a modest constant
        CHECK(errs[1] <= 0.7 * errs[0]);
    }

    SUBCASE("unlit data masks every cell and is rejected") {
        const BoundarySource zero(s.g, s.q);
        CHECK_THROWS_AS(reconstruct_sigma_a_transport(s.c, s.g, s.q, s.kern, zero, d.h1),
                        PreconditionError);
    }
}

TEST_CASE("transport sigma_b reconstruction") {
    const TransportSetup s;
    const LinearizationBundle b = linearize_transport(s.c, s.g, s.q, s.kern, s.src);
    const InternalData d = linearized_data(s.c, s.g, b, &s.q);

    SUBCASE("inverse-crime round trip with contraction diagnostics") {
        const ReconstructionResult r =
            reconstruct_sigma_b_transport(s.c, s.g, s.q, s.kern, s.src, d.h2);
        CHECK(rel_l2_error(r.recovered, s.c.sigma_b, s.g) <= 1e-8);
        CHECK(r.data_misfit <= 1e-8);
        REQUIRE(r.certificate.has_value());
        // Updates contract monotonically after iteration 2 and stay below
        // the certificate Pi + 0.05 (and in practice below 1).
        for (std::size_t i = 1; i + 1 < r.update_history.size(); ++i)
            CHECK(r.update_history[i + 1] <= r.update_history[i] * (1.0 + 1e-9));
        CHECK(r.observed_contraction <= r.certificate->Pi + 0.05);
        CHECK(r.observed_contraction < 1.0);
        for (int j = 0; j < s.g.ny(); ++j)
            for (int i = 0; i < s.g.nx(); ++i)
                if (s.g.in_boundary_layer(i, j))
                    CHECK(r.recovered.at(i, j) == s.c.sigma_b.at(i, j));
    }

    SUBCASE("A2 enforcement trips on the conservative Pi") {
        ReconstructionOptions opt;
        opt.enforce_a2 = true;
        CHECK_THROWS_WITH_AS(
            reconstruct_sigma_b_transport(s.c, s.g, s.q, s.kern, s.src, d.h2, opt),
            doctest::Contains("A2: Pi >= 1"), PreconditionError);
    }

    SUBCASE("zero two-photon truth is recovered with a released floor") {
        CoefficientSet c0 = s.c;
        c0.sigma_b = ScalarField(s.g, 0.0);
        const LinearizationBundle b0 = linearize_transport(c0, s.g, s.q, s.kern, s.src);
        const InternalData d0 = linearized_data(c0, s.g, b0, &s.q);
        CHECK(d0.h2.max_abs() == 0.0);
        ReconstructionOptions opt;
        opt.clamp_lo = 0.0;
        opt.clamp_hi = s.c.C0;
        const ReconstructionResult r =
            reconstruct_sigma_b_transport(c0, s.g, s.q, s.kern, s.src, d0.h2, opt);
        CHECK(linf_norm(r.recovered) <= 1e-10);
    }

    SUBCASE("stability of the data-to-coefficient map over perturbed pairs") {
        // EQ-Stab-style check: the certificate constant is unusable whenever
        // Pi >= 1 (always, by the max principle), so the inequality is
        // checked with the recorded empirical constant instead.
        const PhaseField u1 = b.u1_transport;
        const ScalarField m1 = velocity_average(u1, s.q);
        std::vector<double> ratios_x, ratios_b;
        for (int t = 0; t < 10; ++t) {
            CoefficientSet ct = s.c;
            ct.sigma_b = test::bump_field(s.g, 0.8, 0.5 + 0.05 * t, 0.55, 0.45,
                                          0.15 + 0.01 * t);
            const PhaseField u2t = solve_u2_transport(ct, s.g, s.q, s.kern, u1);
            const ScalarField m2t = velocity_average(u2t, s.q);
            ScalarField h2t(s.g);
            for (std::size_t cell = 0; cell < h2t.size(); ++cell)
                h2t[cell] = ct.xi[cell] * (ct.sigma_a[cell] * m2t[cell] +
                                           2.0 * ct.sigma_b[cell] * m1[cell] * m1[cell]);
            PhaseField w(s.g, s.q.n_dirs());
            for (std::size_t cell = 0; cell < w.n_cells(); ++cell)
                for (int k = 0; k < s.q.n_dirs(); ++k)
                    w(cell, k) = (s.c.sigma_b[cell] - ct.sigma_b[cell]) * m1[cell] * u1(cell, k);
            const double lhs = l2_norm_phase(w, s.g, s.q);
            const double rhs = l2_norm(d.h2 - h2t, s.g);
            REQUIRE(rhs > 0.0);
            ratios_x.push_back(lhs / rhs);
            ratios_b.push_back(l2_norm(s.c.sigma_b - ct.sigma_b, s.g) / rhs);
        }
        const double c_emp = *std::max_element(ratios_x.begin(), ratios_x.end());
        const double c_emp_b = *std::max_element(ratios_b.begin(), ratios_b.end());
        CHECK(std::isfinite(c_emp));
        CHECK(std::isfinite(c_emp_b));
        for (double r : ratios_x) CHECK(r <= c_emp * (1.0 + 1e-12));
        for (double r : ratios_b) CHECK(r <= c_emp_b * (1.0 + 1e-12));
        // The Lipschitz behavior is genuine: the ratios cluster.
        const double lo = *std::min_element(ratios_x.begin(), ratios_x.end());
        CHECK(c_emp / lo <= 3.0);
    }
}

TEST_CASE("diffusion sigma_a reconstruction") {
    const SpatialGrid g = unit_grid(32, 1.0 / 16);
    CoefficientSet c = CoefficientSet::constants(g, 1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 2.0);
    c.sigma_a = test::bump_field(g, 0.9, 0.4, 0.45, 0.55, 0.2);
    c.sigma_b = test::bump_field(g, 1.0, 0.8, 0.6, 0.4, 0.18);
    c.gamma = test::bump_field(g, 1.0, 0.5, 0.5, 0.5, 0.3);
    const DirichletTrace tr = DirichletTrace::from_function(
        g, [&](Vec2 x) { return test::smooth_boundary_profile(g, x); });
    const LinearizationBundle b = linearize_diffusion(c, g, tr);
    const InternalData d = linearized_data(c, g, b);

    SUBCASE("round trip, trace identity, vicinity freeze") {
        const ReconstructionResult r = reconstruct_sigma_a_diffusion(c, g, tr, d.h1);
        CHECK(rel_l2_error(r.recovered, c.sigma_a, g) <= 1e-8);
        REQUIRE(r.recovered_trace.has_value());
        for (Side s : all_sides)
            for (int f = 0; f < g.n_faces(s); ++f) {
                const std::size_t cell = g.face_cell(s, f);
                CHECK(r.recovered_trace->at(s, f) ==
                      doctest::Approx(d.h1[cell] / (c.xi[cell] * tr.at(s, f))));
            }
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i)
                if (g.in_boundary_layer(i, j))
                    CHECK(r.recovered.at(i, j) == c.sigma_a.at(i, j));
    }

    SUBCASE("constant truth, exact guess: one iteration") {
        CoefficientSet cc = CoefficientSet::constants(g, 1.0, 0.8, 0.6, 1.0, 1.2, 0.3, 2.0);
        const LinearizationBundle bc = linearize_diffusion(cc, g, tr);
        const InternalData dc = linearized_data(cc, g, bc);
        ReconstructionOptions opt;
        opt.initial_guess = cc.sigma_a;
        const ReconstructionResult r = reconstruct_sigma_a_diffusion(cc, g, tr, dc.h1, opt);
        CHECK(r.iterations == 1);
    }
}

TEST_CASE("diffusion sigma_b reconstruction via the auxiliary problem") {
    const SpatialGrid g = unit_grid(32, 1.0 / 16);
    CoefficientSet c = CoefficientSet::constants(g, 1.0, 1.0, 1.0, 1.0, 1.0, 0.3, 2.0);
    c.sigma_a = test::bump_field(g, 0.9, 0.4, 0.45, 0.55, 0.2);
    c.sigma_b = test::bump_field(g, 1.0, 0.8, 0.6, 0.4, 0.18); // 1 + bump
    c.gamma = test::bump_field(g, 1.0, 0.5, 0.5, 0.5, 0.3);
    const DirichletTrace tr = DirichletTrace::from_function(
        g, [&](Vec2 x) { return test::smooth_boundary_profile(g, x); });
    const LinearizationBundle b = linearize_diffusion(c, g, tr);
    const InternalData d = linearized_data(c, g, b);

    SUBCASE("discrete-identity exactness of the round trip") {
        const ReconstructionResult r = reconstruct_sigma_b_diffusion(c, g, tr, d.h2);
        CHECK(rel_l2_error(r.recovered, c.sigma_b, g) <= 1e-8);
        CHECK(r.data_misfit <= 1e-8);
    }

    SUBCASE("zero truth gives the zero field") {
        CoefficientSet c0 = c;
        c0.sigma_b = ScalarField(g, 0.0);
        const LinearizationBundle b0 = linearize_diffusion(c0, g, tr);
        const InternalData d0 = linearized_data(c0, g, b0);
        CHECK(d0.h2.max_abs() == 0.0);
        ReconstructionOptions opt;
        opt.clamp_lo = 0.0;
        opt.clamp_hi = c.C0;
        const ReconstructionResult r = reconstruct_sigma_b_diffusion(c0, g, tr, d0.h2, opt);
        CHECK(linf_norm(r.recovered) <= 1e-10);
    }

    SUBCASE("data pairs: W2p stability ratios are finite and clustered") {
        const ScalarField u1 = b.u1_diffusion;
        std::vector<double> ratios;
        for (int t = 0; t < 10; ++t) {
            CoefficientSet ct = c;
            ct.sigma_b = test::bump_field(g, 1.0, 0.6 + 0.06 * t, 0.55, 0.45, 0.16 + 0.01 * t);
            const ScalarField u2t = solve_u2_diffusion(ct, g, u1);
            ScalarField h2t(g);
            for (std::size_t cell = 0; cell < h2t.size(); ++cell)
                h2t[cell] = ct.xi[cell] * (ct.sigma_a[cell] * u2t[cell] +
                                           2.0 * ct.sigma_b[cell] * u1[cell] * u1[cell]);
            ScalarField diffb = c.sigma_b - ct.sigma_b;
            const double lhs = lp_norm(diffb, g, 4.0);
            const double rhs = w2p_norm(d.h2 - h2t, g, 4.0);
            REQUIRE(rhs > 0.0);
            ratios.push_back(lhs / rhs);
        }
        const double c_emp = *std::max_element(ratios.begin(), ratios.end());
        const double lo = *std::min_element(ratios.begin(), ratios.end());
        CHECK(std::isfinite(c_emp));
        for (double r : ratios) CHECK(r <= c_emp * (1.0 + 1e-12));
        CHECK(c_emp / lo <= 3.0);
    }
}
