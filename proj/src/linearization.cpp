#include "qpat/linearization.hpp"

#include <cmath>

namespace qpat {

namespace {

PhaseField two_photon_source(const CoefficientSet& c, const AngularQuadrature& q,
                             const PhaseField& u1) {
    // -2 sigma_b <u1> u1
    const auto& w = q.weights();
    PhaseField s(u1.nx(), u1.ny(), u1.n_dirs());
    for (std::size_t cell = 0; cell < u1.n_cells(); ++cell) {
        double mean = 0.0;
        for (int k = 0; k < u1.n_dirs(); ++k) mean += w[k] * u1(cell, k);
        const double f = -2.0 * c.sigma_b[cell] * mean;
        for (int k = 0; k < u1.n_dirs(); ++k) s(cell, k) = f * u1(cell, k);
    }
    return s;
}

} // namespace

PhaseField solve_u1_transport(const CoefficientSet& c, const SpatialGrid& g,
                              const AngularQuadrature& q, const ScatteringKernel& kern,
                              const BoundarySource& src, const TransportOptions& opt) {
    return solve_linear_rte(c, g, q, kern, src, nullptr, opt).first;
}

PhaseField solve_u2_transport(const CoefficientSet& c, const SpatialGrid& g,
                              const AngularQuadrature& q, const ScatteringKernel& kern,
                              const PhaseField& u1, const TransportOptions& opt) {
    const PhaseField s = two_photon_source(c, q, u1);
    const BoundarySource zero(g, q);
    return solve_linear_rte(c, g, q, kern, zero, &s, opt).first;
}

ScalarField solve_u1_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                               const DirichletTrace& bc, const DiffusionOptions& opt) {
    return solve_linear_diffusion(c, g, bc, ScalarField(), opt).first;
}

ScalarField solve_u2_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                               const ScalarField& u1, const DiffusionOptions& opt) {
    ScalarField s(g);
    for (std::size_t cell = 0; cell < u1.size(); ++cell)
        s[cell] = -2.0 * c.sigma_b[cell] * u1[cell] * u1[cell];
    return solve_linear_diffusion(c, g, DirichletTrace(g, 0.0), s, opt).first;
}

LinearizationBundle linearize_transport(const CoefficientSet& c, const SpatialGrid& g,
                                        const AngularQuadrature& q, const ScatteringKernel& kern,
                                        const BoundarySource& src, const TransportOptions& opt) {
    LinearizationBundle b;
    b.regime = Regime::Transport;
    b.u1_transport = solve_u1_transport(c, g, q, kern, src, opt);
    b.u2_transport = solve_u2_transport(c, g, q, kern, b.u1_transport, opt);
    return b;
}

LinearizationBundle linearize_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                        const DirichletTrace& bc, const DiffusionOptions& opt) {
    LinearizationBundle b;
    b.regime = Regime::Diffusion;
    b.u1_diffusion = solve_u1_diffusion(c, g, bc, opt);
    b.u2_diffusion = solve_u2_diffusion(c, g, b.u1_diffusion, opt);
    return b;
}

PhaseField solve_derivative_equation_transport(const CoefficientSet& c, const SpatialGrid& g,
                                               const AngularQuadrature& q,
                                               const ScatteringKernel& kern,
                                               const PhaseField& u_eps,
                                               const BoundarySource& bc, const PhaseField* rhs,
                                               const TransportOptions& opt) {
    const auto& w = q.weights();
    const int nv = q.n_dirs();

    // sigma_b <u_eps> acts as extra direction-independent absorption.
    CoefficientSet cm = c;
    ScalarField mean_u(g);
    for (std::size_t cell = 0; cell < u_eps.n_cells(); ++cell) {
        double m = 0.0;
        for (int k = 0; k < nv; ++k) m += w[k] * u_eps(cell, k);
        mean_u[cell] = m;
        cm.sigma_a[cell] = c.sigma_a[cell] + c.sigma_b[cell] * m;
    }

    const double scale = std::max({bc.max_abs(), rhs ? rhs->max_abs() : 0.0, 1e-300});
    PhaseField phi(g, nv);
    PhaseField src(g, nv);
    for (int outer = 1; outer <= opt.max_picard_iter; ++outer) {
        // src = rhs - sigma_b <phi> u_eps
        for (std::size_t cell = 0; cell < phi.n_cells(); ++cell) {
            double m = 0.0;
            for (int k = 0; k < nv; ++k) m += w[k] * phi(cell, k);
            const double f = -c.sigma_b[cell] * m;
            for (int k = 0; k < nv; ++k)
                src(cell, k) = f * u_eps(cell, k) + (rhs ? (*rhs)(cell, k) : 0.0);
        }
        PhaseField next = solve_linear_rte(cm, g, q, kern, bc, &src, opt).first;
        double delta = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i)
            delta = std::max(delta, std::abs(next.data()[i] - phi.data()[i]));
        phi = std::move(next);
        if (delta <= opt.tol_picard * scale) return phi;
    }
    throw DivergenceError("derivative equation: outer coupling iteration did not converge");
}

DerivativeCheckReport verify_derivatives_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                   const AngularQuadrature& q,
                                                   const ScatteringKernel& kern,
                                                   const BoundarySource& unit_src,
                                                   const std::vector<double>& eps_list,
                                                   const TransportOptions& opt) {
    if (eps_list.empty()) throw PreconditionError("verify_derivatives: empty eps list");
    DerivativeCheckReport rep;
    rep.eps = eps_list;
    rep.sigma_b_zero = c.sigma_b.max_abs() == 0.0;

    const PhaseField u1 = solve_u1_transport(c, g, q, kern, unit_src, opt);
    const PhaseField u2 = solve_u2_transport(c, g, q, kern, u1, opt);

    auto semilinear_at = [&](double eps) {
        const BoundarySource scaled = eps * unit_src;
        return solve_semilinear_rte(c, g, q, kern, scaled, opt).first;
    };

    for (double eps : eps_list) {
        const PhaseField ue = semilinear_at(eps);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t i = 0; i < ue.size(); ++i) {
            const double v = ue.data()[i];
            const double a = v / eps - u1.data()[i];
            const double b = 2.0 * (v - eps * u1.data()[i]) / (eps * eps) - u2.data()[i];
            m1 = std::max(m1, std::abs(a));
            m2 = std::max(m2, std::abs(b));
        }
        rep.r1.push_back(m1);
        rep.r2.push_back(m2);
    }
    for (std::size_t i = 0; i + 1 < eps_list.size(); ++i) {
        rep.r1_ratio.push_back(rep.r1[i + 1] > 0.0 ? rep.r1[i] / rep.r1[i + 1] : 0.0);
        rep.r2_ratio.push_back(rep.r2[i + 1] > 0.0 ? rep.r2[i] / rep.r2[i + 1] : 0.0);
    }
    if (!rep.sigma_b_zero) {
        for (double r : rep.r1_ratio)
            if (r < 1.5 || r > 2.5) rep.ratios_ok = false;
        for (double r : rep.r2_ratio)
            if (r < 1.5 || r > 2.5) rep.ratios_ok = false;
    }

    // Finite-eps derivative equations against centered divided differences.
    {
        const double eps = eps_list.front();
        const double de = 0.5 * eps;
        const PhaseField ue = semilinear_at(eps);
        const PhaseField up = semilinear_at(eps + de);
        const PhaseField um = semilinear_at(eps - de);

        const PhaseField u1e =
            solve_derivative_equation_transport(c, g, q, kern, ue, unit_src, nullptr, opt);
        PhaseField rhs2 = [&] {
            // -2 sigma_b <u1_eps> u1_eps
            const auto& w = q.weights();
            PhaseField s(g, q.n_dirs());
            for (std::size_t cell = 0; cell < u1e.n_cells(); ++cell) {
                double m = 0.0;
                for (int k = 0; k < q.n_dirs(); ++k) m += w[k] * u1e(cell, k);
                const double f = -2.0 * c.sigma_b[cell] * m;
                for (int k = 0; k < q.n_dirs(); ++k) s(cell, k) = f * u1e(cell, k);
            }
            return s;
        }();
        const BoundarySource zero(g, q);
        const PhaseField u2e =
            solve_derivative_equation_transport(c, g, q, kern, ue, zero, &rhs2, opt);

        double e1 = 0.0, e2 = 0.0;
        for (std::size_t i = 0; i < ue.size(); ++i) {
            const double dd1 = (up.data()[i] - um.data()[i]) / (2.0 * de);
            const double dd2 = (up.data()[i] - 2.0 * ue.data()[i] + um.data()[i]) / (de * de);
            e1 = std::max(e1, std::abs(dd1 - u1e.data()[i]));
            e2 = std::max(e2, std::abs(dd2 - u2e.data()[i]));
        }
        rep.u1_eps_dd_error = e1;
        rep.u2_eps_dd_error = e2;
        rep.u1_eps_dd_scale = u1e.max_abs();
        rep.u2_eps_dd_scale = std::max(u2e.max_abs(), 1e-300);
    }
    return rep;
}

} // namespace qpat
