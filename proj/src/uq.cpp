#include "qpat/uq.hpp"

#include <algorithm>
#include <cmath>

namespace qpat {

namespace {

ScalarField perturb(const ScalarField& f, const SpatialGrid& g, double eta,
                    PerturbationKind kind) {
    ScalarField out = f;
    if (kind == PerturbationKind::Constant) {
        for (double& v : out.data()) v *= 1.0 + eta;
        return out;
    }
    // Localized bump, vanishing on the delta-vicinity so the frozen layer
    // stays consistent.
    const double cx = 0.5 * (g.x0() + g.x1());
    const double cy = 0.5 * (g.y0() + g.y1());
    const double rad = 0.18 * std::min(g.width(), g.height());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            if (g.in_boundary_layer(i, j)) continue;
            const double dx = g.cx(i) - cx, dy = g.cy(j) - cy;
            out.at(i, j) *= 1.0 + eta * std::exp(-(dx * dx + dy * dy) / (2.0 * rad * rad));
        }
    return out;
}

PhaseField two_photon_source(const CoefficientSet& c, const AngularQuadrature& q,
                             const PhaseField& u1) {
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

bool bitwise_equal(const ScalarField& a, const ScalarField& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

} // namespace

UQSweepResult uq_transport_sweep(const CoefficientSet& c_true, const SpatialGrid& g,
                                 const AngularQuadrature& q, const ScatteringKernel& kern,
                                 const BoundarySource& src, const std::vector<double>& etas,
                                 const UQOptions& opt) {
    UQSweepResult res;
    res.regime = Regime::Transport;

    // One data set from the true coefficients.
    const LinearizationBundle bundle = linearize_transport(c_true, g, q, kern, src,
                                                           opt.recon.transport);
    const InternalData data = linearized_data(c_true, g, bundle, &q);

    // Reference reconstruction with the true sigma_s.
    auto run_recon = [&](const ScalarField& sigma_s)
        -> std::tuple<ScalarField, ScalarField, CoefficientSet> {
        CoefficientSet c = c_true;
        c.sigma_s = sigma_s;
        ReconstructionResult ra =
            reconstruct_sigma_a_transport(c, g, q, kern, src, data.h1, opt.recon);
        c.sigma_a = ra.recovered;
        ReconstructionResult rb =
            reconstruct_sigma_b_transport(c, g, q, kern, src, data.h2, opt.recon);
        c.sigma_b = rb.recovered;
        return {ra.recovered, rb.recovered, c};
    };

    auto [sa_ref, sb_ref, c_ref] = run_recon(c_true.sigma_s);
    res.sigma_a_reference = sa_ref;
    res.sigma_b_reference = sb_ref;
    const PhaseField u1_ref = solve_u1_transport(c_ref, g, q, kern, src, opt.recon.transport);
    const PhaseField u2_ref =
        solve_u2_transport(c_ref, g, q, kern, u1_ref, opt.recon.transport);
    const PhaseField k_u1 = apply_scattering(u1_ref, kern, q);

    std::vector<double> sorted = etas;
    std::sort(sorted.begin(), sorted.end());

    double se = 0.0, sm = 0.0;
    for (double eta : sorted) {
        UQRow row;
        row.eta = eta;
        const ScalarField sigma_s_t = perturb(c_true.sigma_s, g, eta, opt.perturbation);
        row.mis_norm = l2_norm(sigma_s_t - c_true.sigma_s, g);
        try {
            auto [sa_t, sb_t, c_t] = run_recon(sigma_s_t);
            row.recon_ok = true;
            row.err_a = l2_norm(sa_t - sa_ref, g);
            row.err_b = l2_norm(sb_t - sb_ref, g);
            row.err_a_lp = lp_norm(sa_t - sa_ref, g, opt.p);
            row.err_b_lp = lp_norm(sb_t - sb_ref, g, opt.p);
            if (eta == 0.0)
                row.bitwise_zero = bitwise_equal(sa_t, sa_ref) && bitwise_equal(sb_t, sb_ref);
            if (row.mis_norm > 0.0) {
                row.ratio = (row.err_a + row.err_b) / row.mis_norm;
                se += (row.err_a + row.err_b) * row.mis_norm;
                sm += row.mis_norm * row.mis_norm;
                res.c_max = std::max(res.c_max, row.ratio);
            }

            // Proof-identity diagnostics for the difference fields.
            const PhaseField u1_t = solve_u1_transport(c_t, g, q, kern, src,
                                                       opt.recon.transport);
            const PhaseField w1 = u1_ref - u1_t;

            // EQ-style intermediate bound: ||w~||_L2(X) <=
            // C2 (||(sa_ref - sa~) u1|| + ||(ss - ss~) K(u1)||).
            const CoefficientCertificate cc =
                validate_coefficients(c_t, g, Regime::Transport, false);
            PhaseField t1 = u1_ref, t2 = k_u1;
            for (std::size_t cell = 0; cell < t1.n_cells(); ++cell) {
                const double da = sa_ref[cell] - c_t.sigma_a[cell];
                const double ds = c_true.sigma_s[cell] - sigma_s_t[cell];
                for (int k = 0; k < q.n_dirs(); ++k) {
                    t1(cell, k) *= da;
                    t2(cell, k) *= ds;
                }
            }
            row.intermediate_lhs = l2_norm_phase(w1, g, q);
            row.intermediate_rhs =
                cc.C2 * (l2_norm_phase(t1, g, q) + l2_norm_phase(t2, g, q));
            row.intermediate_ok = row.intermediate_lhs <= row.intermediate_rhs * (1.0 + 1e-9);

            // w~ solves the sigma~ transport problem with the coefficient-
            // difference source; verified through the sweep fixed-point map.
            const BoundarySource zero(g, q);
            const PhaseField m_w1 =
                transport_fixed_point_apply(c_t, g, q, kern, zero, nullptr, w1);
            const PhaseField m_ref =
                transport_fixed_point_apply(c_ref, g, q, kern, src, nullptr, u1_ref);
            const PhaseField m_tilde =
                transport_fixed_point_apply(c_t, g, q, kern, src, nullptr, u1_ref);
            PhaseField defect = w1;
            defect -= m_w1;
            defect -= m_ref;
            defect += m_tilde;
            row.defect_u1 = linf_norm(defect);

            const PhaseField u2_t =
                solve_u2_transport(c_t, g, q, kern, u1_t, opt.recon.transport);
            const PhaseField w2 = u2_ref - u2_t;
            const PhaseField s2_ref = two_photon_source(c_ref, q, u1_ref);
            const PhaseField s2_t = two_photon_source(c_t, q, u1_t);
            const PhaseField m_w2 =
                transport_fixed_point_apply(c_t, g, q, kern, zero, nullptr, w2);
            const PhaseField m2_ref =
                transport_fixed_point_apply(c_ref, g, q, kern, zero, &s2_ref, u2_ref);
            const PhaseField m2_t =
                transport_fixed_point_apply(c_t, g, q, kern, zero, &s2_t, u2_ref);
            PhaseField defect2 = w2;
            defect2 -= m_w2;
            defect2 -= m2_ref;
            defect2 += m2_t;
            row.defect_u2 = linf_norm(defect2);

            const double scale =
                std::max({src.max_abs(), linf_norm(s2_ref), linf_norm(s2_t), 1e-300});
            row.defect_tol = 10.0 * opt.recon.transport.tol_source * scale;
            row.defects_ok = row.defect_u1 <= row.defect_tol && row.defect_u2 <= row.defect_tol;
        } catch (const Error& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    if (sm > 0.0) res.c_lsq = se / sm;
    return res;
}

UQSweepResult uq_diffusion_sweep(const CoefficientSet& c_true, const SpatialGrid& g,
                                 const DirichletTrace& bc, const std::vector<double>& etas,
                                 const UQOptions& opt) {
    UQSweepResult res;
    res.regime = Regime::Diffusion;

    const LinearizationBundle bundle = linearize_diffusion(c_true, g, bc, opt.recon.diffusion);
    const InternalData data = linearized_data(c_true, g, bundle);

    auto run_recon = [&](const ScalarField& gamma)
        -> std::tuple<ScalarField, ScalarField, CoefficientSet> {
        CoefficientSet c = c_true;
        c.gamma = gamma;
        ReconstructionResult ra = reconstruct_sigma_a_diffusion(c, g, bc, data.h1, opt.recon);
        c.sigma_a = ra.recovered;
        ReconstructionResult rb = reconstruct_sigma_b_diffusion(c, g, bc, data.h2, opt.recon);
        c.sigma_b = rb.recovered;
        return {ra.recovered, rb.recovered, c};
    };

    auto [sa_ref, sb_ref, c_ref] = run_recon(c_true.gamma);
    res.sigma_a_reference = sa_ref;
    res.sigma_b_reference = sb_ref;
    const ScalarField u1_ref = solve_u1_diffusion(c_ref, g, bc, opt.recon.diffusion);
    const ScalarField u2_ref = solve_u2_diffusion(c_ref, g, u1_ref, opt.recon.diffusion);

    std::vector<double> sorted = etas;
    std::sort(sorted.begin(), sorted.end());

    double se = 0.0, sm = 0.0;
    for (double eta : sorted) {
        UQRow row;
        row.eta = eta;
        const ScalarField gamma_t = perturb(c_true.gamma, g, eta, opt.perturbation);
        ScalarField rel(g);
        for (std::size_t cell = 0; cell < rel.size(); ++cell)
            rel[cell] = (gamma_t[cell] - c_true.gamma[cell]) / gamma_t[cell];
        row.mis_norm = w1p_norm(rel, g, opt.p);
        try {
            auto [sa_t, sb_t, c_t] = run_recon(gamma_t);
            row.recon_ok = true;
            row.err_a = l2_norm(sa_t - sa_ref, g);
            row.err_b = l2_norm(sb_t - sb_ref, g);
            row.err_a_lp = lp_norm(sa_t - sa_ref, g, opt.p);
            row.err_b_lp = lp_norm(sb_t - sb_ref, g, opt.p);
            if (eta == 0.0)
                row.bitwise_zero = bitwise_equal(sa_t, sa_ref) && bitwise_equal(sb_t, sb_ref);
            if (row.mis_norm > 0.0) {
                row.ratio = (row.err_a_lp + row.err_b_lp) / row.mis_norm;
                se += (row.err_a_lp + row.err_b_lp) * row.mis_norm;
                sm += row.mis_norm * row.mis_norm;
                res.c_max = std::max(res.c_max, row.ratio);
            }

            // First-linearization sensitivity: ||u1 - u1~||_W2p vs the
            // relative gamma misspecification.
            const ScalarField u1_t = solve_u1_diffusion(c_t, g, bc, opt.recon.diffusion);
            row.intermediate_lhs = w2p_norm(u1_ref - u1_t, g, opt.p);
            row.intermediate_rhs = row.mis_norm; // constant fitted post hoc as c_emp
            if (row.mis_norm > 0.0) {
                const double r = row.intermediate_lhs / row.mis_norm;
                res.c_emp_intermediate = std::max(res.c_emp_intermediate, r);
                row.intermediate_ok = std::isfinite(r);
            } else {
                row.intermediate_ok = row.intermediate_lhs <= 1e-12;
            }

            // Difference-field identities through the elliptic residuals.
            const EllipticOperator A_ref(g, c_ref.gamma, c_ref.sigma_a);
            const EllipticOperator A_t(g, c_t.gamma, c_t.sigma_a);
            const ScalarField w1 = u1_ref - u1_t;
            const DirichletTrace zero_bc(g, 0.0);
            const ScalarField r_w1 = A_t.residual(w1, zero_bc, ScalarField(g, 0.0));
            const ScalarField r_ref = A_ref.residual(u1_ref, bc, ScalarField(g, 0.0));
            const ScalarField r_t = A_t.residual(u1_ref, bc, ScalarField(g, 0.0));
            const ScalarField defect1 = r_w1 - (r_t - r_ref);
            row.defect_u1 = l2_norm(defect1, g);

            const ScalarField u2_t = solve_u2_diffusion(c_t, g, u1_t, opt.recon.diffusion);
            const ScalarField w2 = u2_ref - u2_t;
            ScalarField s2_ref(g), s2_t(g);
            for (std::size_t cell = 0; cell < s2_ref.size(); ++cell) {
                s2_ref[cell] = -2.0 * c_ref.sigma_b[cell] * u1_ref[cell] * u1_ref[cell];
                s2_t[cell] = -2.0 * c_t.sigma_b[cell] * u1_t[cell] * u1_t[cell];
            }
            const ScalarField r_w2 = A_t.residual(w2, zero_bc, ScalarField(g, 0.0));
            const ScalarField r2_ref = A_ref.residual(u2_ref, zero_bc, s2_ref);
            const ScalarField r2_t = A_t.residual(u2_ref, zero_bc, s2_t);
            const ScalarField defect2 = r_w2 - (r2_t - r2_ref);
            row.defect_u2 = l2_norm(defect2, g);

            // CG leaves residuals ~ tol * ||b||_2; compare in the same scale.
            auto b2 = [&](const EllipticOperator& A, const DirichletTrace& tr,
                          const ScalarField& S) {
                const std::vector<double> b = A.rhs(S, tr);
                double s = 0.0;
                for (double v : b) s += v * v;
                return std::sqrt(s * g.cell_area());
            };
            const double scale = std::max({b2(A_ref, bc, ScalarField(g, 0.0)),
                                           b2(A_t, bc, ScalarField(g, 0.0)),
                                           b2(A_ref, zero_bc, s2_ref), 1e-300});
            row.defect_tol = 10.0 * opt.recon.diffusion.tol_cg * scale;
            row.defects_ok = row.defect_u1 <= row.defect_tol && row.defect_u2 <= row.defect_tol;
        } catch (const Error& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    if (sm > 0.0) res.c_lsq = se / sm;
    return res;
}

} // namespace qpat
