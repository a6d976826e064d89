#include "qpat/reconstruction.hpp"

#include <cmath>
#include <sstream>

namespace qpat {

namespace {

double nu_of(const CoefficientSet& c) {
    double nu = 1.0;
    for (std::size_t i = 0; i < c.sigma_a.size(); ++i) {
        const double tot = c.sigma_a[i] + c.sigma_s[i];
        if (tot > 0.0) nu = std::min(nu, c.sigma_a[i] / tot);
    }
    return nu;
}

/// Positivity threshold below which cells are excluded from divisions and
/// error norms. With inf g > 0 the mask is empty in practice.
double transport_mask_threshold(const CoefficientSet& c, const SpatialGrid& g,
                                const BoundarySource& src) {
    const double gmin = src.min();
    if (!(gmin > 0.0)) return 1e-12;
    return std::max(positivity_lower_bound(c, g, src) / 10.0, 1e-12);
}

/// Diffusion analogue: comparison-function decay rate sqrt(sup sigma_a /
/// inf gamma) over the domain diameter.
double diffusion_mask_threshold(const CoefficientSet& c, const SpatialGrid& g,
                                const DirichletTrace& bc) {
    const double gmin = bc.min();
    if (!(gmin > 0.0)) return 1e-12;
    double sa = 0.0, gam = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.sigma_a.size(); ++i) {
        sa = std::max(sa, c.sigma_a[i]);
        gam = std::min(gam, c.gamma[i]);
    }
    const double eps_prime = gmin * std::exp(-g.diameter() * std::sqrt(sa / gam));
    return std::max(eps_prime / 10.0, 1e-12);
}

struct ClampBounds {
    double lo;
    double hi;
};

ClampBounds bounds_of(const CoefficientSet& c, const ReconstructionOptions& opt) {
    ClampBounds b{c.c0, c.C0};
    if (opt.clamp_hi > opt.clamp_lo) {
        b.lo = opt.clamp_lo;
        b.hi = opt.clamp_hi;
    }
    if (!(b.hi > b.lo) || !(b.hi > 0.0))
        throw PreconditionError("reconstruction: no usable clamp bounds");
    return b;
}

} // namespace

AdmissibilityCertificate certify_admissibility(const CoefficientSet& c, const SpatialGrid& g,
                                               const AngularQuadrature& q,
                                               const ScatteringKernel& kern,
                                               const BoundarySource& src, const ScalarField& h1,
                                               double alpha_min, const TransportOptions& opt) {
    if (h1.size() != g.n_cells())
        throw PreconditionError("certify: data shape mismatch");
    for (double v : h1.data())
        if (!(v > 0.0))
            throw PreconditionError("certify: h1 must be positive on unmasked cells");

    AdmissibilityCertificate cert;
    cert.alpha_min = alpha_min;
    cert.C0 = c.C0;
    const double nu = nu_of(c);
    cert.C2 = (nu > 0.0 && c.c0 > 0.0) ? 1.0 / (nu * c.c0) : 0.0;

    // alpha = inf over cells and directions of sigma_a + v . grad ln(h1/(Xi sigma_a)),
    // upwind differences, one-sided fallback on the boundary rows.
    ScalarField logf(g);
    for (std::size_t i = 0; i < logf.size(); ++i)
        logf[i] = std::log(h1[i] / (c.xi[i] * c.sigma_a[i]));
    double alpha = std::numeric_limits<double>::infinity();
    const int nx = g.nx(), ny = g.ny();
    for (int k = 0; k < q.n_dirs(); ++k) {
        const Vec2 v = q.dir(k);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                double dx;
                if (v.x >= 0.0)
                    dx = i > 0 ? (logf.at(i, j) - logf.at(i - 1, j)) / g.hx()
                               : (logf.at(i + 1, j) - logf.at(i, j)) / g.hx();
                else
                    dx = i + 1 < nx ? (logf.at(i + 1, j) - logf.at(i, j)) / g.hx()
                                    : (logf.at(i, j) - logf.at(i - 1, j)) / g.hx();
                double dy;
                if (v.y >= 0.0)
                    dy = j > 0 ? (logf.at(i, j) - logf.at(i, j - 1)) / g.hy()
                               : (logf.at(i, j + 1) - logf.at(i, j)) / g.hy();
                else
                    dy = j + 1 < ny ? (logf.at(i, j + 1) - logf.at(i, j)) / g.hy()
                                    : (logf.at(i, j) - logf.at(i, j - 1)) / g.hy();
                alpha = std::min(alpha, c.sigma_a.at(i, j) + v.x * dx + v.y * dy);
            }
    }
    cert.alpha = alpha;
    cert.in_A1 = alpha >= alpha_min && alpha_min > 0.0;

    // Pi = C2 C0 || Xi sigma_a g / h1 ||_{L^inf_dxi(Gamma_-)}.
    double ratio = 0.0;
    for (Side s : all_sides)
        for (int f = 0; f < g.n_faces(s); ++f) {
            const std::size_t cell = g.face_cell(s, f);
            for (int k = 0; k < q.n_dirs(); ++k)
                if (src.is_inflow(s, k))
                    ratio = std::max(ratio, std::abs(c.xi[cell] * c.sigma_a[cell] *
                                                     src.at(s, f, k) / h1[cell]));
        }
    cert.boundary_ratio = ratio;
    cert.Pi = cert.C2 * cert.C0 * ratio;
    cert.in_A2 = cert.Pi >= 0.0 && cert.Pi < 1.0;
    if (cert.in_A2 && c.c0 > 0.0)
        cert.stability_constant = ratio / (2.0 * c.c0 * (1.0 - cert.Pi));

    // Lemma bound: max_X u1/<u1> <= boundary ratio (holds in A1).
    const PhaseField u1 = solve_u1_transport(c, g, q, kern, src, opt);
    const ScalarField m1 = velocity_average(u1, q);
    const double thr = transport_mask_threshold(c, g, src);
    double lhs = 0.0;
    for (std::size_t cell = 0; cell < m1.size(); ++cell) {
        if (m1[cell] < thr) continue;
        for (int k = 0; k < q.n_dirs(); ++k)
            lhs = std::max(lhs, u1(cell, k) / m1[cell]);
    }
    cert.lemma_lhs = lhs;
    cert.lemma_rhs = ratio;
    cert.lemma_ok = lhs <= ratio * (1.0 + 1e-12);
    return cert;
}

namespace {

struct FixedPointDriver {
    const SpatialGrid& g;
    const ReconstructionOptions& opt;
    ReconstructionResult res;
    double prev = -1.0;

    explicit FixedPointDriver(const SpatialGrid& grid, const ReconstructionOptions& o)
        : g(grid), opt(o) {}

    // Returns true when converged.
    bool step(ScalarField& cur, const ScalarField& next) {
        const ScalarField upd = next - cur;
        const double r = l2_norm(upd, g);
        res.update_history.push_back(r);
        ++res.iterations;
        if (prev > 0.0 && res.update_history.size() >= 2)
            res.observed_contraction = std::max(res.observed_contraction, r / prev);
        prev = r;
        cur = next;
        res.residual = r;
        return r <= opt.tol;
    }

    void throw_divergence(const char* what) const {
        std::ostringstream os;
        os << what << ": no convergence in " << res.iterations
           << " iterations (last update " << res.residual
           << ", observed contraction estimate " << res.observed_contraction << ")";
        throw DivergenceError(os.str());
    }
};

} // namespace

ReconstructionResult reconstruct_sigma_a_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                   const AngularQuadrature& q,
                                                   const ScatteringKernel& kern,
                                                   const BoundarySource& src,
                                                   const ScalarField& h1,
                                                   const ReconstructionOptions& opt) {
    if (h1.size() != g.n_cells()) throw PreconditionError("recon sigma_a: data shape mismatch");
    const ClampBounds b = bounds_of(c, opt);

    ScalarField sigma(g);
    if (opt.initial_guess) {
        sigma = *opt.initial_guess;
        if (sigma.size() != g.n_cells())
            throw PreconditionError("recon sigma_a: initial guess shape mismatch");
    } else {
        sigma = ScalarField(g, 0.5 * (b.lo + b.hi));
    }
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.in_boundary_layer(i, j)) sigma.at(i, j) = c.sigma_a.at(i, j);

    FixedPointDriver drv(g, opt);
    CoefficientSet cur = c;
    for (int it = 0; it < opt.max_iter; ++it) {
        cur.sigma_a = sigma;
        const PhaseField u1 = solve_u1_transport(cur, g, q, kern, src, opt.transport);
        const ScalarField m1 = velocity_average(u1, q);
        const double thr = transport_mask_threshold(cur, g, src);

        ScalarField next = sigma;
        std::size_t masked = 0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t cell = g.index(i, j);
                if (g.in_boundary_layer(i, j)) continue; // frozen, known by assumption
                if (m1[cell] < thr) {
                    ++masked;
                    continue;
                }
                next[cell] =
                    std::clamp(h1[cell] / (c.xi[cell] * m1[cell]), b.lo, b.hi);
            }
        drv.res.masked_cells = masked;
        if (masked > opt.mask_fraction_limit * static_cast<double>(g.n_cells()))
            throw PreconditionError("recon sigma_a: mask too large (> limit of cells)");
        if (drv.step(sigma, next)) break;
        if (it + 1 == opt.max_iter) drv.throw_divergence("recon sigma_a (transport)");
    }

    // Data misfit of the converged field.
    cur.sigma_a = sigma;
    const PhaseField u1 = solve_u1_transport(cur, g, q, kern, src, opt.transport);
    const ScalarField m1 = velocity_average(u1, q);
    ScalarField repro(g);
    for (std::size_t cell = 0; cell < repro.size(); ++cell)
        repro[cell] = c.xi[cell] * sigma[cell] * m1[cell];
    const double hn = l2_norm(h1, g);
    drv.res.data_misfit = hn > 0.0 ? l2_norm(repro - h1, g) / hn : 0.0;
    drv.res.recovered = std::move(sigma);
    return std::move(drv.res);
}

ReconstructionResult reconstruct_sigma_b_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                   const AngularQuadrature& q,
                                                   const ScatteringKernel& kern,
                                                   const BoundarySource& src,
                                                   const ScalarField& h2,
                                                   const ReconstructionOptions& opt) {
    if (h2.size() != g.n_cells()) throw PreconditionError("recon sigma_b: data shape mismatch");
    const ClampBounds b = bounds_of(c, opt);

    // u1 is sigma_b-free; solve once and cache. Its data h1 feeds the
    // admissibility certificate.
    const PhaseField u1 = solve_u1_transport(c, g, q, kern, src, opt.transport);
    const ScalarField m1 = velocity_average(u1, q);
    ScalarField h1(g);
    for (std::size_t cell = 0; cell < h1.size(); ++cell)
        h1[cell] = c.xi[cell] * c.sigma_a[cell] * m1[cell];

    ReconstructionResult pre;
    AdmissibilityCertificate cert =
        certify_admissibility(c, g, q, kern, src, h1, 1e-6, opt.transport);
    if (opt.enforce_a2 && !cert.in_A2) {
        std::ostringstream os;
        os << "A2: Pi >= 1 (Pi = " << cert.Pi << "); sigma_b reconstruction precondition fails";
        throw PreconditionError(os.str());
    }

    const double thr = transport_mask_threshold(c, g, src);

    ScalarField sigma(g);
    if (opt.initial_guess) {
        sigma = *opt.initial_guess;
    } else {
        sigma = ScalarField(g, 0.5 * (b.lo + b.hi));
    }
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.in_boundary_layer(i, j)) sigma.at(i, j) = c.sigma_b.at(i, j);

    FixedPointDriver drv(g, opt);
    drv.res.certificate = cert;
    CoefficientSet cur = c;
    for (int it = 0; it < opt.max_iter; ++it) {
        cur.sigma_b = sigma;
        const PhaseField u2 = solve_u2_transport(cur, g, q, kern, u1, opt.transport);
        const ScalarField m2 = velocity_average(u2, q);

        ScalarField next = sigma;
        std::size_t masked = 0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t cell = g.index(i, j);
                if (g.in_boundary_layer(i, j)) continue;
                if (m1[cell] < thr) {
                    ++masked;
                    continue;
                }
                const double val = (h2[cell] / c.xi[cell] - c.sigma_a[cell] * m2[cell]) /
                                   (2.0 * m1[cell] * m1[cell]);
                next[cell] = std::clamp(val, b.lo, b.hi);
            }
        drv.res.masked_cells = masked;
        if (masked > opt.mask_fraction_limit * static_cast<double>(g.n_cells()))
            throw PreconditionError("recon sigma_b: mask too large (> limit of cells)");
        if (drv.step(sigma, next)) break;
        if (it + 1 == opt.max_iter) drv.throw_divergence("recon sigma_b (transport)");
    }

    cur.sigma_b = sigma;
    const PhaseField u2 = solve_u2_transport(cur, g, q, kern, u1, opt.transport);
    const ScalarField m2 = velocity_average(u2, q);
    ScalarField repro(g);
    for (std::size_t cell = 0; cell < repro.size(); ++cell)
        repro[cell] = c.xi[cell] * (c.sigma_a[cell] * m2[cell] +
                                    2.0 * sigma[cell] * m1[cell] * m1[cell]);
    const double hn = l2_norm(h2, g);
    drv.res.data_misfit = hn > 0.0 ? l2_norm(repro - h2, g) / hn : 0.0;
    drv.res.recovered = std::move(sigma);
    return std::move(drv.res);
}

ReconstructionResult reconstruct_sigma_a_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                   const DirichletTrace& bc,
                                                   const ScalarField& h1,
                                                   const ReconstructionOptions& opt) {
    if (h1.size() != g.n_cells()) throw PreconditionError("recon sigma_a: data shape mismatch");
    const ClampBounds b = bounds_of(c, opt);
    const double thr = diffusion_mask_threshold(c, g, bc);

    ScalarField sigma(g);
    if (opt.initial_guess) {
        sigma = *opt.initial_guess;
    } else {
        sigma = ScalarField(g, 0.5 * (b.lo + b.hi));
    }
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.in_boundary_layer(i, j)) sigma.at(i, j) = c.sigma_a.at(i, j);

    FixedPointDriver drv(g, opt);
    CoefficientSet cur = c;
    for (int it = 0; it < opt.max_iter; ++it) {
        cur.sigma_a = sigma;
        const ScalarField u1 = solve_u1_diffusion(cur, g, bc, opt.diffusion);

        ScalarField next = sigma;
        std::size_t masked = 0;
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const std::size_t cell = g.index(i, j);
                if (g.in_boundary_layer(i, j)) continue;
                if (u1[cell] < thr) {
                    ++masked;
                    continue;
                }
                next[cell] = std::clamp(h1[cell] / (c.xi[cell] * u1[cell]), b.lo, b.hi);
            }
        drv.res.masked_cells = masked;
        if (masked > opt.mask_fraction_limit * static_cast<double>(g.n_cells()))
            throw PreconditionError("recon sigma_a: mask too large (> limit of cells)");
        if (drv.step(sigma, next)) break;
        if (it + 1 == opt.max_iter) drv.throw_divergence("recon sigma_a (diffusion)");
    }

    cur.sigma_a = sigma;
    const ScalarField u1 = solve_u1_diffusion(cur, g, bc, opt.diffusion);
    ScalarField repro(g);
    for (std::size_t cell = 0; cell < repro.size(); ++cell)
        repro[cell] = c.xi[cell] * sigma[cell] * u1[cell];
    const double hn = l2_norm(h1, g);
    drv.res.data_misfit = hn > 0.0 ? l2_norm(repro - h1, g) / hn : 0.0;

    // Boundary trace directly from the data: sigma_a|_boundary = h1/(Xi g).
    DirichletTrace trace(g, 0.0);
    for (Side s : all_sides)
        for (int f = 0; f < g.n_faces(s); ++f) {
            const std::size_t cell = g.face_cell(s, f);
            const double gv = bc.at(s, f);
            trace.at(s, f) = gv != 0.0 ? h1[cell] / (c.xi[cell] * gv) : 0.0;
        }
    drv.res.recovered_trace = std::move(trace);
    drv.res.recovered = std::move(sigma);
    return std::move(drv.res);
}

ReconstructionResult reconstruct_sigma_b_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                   const DirichletTrace& bc,
                                                   const ScalarField& h2,
                                                   const ReconstructionOptions& opt) {
    if (h2.size() != g.n_cells()) throw PreconditionError("recon sigma_b: data shape mismatch");
    const ClampBounds b = bounds_of(c, opt);
    const double thr = diffusion_mask_threshold(c, g, bc);

    const ScalarField u1 = solve_u1_diffusion(c, g, bc, opt.diffusion);

    // U = h2 / (Xi sigma_a); its boundary-face datum reuses the adjacent
    // cell value (the discrete identity psi = U - u2 is independent of the
    // face datum, which enters both sides of the psi problem equally).
    ScalarField U(g);
    for (std::size_t cell = 0; cell < U.size(); ++cell)
        U[cell] = h2[cell] / (c.xi[cell] * c.sigma_a[cell]);
    DirichletTrace Uface(g, 0.0);
    for (Side s : all_sides)
        for (int f = 0; f < g.n_faces(s); ++f) Uface.at(s, f) = U[g.face_cell(s, f)];

    // psi solves -div(gamma grad psi) = -div(gamma grad U) + sigma_a U with
    // psi = U on the boundary; sigma_a is absent from the left-hand side.
    const EllipticOperator A0(g, c.gamma, ScalarField(g, 0.0));
    ScalarField rhs = A0.apply_diffusion_part(U, Uface);
    for (std::size_t cell = 0; cell < rhs.size(); ++cell)
        rhs[cell] += c.sigma_a[cell] * U[cell];
    const std::vector<double> bvec = A0.rhs(rhs, Uface);
    auto [psi_vec, rep] = solve_elliptic(A0, bvec, opt.diffusion);

    ReconstructionResult res;
    res.iterations = rep.cg_iterations;
    res.residual = rep.cg_residual;

    ScalarField sigma(g);
    std::size_t masked = 0;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t cell = g.index(i, j);
            if (g.in_boundary_layer(i, j)) {
                sigma[cell] = c.sigma_b[cell];
                continue;
            }
            if (u1[cell] < thr) {
                ++masked;
                sigma[cell] = c.sigma_b[cell];
                continue;
            }
            sigma[cell] = std::clamp(
                psi_vec[cell] * c.sigma_a[cell] / (2.0 * u1[cell] * u1[cell]), b.lo, b.hi);
        }
    res.masked_cells = masked;
    if (masked > opt.mask_fraction_limit * static_cast<double>(g.n_cells()))
        throw PreconditionError("recon sigma_b: division mask exceeded");

    CoefficientSet cur = c;
    cur.sigma_b = sigma;
    const ScalarField u2 = solve_u2_diffusion(cur, g, u1, opt.diffusion);
    ScalarField repro(g);
    for (std::size_t cell = 0; cell < repro.size(); ++cell)
        repro[cell] = c.xi[cell] * (c.sigma_a[cell] * u2[cell] +
                                    2.0 * sigma[cell] * u1[cell] * u1[cell]);
    const double hn = l2_norm(h2, g);
    res.data_misfit = hn > 0.0 ? l2_norm(repro - h2, g) / hn : 0.0;
    res.recovered = std::move(sigma);
    return res;
}

} // namespace qpat
