#include "qpat/diffusion.hpp"

#include <cmath>

namespace qpat {

EllipticOperator::EllipticOperator(const SpatialGrid& g, const ScalarField& gamma,
                                   const ScalarField& sigma_a)
    : grid_(&g), sigma_a_(sigma_a) {
    if (gamma.size() != g.n_cells() || sigma_a.size() != g.n_cells())
        throw PreconditionError("elliptic: coefficient shape mismatch");
    for (double v : gamma.data())
        if (!(v > 0.0)) throw PreconditionError("elliptic: gamma must be positive (non-SPD assembly)");
    for (double v : sigma_a.data())
        if (!(v >= 0.0)) throw PreconditionError("elliptic: sigma_a must be nonnegative");

    const int nx = g.nx(), ny = g.ny();
    const double ax = g.hy() / g.hx();
    const double ay = g.hx() / g.hy();
    tx_.assign(g.n_cells(), 0.0);
    ty_.assign(g.n_cells(), 0.0);
    te_.assign(g.n_cells(), 0.0);
    tn_.assign(g.n_cells(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = g.index(i, j);
            const double gc = gamma[c];
            tx_[c] = i == 0 ? 2.0 * gc * ax
                            : 2.0 * gc * gamma[g.index(i - 1, j)] /
                                  (gc + gamma[g.index(i - 1, j)]) * ax;
            ty_[c] = j == 0 ? 2.0 * gc * ay
                            : 2.0 * gc * gamma[g.index(i, j - 1)] /
                                  (gc + gamma[g.index(i, j - 1)]) * ay;
            if (i == nx - 1) te_[c] = 2.0 * gc * ax;
            if (j == ny - 1) tn_[c] = 2.0 * gc * ay;
        }
    diag_.assign(g.n_cells(), 0.0);
    const double inv_area = 1.0 / g.cell_area();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = g.index(i, j);
            double t = tx_[c] + ty_[c] + te_[c] + tn_[c];
            if (i + 1 < nx) t += tx_[g.index(i + 1, j)];
            if (j + 1 < ny) t += ty_[g.index(i, j + 1)];
            diag_[c] = sigma_a_[c] + t * inv_area;
        }
}

void EllipticOperator::apply(const std::vector<double>& u, std::vector<double>& y) const {
    const SpatialGrid& g = *grid_;
    const int nx = g.nx(), ny = g.ny();
    const double inv_area = 1.0 / g.cell_area();
    y.assign(u.size(), 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = g.index(i, j);
            double acc = 0.0;
            if (i > 0) acc += tx_[c] * (u[c] - u[c - 1]);
            else acc += tx_[c] * u[c];
            if (i + 1 < nx) acc += tx_[c + 1] * (u[c] - u[c + 1]);
            else acc += te_[c] * u[c];
            if (j > 0) acc += ty_[c] * (u[c] - u[c - nx]);
            else acc += ty_[c] * u[c];
            if (j + 1 < ny) acc += ty_[c + nx] * (u[c] - u[c + nx]);
            else acc += tn_[c] * u[c];
            y[c] = sigma_a_[c] * u[c] + acc * inv_area;
        }
}

std::vector<double> EllipticOperator::rhs(const ScalarField& S, const DirichletTrace& bc) const {
    const SpatialGrid& g = *grid_;
    const int nx = g.nx(), ny = g.ny();
    const double inv_area = 1.0 / g.cell_area();
    std::vector<double> b(g.n_cells(), 0.0);
    for (std::size_t c = 0; c < b.size(); ++c) b[c] = S.size() ? S[c] : 0.0;
    for (int i = 0; i < nx; ++i) {
        b[g.index(i, 0)] += ty_[g.index(i, 0)] * bc.at(Side::South, i) * inv_area;
        b[g.index(i, ny - 1)] += tn_[g.index(i, ny - 1)] * bc.at(Side::North, i) * inv_area;
    }
    for (int j = 0; j < ny; ++j) {
        b[g.index(0, j)] += tx_[g.index(0, j)] * bc.at(Side::West, j) * inv_area;
        b[g.index(nx - 1, j)] += te_[g.index(nx - 1, j)] * bc.at(Side::East, j) * inv_area;
    }
    return b;
}

ScalarField EllipticOperator::residual(const ScalarField& u, const DirichletTrace& bc,
                                       const ScalarField& S) const {
    std::vector<double> au;
    apply(u.data(), au);
    const std::vector<double> b = rhs(S, bc);
    ScalarField r(*grid_);
    for (std::size_t c = 0; c < au.size(); ++c) r[c] = au[c] - b[c];
    return r;
}

ScalarField EllipticOperator::apply_diffusion_part(const ScalarField& u,
                                                   const DirichletTrace& bc) const {
    // A u - sigma_a u - lift(g) with S = 0: the pure -div(gamma grad) action.
    std::vector<double> au;
    apply(u.data(), au);
    const std::vector<double> b = rhs(ScalarField(), bc);
    ScalarField r(*grid_);
    for (std::size_t c = 0; c < au.size(); ++c) r[c] = au[c] - sigma_a_[c] * u[c] - b[c];
    return r;
}

namespace {

std::pair<std::vector<double>, DiffusionSolveReport> pcg_solve(
    const EllipticOperator& A, const std::vector<double>& b, const DiffusionOptions& opt) {
    DiffusionSolveReport rep;
    const std::size_t n = b.size();
    std::vector<double> x(n, 0.0);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return {x, rep};

    std::vector<double> r = b, z(n), p(n), ap(n);
    for (std::size_t c = 0; c < n; ++c) z[c] = r[c] / A.diag(c);
    p = z;
    double rz = 0.0;
    for (std::size_t c = 0; c < n; ++c) rz += r[c] * z[c];

    for (int it = 1; it <= opt.max_cg_iter; ++it) {
        A.apply(p, ap);
        double pap = 0.0;
        for (std::size_t c = 0; c < n; ++c) pap += p[c] * ap[c];
        if (!(pap > 0.0))
            throw PreconditionError("diffusion: operator not positive definite");
        const double alpha = rz / pap;
        double rn = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            x[c] += alpha * p[c];
            r[c] -= alpha * ap[c];
            rn += r[c] * r[c];
        }
        rep.cg_iterations = it;
        rep.cg_residual = std::sqrt(rn) / bnorm;
        if (opt.cg_observer) opt.cg_observer(it, x);
        if (rep.cg_residual <= opt.tol_cg) return {x, rep};
        double rz_new = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            z[c] = r[c] / A.diag(c);
            rz_new += r[c] * z[c];
        }
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t c = 0; c < n; ++c) p[c] = z[c] + beta * p[c];
    }
    throw DivergenceError("diffusion: conjugate gradient did not converge");
}

} // namespace

std::pair<ScalarField, DiffusionSolveReport> solve_elliptic(const EllipticOperator& A,
                                                            const std::vector<double>& rhs,
                                                            const DiffusionOptions& opt) {
    auto [x, rep] = pcg_solve(A, rhs, opt);
    ScalarField u(A.grid());
    u.data() = std::move(x);
    return {std::move(u), rep};
}

std::pair<ScalarField, DiffusionSolveReport> solve_linear_diffusion(
    const CoefficientSet& c, const SpatialGrid& g, const DirichletTrace& bc,
    const ScalarField& S, const DiffusionOptions& opt) {
    require_solvable(c, g, Regime::Diffusion);
    if (S.size() && S.size() != g.n_cells())
        throw PreconditionError("diffusion: source shape mismatch");
    const EllipticOperator A(g, c.gamma, c.sigma_a);
    auto [x, rep] = pcg_solve(A, A.rhs(S, bc), opt);
    ScalarField u(g);
    u.data() = std::move(x);
    const double gn = bc.max_abs();
    rep.linf_ratio = gn > 0.0 ? u.max_abs() / gn : 0.0;
    return {std::move(u), rep};
}

std::pair<ScalarField, DiffusionSolveReport> solve_semilinear_diffusion(
    const CoefficientSet& c, const SpatialGrid& g, const DirichletTrace& bc,
    const DiffusionOptions& opt) {
    require_solvable(c, g, Regime::Diffusion);
    auto [u0, rep] = solve_linear_diffusion(c, g, bc, ScalarField(), opt);
    const double eps = bc.max_abs();
    const DirichletTrace zero_bc(g, 0.0);

    ScalarField w(g, 0.0);
    ScalarField u = u0;
    ScalarField src(g);
    double prev_delta = -1.0;
    for (int m = 1; m <= opt.max_picard_iter; ++m) {
        for (std::size_t cc = 0; cc < u.size(); ++cc) src[cc] = -c.sigma_b[cc] * u[cc] * u[cc];
        auto [w_next, irep] = solve_linear_diffusion(c, g, zero_bc, src, opt);
        rep.cg_iterations += irep.cg_iterations;
        double delta = 0.0;
        for (std::size_t cc = 0; cc < w.size(); ++cc)
            delta = std::max(delta, std::abs(w_next[cc] - w[cc]));
        w = std::move(w_next);
        if (m == 1 && eps > 0.0) {
            rep.c_observed = w.max_abs() / (eps * eps);
            rep.delta_ball = 2.0 * rep.c_observed * eps * eps;
            rep.ball_check_ok =
                rep.c_observed * (eps * eps + rep.delta_ball * rep.delta_ball) < rep.delta_ball ||
                rep.c_observed == 0.0;
        }
        u = u0;
        u += w;
        rep.picard_iterations = m;
        rep.residual = delta;
        if (prev_delta > 0.0) {
            const double ratio = delta / prev_delta;
            rep.picard_ratios.push_back(ratio);
            rep.observed_contraction = std::max(rep.observed_contraction, ratio);
        }
        prev_delta = delta;
        if (delta <= opt.tol_picard * std::max(eps, 1e-300)) break;
        if (m == opt.max_picard_iter)
            throw DivergenceError("semilinear diffusion: Picard iteration did not converge "
                                  "(contraction failure, data too large)");
    }
    const double gn = bc.max_abs();
    rep.linf_ratio = gn > 0.0 ? u.max_abs() / gn : 0.0;
    return {std::move(u), rep};
}

} // namespace qpat
