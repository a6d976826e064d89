#include "qpat/transport.hpp"

#include <cmath>
#include <limits>

#include "qpat/parallel.hpp"

namespace qpat {

namespace {

// Outgoing edge averages and cell average for one rectangular cell crossed
// by direction (mu, eta) > 0 (after orientation normalization): incoming
// x-face value w, incoming y-face value s, uniform emission q and total
// cross section sigma. Flat incoming edge distributions, exact exponential
// transport along the rays.
struct CellOut {
    double out_x;
    double out_y;
    double avg;
};

inline CellOut cell_solve(double sigma, double q, double mu, double eta, double hx, double hy,
                          double w, double s) {
    const double qs = q / sigma;
    const double rx = eta * hx;
    const double ry = mu * hy;
    double out_x, out_y;
    if (rx <= ry) {
        // Shallow: every north-face point traces back to the west face.
        const double t = sigma * hx / mu;
        const double one_m_e = -std::expm1(-t); // 1 - exp(-t)
        const double e = 1.0 - one_m_e;
        const double E = one_m_e / t;
        const double r = rx / ry;
        const double through = w * e + qs * one_m_e;
        const double grazing = s * E + qs * (1.0 - E);
        out_x = (1.0 - r) * through + r * grazing;
        out_y = w * E + qs * (1.0 - E);
    } else {
        const double t = sigma * hy / eta;
        const double one_m_e = -std::expm1(-t);
        const double e = 1.0 - one_m_e;
        const double E = one_m_e / t;
        const double r = ry / rx;
        const double through = s * e + qs * one_m_e;
        const double grazing = w * E + qs * (1.0 - E);
        out_y = (1.0 - r) * through + r * grazing;
        out_x = s * E + qs * (1.0 - E);
    }
    // Balance over the cell recovers the average exactly.
    const double avg =
        (q * hx * hy - mu * hy * (out_x - w) - eta * hx * (out_y - s)) / (sigma * hx * hy);
    return {out_x, out_y, avg};
}

// Sweep one direction k over the whole grid, writing cell averages into
// out(., k). `emission` holds sigma_s (Theta u) + S per (cell, k).
void sweep_direction(const SpatialGrid& g, const AngularQuadrature& q,
                     const ScalarField& sigma_t, const PhaseField& emission,
                     const BoundarySource& src, int k, PhaseField& out) {
    const Vec2 v = q.dir(k);
    const double mu = std::abs(v.x), eta = std::abs(v.y);
    const int nx = g.nx(), ny = g.ny();
    const double hx = g.hx(), hy = g.hy();
    const int sx = v.x >= 0.0 ? 1 : -1;
    const int sy = v.y >= 0.0 ? 1 : -1;
    const Side side_x = sx > 0 ? Side::West : Side::East;
    const Side side_y = sy > 0 ? Side::South : Side::North;
    const int i_begin = sx > 0 ? 0 : nx - 1;
    const int j_begin = sy > 0 ? 0 : ny - 1;

    std::vector<double> psi_y(nx);
    for (int i = 0; i < nx; ++i) psi_y[i] = src.at(side_y, i, k);

    for (int jj = 0, j = j_begin; jj < ny; ++jj, j += sy) {
        double psi_x = src.at(side_x, j, k);
        for (int ii = 0, i = i_begin; ii < nx; ++ii, i += sx) {
            const std::size_t c = g.index(i, j);
            const CellOut r =
                cell_solve(sigma_t[c], emission(c, k), mu, eta, hx, hy, psi_x, psi_y[i]);
            out(c, k) = r.avg;
            psi_x = r.out_x;
            psi_y[i] = r.out_y;
        }
    }
}

ScalarField total_cross_section(const CoefficientSet& c) {
    ScalarField st = c.sigma_a;
    st += c.sigma_s;
    return st;
}

// L2 norm of the inflow data under the dxi measure.
double l2_dxi_norm(const BoundarySource& b) {
    double s = 0.0;
    for (Side side : all_sides)
        for (int f = 0; f < b.n_faces(side); ++f)
            for (int k = 0; k < b.n_dirs(); ++k)
                if (b.is_inflow(side, k)) {
                    const double v = b.at(side, f, k);
                    s += v * v * b.measure(side, f, k);
                }
    return std::sqrt(s);
}

} // namespace

PhaseField transport_fixed_point_apply(const CoefficientSet& c, const SpatialGrid& g,
                                       const AngularQuadrature& q, const ScatteringKernel& kern,
                                       const BoundarySource& src, const PhaseField* volume_src,
                                       const PhaseField& u) {
    const ScalarField sigma_t = total_cross_section(c);
    PhaseField emission = scattering_gather(u, kern, q);
    const int nv = q.n_dirs();
    for (std::size_t cell = 0; cell < emission.n_cells(); ++cell) {
        const double ss = c.sigma_s[cell];
        for (int k = 0; k < nv; ++k) {
            double e = ss * emission(cell, k);
            if (volume_src) e += (*volume_src)(cell, k);
            emission(cell, k) = e;
        }
    }
    PhaseField out(g, nv);
    parallel_for(nv, [&](int k) { sweep_direction(g, q, sigma_t, emission, src, k, out); });
    return out;
}

std::pair<PhaseField, TransportSolveReport> solve_linear_rte(
    const CoefficientSet& c, const SpatialGrid& g, const AngularQuadrature& q,
    const ScatteringKernel& kern, const BoundarySource& src, const PhaseField* volume_src,
    const TransportOptions& opt) {
    require_solvable(c, g, Regime::Transport);
    if (!(opt.tol_source > 0.0)) throw PreconditionError("transport: tolerance must be positive");
    if (volume_src && (volume_src->nx() != g.nx() || volume_src->ny() != g.ny() ||
                       volume_src->n_dirs() != q.n_dirs()))
        throw PreconditionError("transport: volume source has wrong shape");

    TransportSolveReport rep;
    const double g_norm = src.max_abs();
    const double s_norm = volume_src ? volume_src->max_abs() : 0.0;
    rep.residual_scale = std::max({g_norm, s_norm, 1e-300});

    PhaseField u(g, q.n_dirs());
    for (int m = 1; m <= opt.max_source_iter; ++m) {
        PhaseField next = transport_fixed_point_apply(c, g, q, kern, src, volume_src, u);
        double delta = 0.0;
        for (std::size_t idx = 0; idx < u.size(); ++idx)
            delta = std::max(delta, std::abs(next.data()[idx] - u.data()[idx]));
        u = std::move(next);
        rep.source_iterations = m;
        rep.residual = delta;
        if (delta <= opt.tol_source * rep.residual_scale) break;
        if (m == opt.max_source_iter)
            throw DivergenceError("transport: source iteration did not converge");
    }

    rep.linf_bound = s_norm == 0.0 ? g_norm : 0.0;
    if (c.c0 > 0.0) {
        double nu = 1.0;
        for (std::size_t i = 0; i < c.sigma_a.size(); ++i) {
            const double tot = c.sigma_a[i] + c.sigma_s[i];
            if (tot > 0.0) nu = std::min(nu, c.sigma_a[i] / tot);
        }
        if (nu > 0.0) {
            const double C2 = 1.0 / (nu * c.c0);
            const double ct = 1.0 / std::sqrt(nu * c.c0);
            const double s_l2 = volume_src ? l2_norm_phase(*volume_src, g, q) : 0.0;
            rep.l2_bound = C2 * s_l2 + ct * l2_dxi_norm(src);
        }
    }
    rep.linf_ratio = g_norm > 0.0 ? u.max_abs() / g_norm : 0.0;
    if (!volume_src && src.min() > 0.0) rep.epsilon_prime = positivity_lower_bound(c, g, src);
    return {std::move(u), rep};
}

std::pair<PhaseField, TransportSolveReport> solve_semilinear_rte(
    const CoefficientSet& c, const SpatialGrid& g, const AngularQuadrature& q,
    const ScatteringKernel& kern, const BoundarySource& src, const TransportOptions& opt) {
    require_solvable(c, g, Regime::Transport);

    auto [u0, rep] = solve_linear_rte(c, g, q, kern, src, nullptr, opt);
    const double eps = src.max_abs();

    const double sb_max = c.sigma_b.max_abs();
    if (sb_max > 0.0 && c.c0 > 0.0 && c.C0 > 0.0) {
        double nu = 1.0;
        for (std::size_t i = 0; i < c.sigma_a.size(); ++i) {
            const double tot = c.sigma_a[i] + c.sigma_s[i];
            if (tot > 0.0) nu = std::min(nu, c.sigma_a[i] / tot);
        }
        const double qc = c.C0 / (nu * c.c0); // C2 * C0
        if (4.0 * qc * eps >= 1.0)
            throw PreconditionError(
                "semilinear transport: contraction precondition fails (data too large): "
                "4 C2 C0 ||g|| >= 1");
        const double root = std::sqrt(1.0 - 4.0 * qc * eps);
        rep.delta_ball = (1.0 - 2.0 * qc * eps - root) / (2.0 * qc);
        rep.contraction_factor = 0.5 * (1.0 - root); // = C2 C0 (eps + delta)
        rep.contraction_certified = true;
    }

    const auto& w_q = q.weights();
    const int nv = q.n_dirs();
    PhaseField w(g, nv);
    PhaseField u = u0;
    PhaseField source(g, nv);
    double prev_delta = -1.0;
    for (int m = 1; m <= opt.max_picard_iter; ++m) {
        // source = -sigma_b <u> u with u = u0 + w
        for (std::size_t cell = 0; cell < u.n_cells(); ++cell) {
            double mean = 0.0;
            for (int k = 0; k < nv; ++k) mean += w_q[k] * u(cell, k);
            const double f = -c.sigma_b[cell] * mean;
            for (int k = 0; k < nv; ++k) source(cell, k) = f * u(cell, k);
        }
        BoundarySource zero(g, q);
        auto [w_next, irep] = solve_linear_rte(c, g, q, kern, zero, &source, opt);
        rep.source_iterations += irep.source_iterations;

        double delta = 0.0;
        for (std::size_t idx = 0; idx < w.size(); ++idx)
            delta = std::max(delta, std::abs(w_next.data()[idx] - w.data()[idx]));
        w = std::move(w_next);
        rep.max_picard_iterate_norm = std::max(rep.max_picard_iterate_norm, w.max_abs());
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
            throw DivergenceError("semilinear transport: Picard iteration did not converge");
    }
    rep.linf_ratio = eps > 0.0 ? u.max_abs() / eps : 0.0;
    return {std::move(u), rep};
}

PhaseField characteristics_oracle(const CoefficientSet& c, const SpatialGrid& g,
                                  const AngularQuadrature& q, const ScatteringKernel& kern,
                                  const BoundarySource& src, const PhaseField& u,
                                  const PhaseField* volume_src) {
    require_solvable(c, g, Regime::Transport);
    if (u.nx() != g.nx() || u.ny() != g.ny() || u.n_dirs() != q.n_dirs())
        throw PreconditionError("characteristics_oracle: field shape mismatch");

    const ScalarField sigma_t = total_cross_section(c);
    const PhaseField gathered = scattering_gather(u, kern, q);
    const double step = 0.5 * std::min(g.hx(), g.hy());
    const int nv = q.n_dirs();
    PhaseField out(g, nv);

    parallel_for(nv, [&](int k) {
        const Vec2 v = q.dir(k);
        // Direction slice views for interpolation.
        ScalarField gk(g), sk(g);
        for (std::size_t cell = 0; cell < u.n_cells(); ++cell) {
            gk[cell] = gathered(cell, k);
            sk[cell] = volume_src ? (*volume_src)(cell, k) : 0.0;
        }
        for (int j = 0; j < g.ny(); ++j)
            for (int i = 0; i < g.nx(); ++i) {
                const Vec2 p = g.center(i, j);
                const double tau = boundary_distance(p, v, g);
                const int m = std::max(2, static_cast<int>(std::ceil(tau / step)));
                const double dt = tau / m;

                // Cumulative optical depth and attenuated source integral by
                // the trapezoid rule along the exact ray.
                double od = 0.0;
                double integral = 0.0;
                double sig_prev = interpolate(sigma_t, g, p);
                double f_prev = interpolate(c.sigma_s, g, p) * interpolate(gk, g, p) +
                                interpolate(sk, g, p); // e^{-0} = 1
                for (int s = 1; s <= m; ++s) {
                    const Vec2 x = p - (s * dt) * v;
                    const double sig = interpolate(sigma_t, g, x);
                    od += 0.5 * dt * (sig_prev + sig);
                    sig_prev = sig;
                    const double emis =
                        interpolate(c.sigma_s, g, x) * interpolate(gk, g, x) +
                        interpolate(sk, g, x);
                    const double f = emis * std::exp(-od);
                    integral += 0.5 * dt * (f_prev + f);
                    f_prev = f;
                }

                // Boundary hit point -> (side, face). The exit wall is the one
                // with the minimal backward crossing time; corner ties fall to
                // the lower-index face through the floor/clamp.
                const Vec2 hit = p - tau * v;
                Side side = Side::South;
                double best = std::numeric_limits<double>::infinity();
                if (v.x > 0.0 && (p.x - g.x0()) / v.x < best) {
                    best = (p.x - g.x0()) / v.x;
                    side = Side::West;
                }
                if (v.x < 0.0 && (p.x - g.x1()) / v.x < best) {
                    best = (p.x - g.x1()) / v.x;
                    side = Side::East;
                }
                if (v.y > 0.0 && (p.y - g.y0()) / v.y < best) {
                    best = (p.y - g.y0()) / v.y;
                    side = Side::South;
                }
                if (v.y < 0.0 && (p.y - g.y1()) / v.y < best) {
                    best = (p.y - g.y1()) / v.y;
                    side = Side::North;
                }
                int face;
                if (side == Side::South || side == Side::North)
                    face = std::clamp(static_cast<int>((hit.x - g.x0()) / g.hx()), 0, g.nx() - 1);
                else
                    face = std::clamp(static_cast<int>((hit.y - g.y0()) / g.hy()), 0, g.ny() - 1);
                const double gval = src.is_inflow(side, k) ? src.at(side, face, k) : 0.0;

                out.at(i, j, k) = gval * std::exp(-od) + integral;
            }
    });
    return out;
}

double positivity_lower_bound(const CoefficientSet& c, const SpatialGrid& g,
                              const BoundarySource& src) {
    const double g_inf = src.min();
    if (!(g_inf > 0.0))
        throw PreconditionError("positivity_lower_bound: requires inf g > 0 on Gamma_-");
    double sigma_bar = 0.0;
    for (std::size_t i = 0; i < c.sigma_a.size(); ++i)
        sigma_bar = std::max(sigma_bar, c.sigma_a[i] + c.sigma_s[i]);
    return g_inf * std::exp(-g.diameter() * sigma_bar);
}

} // namespace qpat
