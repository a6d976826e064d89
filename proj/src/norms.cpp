#include "qpat/norms.hpp"

#include <cmath>

namespace qpat {

double lp_norm(const ScalarField& f, const SpatialGrid& g, double p) {
    if (!(p >= 1.0)) throw PreconditionError("norms: p must be >= 1");
    double s = 0.0;
    for (double v : f.data()) s += std::pow(std::abs(v), p);
    return std::pow(s * g.cell_area(), 1.0 / p);
}

double l2_norm(const ScalarField& f, const SpatialGrid& g) {
    double s = 0.0;
    for (double v : f.data()) s += v * v;
    return std::sqrt(s * g.cell_area());
}

double linf_norm(const ScalarField& f) { return f.max_abs(); }

double l2_norm_phase(const PhaseField& u, const SpatialGrid& g, const AngularQuadrature& q) {
    const auto& w = q.weights();
    double s = 0.0;
    for (std::size_t c = 0; c < u.n_cells(); ++c) {
        double sc = 0.0;
        for (int k = 0; k < u.n_dirs(); ++k) sc += w[k] * u(c, k) * u(c, k);
        s += sc;
    }
    return std::sqrt(s * g.cell_area());
}

double linf_norm(const PhaseField& u) { return u.max_abs(); }

ScalarField diff_x(const ScalarField& f, const SpatialGrid& g) {
    ScalarField d(g);
    const int nx = g.nx(), ny = g.ny();
    const double h = g.hx();
    for (int j = 0; j < ny; ++j) {
        d.at(0, j) = (-3.0 * f.at(0, j) + 4.0 * f.at(1, j) - f.at(2, j)) / (2.0 * h);
        for (int i = 1; i < nx - 1; ++i)
            d.at(i, j) = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * h);
        d.at(nx - 1, j) =
            (3.0 * f.at(nx - 1, j) - 4.0 * f.at(nx - 2, j) + f.at(nx - 3, j)) / (2.0 * h);
    }
    return d;
}

ScalarField diff_y(const ScalarField& f, const SpatialGrid& g) {
    ScalarField d(g);
    const int nx = g.nx(), ny = g.ny();
    const double h = g.hy();
    for (int i = 0; i < nx; ++i) {
        d.at(i, 0) = (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * h);
        for (int j = 1; j < ny - 1; ++j)
            d.at(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
        d.at(i, ny - 1) =
            (3.0 * f.at(i, ny - 1) - 4.0 * f.at(i, ny - 2) + f.at(i, ny - 3)) / (2.0 * h);
    }
    return d;
}

ScalarField diff_xx(const ScalarField& f, const SpatialGrid& g) {
    ScalarField d(g);
    const int nx = g.nx(), ny = g.ny();
    const double h2 = g.hx() * g.hx();
    for (int j = 0; j < ny; ++j) {
        for (int i = 1; i < nx - 1; ++i)
            d.at(i, j) = (f.at(i + 1, j) - 2.0 * f.at(i, j) + f.at(i - 1, j)) / h2;
        d.at(0, j) = (f.at(0, j) - 2.0 * f.at(1, j) + f.at(2, j)) / h2;
        d.at(nx - 1, j) = (f.at(nx - 1, j) - 2.0 * f.at(nx - 2, j) + f.at(nx - 3, j)) / h2;
    }
    return d;
}

ScalarField diff_yy(const ScalarField& f, const SpatialGrid& g) {
    ScalarField d(g);
    const int nx = g.nx(), ny = g.ny();
    const double h2 = g.hy() * g.hy();
    for (int i = 0; i < nx; ++i) {
        for (int j = 1; j < ny - 1; ++j)
            d.at(i, j) = (f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1)) / h2;
        d.at(i, 0) = (f.at(i, 0) - 2.0 * f.at(i, 1) + f.at(i, 2)) / h2;
        d.at(i, ny - 1) = (f.at(i, ny - 1) - 2.0 * f.at(i, ny - 2) + f.at(i, ny - 3)) / h2;
    }
    return d;
}

double w1p_norm(const ScalarField& f, const SpatialGrid& g, double p) {
    const double a = lp_norm(f, g, p);
    const double b = lp_norm(diff_x(f, g), g, p);
    const double c = lp_norm(diff_y(f, g), g, p);
    return std::pow(std::pow(a, p) + std::pow(b, p) + std::pow(c, p), 1.0 / p);
}

double w2p_norm(const ScalarField& f, const SpatialGrid& g, double p) {
    if (!(p > 2.0)) throw PreconditionError("norms: W^{2,p} surrogate requires p > 2");
    const ScalarField fx = diff_x(f, g);
    const ScalarField fy = diff_y(f, g);
    double s = std::pow(lp_norm(f, g, p), p);
    s += std::pow(lp_norm(fx, g, p), p);
    s += std::pow(lp_norm(fy, g, p), p);
    s += std::pow(lp_norm(diff_xx(f, g), g, p), p);
    s += std::pow(lp_norm(diff_yy(f, g), g, p), p);
    s += std::pow(lp_norm(diff_x(fy, g), g, p), p);
    return std::pow(s, 1.0 / p);
}

double discrete_norm(const ScalarField& f, const SpatialGrid& g, NormKind which, double p) {
    switch (which) {
        case NormKind::Linf: return linf_norm(f);
        case NormKind::L2_Omega: return l2_norm(f, g);
        case NormKind::Lp_Omega: return lp_norm(f, g, p);
        case NormKind::W2p_discrete: return w2p_norm(f, g, p);
        default: break;
    }
    throw PreconditionError("norms: unsupported norm tag for a scalar field");
}

double discrete_norm(const PhaseField& u, const SpatialGrid& g, const AngularQuadrature& q,
                     NormKind which) {
    switch (which) {
        case NormKind::Linf: return linf_norm(u);
        case NormKind::L2_X: return l2_norm_phase(u, g, q);
        default: break;
    }
    throw PreconditionError("norms: unsupported norm tag for a phase field");
}

double discrete_norm(const BoundarySource& b, NormKind which) {
    if (which == NormKind::Ldxi_inf_Gamma) return b.max_abs();
    throw PreconditionError("norms: unsupported norm tag for a boundary source");
}

} // namespace qpat
