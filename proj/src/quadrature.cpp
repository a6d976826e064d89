#include "qpat/quadrature.hpp"

#include <numbers>

namespace qpat {

AngularQuadrature AngularQuadrature::uniform(int n) {
    if (n < 4 || n % 2 != 0)
        throw PreconditionError("quadrature: n_dirs must be even and >= 4");
    std::vector<Vec2> dirs(n);
    std::vector<double> w(n, 1.0 / n);
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * std::numbers::pi * (k + 0.5) / n;
        dirs[k] = {std::cos(th), std::sin(th)};
    }
    return AngularQuadrature(std::move(dirs), std::move(w));
}

AngularQuadrature::AngularQuadrature(std::vector<Vec2> dirs, std::vector<double> weights)
    : dirs_(std::move(dirs)), weights_(std::move(weights)) {
    if (dirs_.empty() || dirs_.size() != weights_.size())
        throw PreconditionError("quadrature: empty or mismatched node/weight lists");
    if (dirs_.size() % 2 != 0)
        throw PreconditionError("quadrature: direction count must be even (closure under v -> -v)");
    double wsum = 0.0;
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
        if (weights_[k] < 0.0) throw PreconditionError("quadrature: negative weight");
        wsum += weights_[k];
        if (std::abs(std::hypot(dirs_[k].x, dirs_[k].y) - 1.0) > 1e-14)
            throw PreconditionError("quadrature: direction is not a unit vector");
    }
    if (std::abs(wsum - 1.0) > 1e-14)
        throw PreconditionError("quadrature: weights must sum to 1");
    const int n = static_cast<int>(dirs_.size());
    for (int k = 0; k < n; ++k) {
        const Vec2 a = dirs_[k];
        const Vec2 b = dirs_[(k + n / 2) % n];
        if (std::abs(a.x + b.x) > 1e-13 || std::abs(a.y + b.y) > 1e-13)
            throw PreconditionError("quadrature: direction set not closed under v -> -v");
    }
}

ScatteringKernel ScatteringKernel::isotropic(const AngularQuadrature& q) {
    ScatteringKernel k;
    k.n_ = q.n_dirs();
    k.isotropic_ = true;
    k.theta_.assign(static_cast<std::size_t>(k.n_) * k.n_, 1.0);
    return k;
}

ScatteringKernel ScatteringKernel::henyey_greenstein(const AngularQuadrature& q, double g) {
    if (!(g > -1.0 && g < 1.0))
        throw PreconditionError("kernel: HG anisotropy must lie in (-1, 1)");
    const int n = q.n_dirs();
    std::vector<double> th(static_cast<std::size_t>(n) * n);
    // p(cos phi) ~ (1 - g^2) / (1 + g^2 - 2 g cos phi); the matrix is a
    // symmetric circulant for the uniform quadrature, so a single row-sum
    // rescale enforces both normalizations at once.
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            const double c = dot(q.dir(k), q.dir(j));
            th[static_cast<std::size_t>(k) * n + j] =
                (1.0 - g * g) / (1.0 + g * g - 2.0 * g * c);
        }
    for (int k = 0; k < n; ++k) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j) rs += q.weight(j) * th[static_cast<std::size_t>(k) * n + j];
        for (int j = 0; j < n; ++j) th[static_cast<std::size_t>(k) * n + j] /= rs;
    }
    return ScatteringKernel(q, std::move(th));
}

ScatteringKernel::ScatteringKernel(const AngularQuadrature& q, std::vector<double> theta) {
    n_ = q.n_dirs();
    if (theta.size() != static_cast<std::size_t>(n_) * n_)
        throw PreconditionError("kernel: matrix size does not match quadrature");
    for (double v : theta)
        if (!(v >= 0.0)) throw PreconditionError("kernel: Theta must be nonnegative");
    for (int k = 0; k < n_; ++k) {
        double rs = 0.0, cs = 0.0;
        for (int j = 0; j < n_; ++j) {
            rs += q.weight(j) * theta[static_cast<std::size_t>(k) * n_ + j];
            cs += q.weight(j) * theta[static_cast<std::size_t>(j) * n_ + k];
        }
        if (std::abs(rs - 1.0) > 1e-12 || std::abs(cs - 1.0) > 1e-12)
            throw PreconditionError("kernel: normalization violated (row/column sums must be 1)");
    }
    theta_ = std::move(theta);
    isotropic_ = true;
    for (double v : theta_)
        if (std::abs(v - 1.0) > 1e-15) { isotropic_ = false; break; }
}

void ScatteringKernel::gather(const double* u_cell, const std::vector<double>& w,
                              double* out) const {
    if (isotropic_) {
        double m = 0.0;
        for (int j = 0; j < n_; ++j) m += w[j] * u_cell[j];
        for (int k = 0; k < n_; ++k) out[k] = m;
        return;
    }
    for (int k = 0; k < n_; ++k) {
        double s = 0.0;
        const double* row = &theta_[static_cast<std::size_t>(k) * n_];
        for (int j = 0; j < n_; ++j) s += w[j] * row[j] * u_cell[j];
        out[k] = s;
    }
}

ScalarField velocity_average(const PhaseField& u, const AngularQuadrature& q) {
    if (u.n_dirs() != q.n_dirs())
        throw PreconditionError("velocity_average: field/quadrature direction mismatch");
    ScalarField out(u.nx(), u.ny());
    const auto& w = q.weights();
    for (std::size_t c = 0; c < u.n_cells(); ++c) {
        double m = 0.0;
        for (int k = 0; k < u.n_dirs(); ++k) m += w[k] * u(c, k);
        out[c] = m;
    }
    return out;
}

PhaseField scattering_gather(const PhaseField& u, const ScatteringKernel& kernel,
                             const AngularQuadrature& q) {
    if (u.n_dirs() != q.n_dirs() || kernel.n_dirs() != q.n_dirs())
        throw PreconditionError("scattering: field/kernel/quadrature direction mismatch");
    PhaseField out(u.nx(), u.ny(), u.n_dirs());
    const int nv = u.n_dirs();
    for (std::size_t c = 0; c < u.n_cells(); ++c)
        kernel.gather(&u.data()[c * nv], q.weights(), &out.data()[c * nv]);
    return out;
}

PhaseField apply_scattering(const PhaseField& u, const ScatteringKernel& kernel,
                            const AngularQuadrature& q) {
    PhaseField out = scattering_gather(u, kernel, q);
    out -= u;
    return out;
}

} // namespace qpat
