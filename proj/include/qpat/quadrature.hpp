#pragma once

#include <cmath>
#include <vector>

#include "qpat/errors.hpp"
#include "qpat/field.hpp"

namespace qpat {

/// Quadrature for the normalized measure on the unit circle: directions
/// v_k and nonnegative weights w_k with sum(w) = 1 and the set closed under
/// v -> -v (opposite of k is k + n/2 mod n).
class AngularQuadrature {
  public:
    /// n equally spaced directions at angles 2*pi*(k + 1/2)/n, weights 1/n.
    /// The half-step offset keeps every direction off the coordinate axes
    /// for n not divisible by 4 as well; n must be even for -v closure.
    static AngularQuadrature uniform(int n);

    int n_dirs() const { return static_cast<int>(dirs_.size()); }
    Vec2 dir(int k) const { return dirs_[k]; }
    double weight(int k) const { return weights_[k]; }
    const std::vector<Vec2>& directions() const { return dirs_; }
    const std::vector<double>& weights() const { return weights_; }
    int opposite(int k) const { return (k + n_dirs() / 2) % n_dirs(); }

    /// Construct from explicit nodes; validates the invariants.
    AngularQuadrature(std::vector<Vec2> dirs, std::vector<double> weights);

  private:
    std::vector<Vec2> dirs_;
    std::vector<double> weights_;
};

/// Discrete scattering kernel Theta(v_k, v_j) >= 0 with both
/// quadrature-weighted normalizations sum_j w_j Theta(k, j) = 1 and
/// sum_k w_k Theta(k, j) = 1.
class ScatteringKernel {
  public:
    /// Theta == 1: K(u) = <u> - u.
    static ScatteringKernel isotropic(const AngularQuadrature& q);

    /// 2-D Henyey-Greenstein-like kernel with anisotropy g in (-1, 1),
    /// renormalized numerically so both normalizations hold exactly.
    static ScatteringKernel henyey_greenstein(const AngularQuadrature& q, double g);

    /// Arbitrary matrix; throws unless both normalizations hold to 1e-12.
    ScatteringKernel(const AngularQuadrature& q, std::vector<double> theta);

    int n_dirs() const { return n_; }
    double theta(int k, int j) const { return theta_[static_cast<std::size_t>(k) * n_ + j]; }
    bool is_isotropic() const { return isotropic_; }

    /// sum_j w_j Theta(k, j) u_j for one cell's direction vector.
    void gather(const double* u_cell, const std::vector<double>& w, double* out) const;

  private:
    ScatteringKernel() = default;
    int n_ = 0;
    bool isotropic_ = false;
    std::vector<double> theta_;
};

/// <u>(x) = sum_k w_k u(x, v_k).
ScalarField velocity_average(const PhaseField& u, const AngularQuadrature& q);

/// Discrete K(u)(x, v_k) = sum_j w_j Theta(k, j) u(x, v_j) - u(x, v_k).
/// The subtracted term uses the column normalization sum w Theta = 1.
PhaseField apply_scattering(const PhaseField& u, const ScatteringKernel& kernel,
                            const AngularQuadrature& q);

/// In-scatter part only: (Theta u)(x, v_k) = sum_j w_j Theta(k, j) u(x, v_j).
PhaseField scattering_gather(const PhaseField& u, const ScatteringKernel& kernel,
                             const AngularQuadrature& q);

} // namespace qpat
