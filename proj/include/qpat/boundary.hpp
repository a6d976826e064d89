#pragma once

#include <array>
#include <functional>
#include <vector>

#include "qpat/quadrature.hpp"

namespace qpat {

/// Inflow data on the discrete incoming phase-space boundary Gamma_-.
///
/// Values live on (side, face, direction) triples with -nu(x).v_k > 0; the
/// associated measure weight is dxi = |nu.v_k| * face_length * w_k. Entries
/// for outgoing directions are stored as zero and never enter any norm or
/// sweep.
class BoundarySource {
  public:
    BoundarySource(const SpatialGrid& g, const AngularQuadrature& q);

    static BoundarySource constant(const SpatialGrid& g, const AngularQuadrature& q,
                                   double value);
    /// value = f(boundary point, direction), sampled at face midpoints for
    /// every inflow pair.
    static BoundarySource from_function(
        const SpatialGrid& g, const AngularQuadrature& q,
        const std::function<double(Vec2, Vec2)>& f);

    int n_dirs() const { return nv_; }
    int n_faces(Side s) const { return static_cast<int>(values_[int(s)].size()) / nv_; }

    bool is_inflow(Side s, int k) const { return inflow_[int(s)][k]; }
    double at(Side s, int face, int k) const {
        return values_[int(s)][static_cast<std::size_t>(face) * nv_ + k];
    }
    double& at(Side s, int face, int k) {
        return values_[int(s)][static_cast<std::size_t>(face) * nv_ + k];
    }
    /// dxi measure weight of an inflow pair (0 for outgoing pairs).
    double measure(Side s, int face, int k) const;

    /// L^infty_dxi norm: max |g| over inflow pairs.
    double max_abs() const;
    /// inf over the inflow pairs.
    double min() const;
    /// Number of inflow pairs (all of them carry positive measure).
    std::size_t n_inflow_pairs() const;

    BoundarySource& operator*=(double sc);

    const SpatialGrid& grid() const { return *grid_; }
    const AngularQuadrature& quadrature() const { return *quad_; }

  private:
    const SpatialGrid* grid_;
    const AngularQuadrature* quad_;
    int nv_;
    std::array<std::vector<double>, 4> values_;  // per side: face-major, direction fastest
    std::array<std::vector<char>, 4> inflow_;    // per side: direction is incoming
};

inline BoundarySource operator*(double s, BoundarySource g) {
    g *= s;
    return g;
}

/// Dirichlet trace on the boundary of the rectangle for the diffusion
/// regime, stored at face midpoints.
class DirichletTrace {
  public:
    explicit DirichletTrace(const SpatialGrid& g, double value = 0.0);
    static DirichletTrace from_function(const SpatialGrid& g,
                                        const std::function<double(Vec2)>& f);

    double at(Side s, int face) const { return values_[int(s)][face]; }
    double& at(Side s, int face) { return values_[int(s)][face]; }
    int n_faces(Side s) const { return static_cast<int>(values_[int(s)].size()); }

    double max_abs() const;
    double min() const;

    DirichletTrace& operator*=(double sc);

  private:
    std::array<std::vector<double>, 4> values_;
};

inline DirichletTrace operator*(double s, DirichletTrace g) {
    g *= s;
    return g;
}

} // namespace qpat
