#pragma once

#include <functional>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/coefficients.hpp"
#include "qpat/norms.hpp"

namespace qpat {

/// Five-point finite-volume discretization of -div(gamma grad .) + sigma_a
/// on the cell-centered grid. Interior face coefficients are harmonic means
/// of the adjacent cell gammas; Dirichlet data live at boundary face
/// midpoints and are eliminated through the half-cell transmissibility
/// 2 gamma_cell / h, which keeps the operator symmetric positive definite.
class EllipticOperator {
  public:
    EllipticOperator(const SpatialGrid& g, const ScalarField& gamma, const ScalarField& sigma_a);

    /// y = A u with homogeneous Dirichlet data.
    void apply(const std::vector<double>& u, std::vector<double>& y) const;

    /// Right-hand side for data (S, g): S + boundary lift of g.
    std::vector<double> rhs(const ScalarField& S, const DirichletTrace& g) const;

    /// Full residual A u + sigma_a u - lift(g) - S of a candidate field;
    /// measures how well u solves the problem with data (S, g).
    ScalarField residual(const ScalarField& u, const DirichletTrace& g,
                         const ScalarField& S) const;

    /// Action of the second-order part only (no sigma_a), with boundary data:
    /// the discrete -div(gamma grad u) given u = g on the boundary faces.
    ScalarField apply_diffusion_part(const ScalarField& u, const DirichletTrace& g) const;

    const SpatialGrid& grid() const { return *grid_; }
    double diag(std::size_t c) const { return diag_[c]; }

  private:
    const SpatialGrid* grid_;
    ScalarField sigma_a_;
    std::vector<double> tx_;   // west-face transmissibility / cell area, per cell
    std::vector<double> ty_;   // south-face transmissibility / cell area, per cell
    std::vector<double> te_;   // east boundary column, 0 in the interior
    std::vector<double> tn_;   // north boundary row
    std::vector<double> diag_;
};

struct DiffusionSolveReport {
    int cg_iterations = 0;
    double cg_residual = 0.0;       // final relative residual ||r|| / ||b||
    int picard_iterations = 0;
    double residual = 0.0;          // Picard successive-difference (semilinear)
    double linf_ratio = 0.0;        // ||u||_inf / ||g||_inf
    // Thm-B.1-style ball check with the observed constant c_obs:
    // c_obs (eps^2 + delta^2) < delta for delta = 2 c_obs eps^2.
    bool ball_check_ok = false;
    double c_observed = 0.0;
    double delta_ball = 0.0;
    std::vector<double> picard_ratios;
    double observed_contraction = 0.0;
};

struct DiffusionOptions {
    double tol_cg = 1e-12;      // relative CG tolerance
    int max_cg_iter = 50000;
    double tol_picard = 1e-10;
    int max_picard_iter = 200;
    /// Test hook: observes every CG iterate (index, current solution).
    std::function<void(int, const std::vector<double>&)> cg_observer;
};

/// Linear problem  -div(gamma grad u) + sigma_a u = S,  u = g on the boundary.
std::pair<ScalarField, DiffusionSolveReport> solve_linear_diffusion(
    const CoefficientSet& c, const SpatialGrid& g, const DirichletTrace& bc,
    const ScalarField& S, const DiffusionOptions& opt = {});

/// Semilinear problem with the sigma_b u^2 absorption, u = u0 + w with w the
/// Picard fixed point of w -> T^{-1}(-sigma_b (u0+w)^2).
std::pair<ScalarField, DiffusionSolveReport> solve_semilinear_diffusion(
    const CoefficientSet& c, const SpatialGrid& g, const DirichletTrace& bc,
    const DiffusionOptions& opt = {});

/// Preconditioned CG on an explicitly assembled operator with a raw
/// right-hand side (used by the auxiliary psi problem, whose left side has
/// no sigma_a term).
std::pair<ScalarField, DiffusionSolveReport> solve_elliptic(const EllipticOperator& A,
                                                            const std::vector<double>& rhs,
                                                            const DiffusionOptions& opt = {});

} // namespace qpat
