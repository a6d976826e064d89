#pragma once

#include <optional>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/coefficients.hpp"
#include "qpat/norms.hpp"

namespace qpat {

/// Convergence record of a linear or semilinear transport solve.
struct TransportSolveReport {
    int source_iterations = 0;     // sweeps of the scattering source iteration
    int picard_iterations = 0;     // outer Picard steps (semilinear only)
    double residual = 0.0;         // L_inf of the last successive-iterate difference
    double residual_scale = 1.0;   // residual is compared against tol * scale

    double epsilon_prime = 0.0;    // positivity bound inf(g) e^{-d sigma_bar}, 0 if n/a
    double linf_bound = 0.0;       // certified sup bound (= ||g||_dxi,inf for S = 0)
    double l2_bound = 0.0;         // certified C2 ||S||_2 + c~ ||g||_2 (0 if no bounds known)
    double linf_ratio = 0.0;       // observed ||u||_inf / ||g||_dxi,inf

    // Semilinear certificate: with q = C2 C0 and eps = ||g||, the ball radius
    // delta solves q(eps+delta)^2 = delta and the certified factor is
    // q(eps+delta) < 1/2. Observed Picard ratios are recorded alongside.
    bool contraction_certified = false;
    double contraction_factor = 0.0;
    double delta_ball = 0.0;
    double max_picard_iterate_norm = 0.0;
    std::vector<double> picard_ratios;
    double observed_contraction = 0.0;
};

struct TransportOptions {
    double tol_source = 1e-10;   // relative L_inf tolerance of the source iteration
    int max_source_iter = 10000;
    double tol_picard = 1e-10;   // relative tolerance of the Picard loop
    int max_picard_iter = 200;
};

/// One application of the sweep map M(u; g, S): a full set of per-direction
/// step-characteristics sweeps with emission sigma_s (Theta u) + S and inflow
/// g. The linear solver iterates this map to its fixed point, so
/// u - M(u; g, S) is the natural discrete residual of a candidate u.
PhaseField transport_fixed_point_apply(const CoefficientSet& c, const SpatialGrid& g,
                                       const AngularQuadrature& q, const ScatteringKernel& kern,
                                       const BoundarySource& src, const PhaseField* volume_src,
                                       const PhaseField& u);

/// Linear RTE  v.grad(u) + sigma_a u = sigma_s K(u) + S,  u = g on Gamma_-.
/// Step-characteristics sweeps (exact exponential propagation across each
/// cell) with source iteration on the scattering term.
std::pair<PhaseField, TransportSolveReport> solve_linear_rte(
    const CoefficientSet& c, const SpatialGrid& g, const AngularQuadrature& q,
    const ScatteringKernel& kern, const BoundarySource& src,
    const PhaseField* volume_src = nullptr, const TransportOptions& opt = {});

/// Semilinear RTE with the two-photon term sigma_b <u> u, solved as
/// u = u0 + w with w the Picard fixed point of w -> T^{-1}(-sigma_b <u0+w>(u0+w)).
std::pair<PhaseField, TransportSolveReport> solve_semilinear_rte(
    const CoefficientSet& c, const SpatialGrid& g, const AngularQuadrature& q,
    const ScatteringKernel& kern, const BoundarySource& src, const TransportOptions& opt = {});

/// Integral-form evaluation of the right-hand side of the linear RTE along
/// exact rays (trapezoid rule, bilinearly interpolated coefficients); a
/// fixed point of this map solves the equation, so it serves as an
/// independent verification path for the sweep solver.
PhaseField characteristics_oracle(const CoefficientSet& c, const SpatialGrid& g,
                                  const AngularQuadrature& q, const ScatteringKernel& kern,
                                  const BoundarySource& src, const PhaseField& u,
                                  const PhaseField* volume_src = nullptr);

/// epsilon' = inf(g) * exp(-d_Omega * sup(sigma_a + sigma_s)); requires
/// inf(g) > 0.
double positivity_lower_bound(const CoefficientSet& c, const SpatialGrid& g,
                              const BoundarySource& src);

} // namespace qpat
