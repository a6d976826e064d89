#pragma once

#include <limits>
#include <optional>

#include "qpat/pa_data.hpp"

namespace qpat {

/// Admissibility constants of the class A1 (directional log-derivative
/// margin alpha) and A2 (contraction constant Pi), plus the stability
/// constant C of the sigma_b estimate. The Pi bound uses the a-priori
/// constants C2 = 1/(nu c0) and C0, exactly as certified; it is very
/// conservative (Pi >= 1 + C0/c0 provably), so in_A2 mostly reports false
/// while the actual fixed-point iterations still contract. The observed
/// contraction is recorded separately by the reconstructions.
struct AdmissibilityCertificate {
    double alpha = 0.0;            // inf over X of sigma_a + v.grad ln(h1/(Xi sigma_a))
    double alpha_min = 0.0;        // declared threshold for membership in A1
    double Pi = 0.0;               // C2 C0 || Xi sigma_a g / h1 ||_{dxi,inf}
    double boundary_ratio = 0.0;   // || Xi sigma_a g / h1 ||_{dxi,inf}
    bool in_A1 = false;
    bool in_A2 = false;
    double stability_constant = std::numeric_limits<double>::quiet_NaN(); // finite iff in_A2
    // Lemma "maximum bound" check: max_X u1/<u1> vs the boundary ratio.
    double lemma_lhs = 0.0;
    double lemma_rhs = 0.0;
    bool lemma_ok = false;
    double C2 = 0.0;
    double C0 = 0.0;
};

AdmissibilityCertificate certify_admissibility(const CoefficientSet& c, const SpatialGrid& g,
                                               const AngularQuadrature& q,
                                               const ScatteringKernel& kern,
                                               const BoundarySource& src, const ScalarField& h1,
                                               double alpha_min = 1e-6,
                                               const TransportOptions& opt = {});

struct ReconstructionOptions {
    double tol = 1e-10;            // L2(Omega) norm of the update
    int max_iter = 100;
    double clamp_lo = 0.0;         // 0 means: use the declared c0/C0 bounds
    double clamp_hi = 0.0;
    bool enforce_a2 = false;       // hard-gate the sigma_b iteration on Pi < 1
    double mask_fraction_limit = 0.01;
    std::optional<ScalarField> initial_guess;
    TransportOptions transport;
    DiffusionOptions diffusion;
};

struct ReconstructionResult {
    ScalarField recovered;
    int iterations = 0;
    double residual = 0.0;               // L2(Omega) of the last update
    std::vector<double> update_history;  // L2(Omega) update norms
    double observed_contraction = 0.0;   // max update ratio after iteration 2
    std::size_t masked_cells = 0;
    double data_misfit = 0.0;            // relative L2 misfit of reproduced data
    // Boundary trace recovered directly from the data (diffusion sigma_a).
    std::optional<DirichletTrace> recovered_trace;
    std::optional<AdmissibilityCertificate> certificate;
};

/// sigma_a from first-order transport data: fixed point of
/// sigma -> h1 / (Xi <u1(sigma)>), clamped to the declared bounds and frozen
/// to the known values on the delta-vicinity. `c.sigma_a` provides those
/// known vicinity values (and nothing else of it is used).
ReconstructionResult reconstruct_sigma_a_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                   const AngularQuadrature& q,
                                                   const ScatteringKernel& kern,
                                                   const BoundarySource& src,
                                                   const ScalarField& h1,
                                                   const ReconstructionOptions& opt = {});

/// sigma_b from second-order transport data: fixed point of
/// sigma_b -> (h2/Xi - sigma_a <u2(sigma_b)>) / (2 <u1>^2) with u1 cached
/// (sigma_b does not enter its equation).
ReconstructionResult reconstruct_sigma_b_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                   const AngularQuadrature& q,
                                                   const ScatteringKernel& kern,
                                                   const BoundarySource& src,
                                                   const ScalarField& h2,
                                                   const ReconstructionOptions& opt = {});

/// sigma_a from first-order diffusion data (fixed point through u1), plus
/// the boundary trace h1/(Xi g).
ReconstructionResult reconstruct_sigma_a_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                   const DirichletTrace& bc,
                                                   const ScalarField& h1,
                                                   const ReconstructionOptions& opt = {});

/// sigma_b from second-order diffusion data via the auxiliary problem
///   -div(gamma grad psi) = -div(gamma grad U) + sigma_a U,  psi = U on the
/// boundary, U = h2/(Xi sigma_a); then sigma_b = psi sigma_a / (2 u1^2).
/// Direct (non-iterative); with shared discretization psi = U - u2 holds
/// identically, so the round trip is exact up to CG tolerance.
ReconstructionResult reconstruct_sigma_b_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                   const DirichletTrace& bc,
                                                   const ScalarField& h2,
                                                   const ReconstructionOptions& opt = {});

} // namespace qpat
