#pragma once

#include "qpat/reconstruction.hpp"

namespace qpat {

enum class PerturbationKind { Constant, Bump };

/// Per-eta record of one uncertainty-quantification run.
struct UQRow {
    double eta = 0.0;
    double mis_norm = 0.0;       // ||sigma_s - sigma_s~||_L2 or ||(g~-g)/g~||_W1p
    double err_a = 0.0;          // L2(Omega) distance between the two reconstructions
    double err_b = 0.0;
    double err_a_lp = 0.0;       // Lp versions (diffusion inequality side)
    double err_b_lp = 0.0;
    double ratio = 0.0;          // (err_a + err_b) / mis_norm, 0 at eta = 0
    bool bitwise_zero = false;   // eta = 0 reproduces the reference bitwise

    // Residual-equation identity defects of the difference fields (the
    // w / w-tilde / w-hat problems in the stability proofs), and the
    // tolerance they are compared against.
    double defect_u1 = 0.0;
    double defect_u2 = 0.0;
    double defect_tol = 0.0;
    bool defects_ok = false;

    // Intermediate inequality: transport EQ-style bound ||w~|| <= C2(...),
    // diffusion first-linearization bound ratio.
    double intermediate_lhs = 0.0;
    double intermediate_rhs = 0.0;
    bool intermediate_ok = false;

    bool recon_ok = false;
    std::string error;
};

struct UQSweepResult {
    Regime regime = Regime::Transport;
    std::vector<UQRow> rows;        // sorted by eta
    double c_max = 0.0;             // max ratio (conservative Lipschitz fit)
    double c_lsq = 0.0;             // least-squares fit through the origin
    double c_emp_intermediate = 0.0; // max intermediate lhs/mis ratio (diffusion)
    ScalarField sigma_a_reference;  // reconstruction with the true parameter
    ScalarField sigma_b_reference;
};

struct UQOptions {
    PerturbationKind perturbation = PerturbationKind::Constant;
    double p = 4.0;                 // Lp / W1p exponent (diffusion side)
    ReconstructionOptions recon;
};

/// Errors in (sigma_a, sigma_b) reconstructed with misspecified scattering
/// sigma_s~ = (1+eta) sigma_s against the reference reconstruction, all from
/// one data set generated by c_true.
UQSweepResult uq_transport_sweep(const CoefficientSet& c_true, const SpatialGrid& g,
                                 const AngularQuadrature& q, const ScatteringKernel& kern,
                                 const BoundarySource& src, const std::vector<double>& etas,
                                 const UQOptions& opt = {});

/// Diffusion analogue with gamma~ = (1+eta) gamma and the misspecification
/// measured by ||(gamma~ - gamma)/gamma~||_{W^{1,p}}.
UQSweepResult uq_diffusion_sweep(const CoefficientSet& c_true, const SpatialGrid& g,
                                 const DirichletTrace& bc, const std::vector<double>& etas,
                                 const UQOptions& opt = {});

} // namespace qpat
