#pragma once

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"
#include "qpat/quadrature.hpp"

namespace qpat {

enum class NormKind { Linf, L2_X, L2_Omega, Lp_Omega, W2p_discrete, Ldxi_inf_Gamma };

/// ||f||_Lp(Omega) with the cell-area measure.
double lp_norm(const ScalarField& f, const SpatialGrid& g, double p);
double l2_norm(const ScalarField& f, const SpatialGrid& g);
double linf_norm(const ScalarField& f);

/// ||u||_L2(X) with dx * normalized angular measure.
double l2_norm_phase(const PhaseField& u, const SpatialGrid& g, const AngularQuadrature& q);
double linf_norm(const PhaseField& u);

/// Centered-difference first derivatives, second-order one-sided rows at
/// the boundary.
ScalarField diff_x(const ScalarField& f, const SpatialGrid& g);
ScalarField diff_y(const ScalarField& f, const SpatialGrid& g);
/// Three-point second derivatives, one-sided copy at the boundary rows.
ScalarField diff_xx(const ScalarField& f, const SpatialGrid& g);
ScalarField diff_yy(const ScalarField& f, const SpatialGrid& g);

/// Discrete W^{1,p}: (||f||^p + ||fx||^p + ||fy||^p)^{1/p}.
double w1p_norm(const ScalarField& f, const SpatialGrid& g, double p);
/// Discrete W^{2,p} surrogate adding fxx, fyy and the mixed fxy; requires
/// p > 2 (the estimates need p > d = 2).
double w2p_norm(const ScalarField& f, const SpatialGrid& g, double p);

/// Tag-dispatched entry point mirroring the operation contract.
double discrete_norm(const ScalarField& f, const SpatialGrid& g, NormKind which, double p = 2.0);
double discrete_norm(const PhaseField& u, const SpatialGrid& g, const AngularQuadrature& q,
                     NormKind which);
double discrete_norm(const BoundarySource& b, NormKind which);

} // namespace qpat
