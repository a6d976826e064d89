#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qpat/field.hpp"

namespace qpat {

enum class Regime { Transport, Diffusion };

inline const char* regime_name(Regime r) {
    return r == Regime::Transport ? "transport" : "diffusion";
}

/// Optical coefficient fields on the grid plus the declared global bounds
/// 0 < c0 <= field <= C0. `gamma` is only meaningful in the diffusion
/// regime, `sigma_s` only in the transport regime.
struct CoefficientSet {
    ScalarField xi;       // Grueneisen coefficient
    ScalarField sigma_a;  // single-photon absorption
    ScalarField sigma_b;  // two-photon absorption
    ScalarField sigma_s;  // scattering (transport)
    ScalarField gamma;    // diffusion coefficient (diffusion)
    double c0 = 0.0;
    double C0 = 0.0;

    static CoefficientSet constants(const SpatialGrid& g, double xi_v, double sa, double sb,
                                    double ss, double gam, double c0_, double C0_) {
        CoefficientSet c;
        c.xi = ScalarField(g, xi_v);
        c.sigma_a = ScalarField(g, sa);
        c.sigma_b = ScalarField(g, sb);
        c.sigma_s = ScalarField(g, ss);
        c.gamma = ScalarField(g, gam);
        c.c0 = c0_;
        c.C0 = C0_;
        return c;
    }
};

/// Constants certified by validate_coefficients.
struct CoefficientCertificate {
    double c0 = 0.0;          // declared lower bound
    double C0 = 0.0;          // declared upper bound
    double nu = 0.0;          // inf sigma_a / (sigma_a + sigma_s)
    double sigma_bar = 0.0;   // sup (sigma_a + sigma_s)
    double C2 = 0.0;          // 1 / (nu * c0), source-problem constant
    double field_min = 0.0;   // tightest observed bounds over checked fields
    double field_max = 0.0;
    bool ok = false;
    std::vector<std::string> violations;
};

/// Checks assumption (a) (declared bounds hold pointwise for the fields of
/// the regime), the constancy of sigma_a and sigma_s on the delta-vicinity
/// (assumption (b), transport), and reports nu, sigma_bar and C2 = 1/(nu c0).
/// Throws PreconditionError when `must_pass` and a violation is found.
CoefficientCertificate validate_coefficients(const CoefficientSet& c, const SpatialGrid& g,
                                             Regime regime, bool must_pass = true);

/// Milder check used by the solvers themselves: sigma_a (and gamma in the
/// diffusion regime) must be >= floor > 0; sigma_s and sigma_b only
/// nonnegative, so degenerate cases (sigma_s = 0, sigma_b = 0) stay usable.
void require_solvable(const CoefficientSet& c, const SpatialGrid& g, Regime regime);

} // namespace qpat
