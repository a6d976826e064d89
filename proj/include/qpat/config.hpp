#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpat/coefficients.hpp"
#include "qpat/diffusion.hpp"
#include "qpat/reconstruction.hpp"
#include "qpat/transport.hpp"
#include "qpat/uq.hpp"

namespace qpat {

/// Coefficient or source definition in a config:
///   constant <v> | gaussian-bump <base> <amp> <cx> <cy> <radius> | file <path>
struct FieldSpec {
    enum class Kind { Constant, GaussianBump, File } kind = Kind::Constant;
    double value = 1.0;                      // constant
    double base = 1.0, amp = 0.0;            // bump
    double cx = 0.5, cy = 0.5, radius = 0.1;
    std::string path;                        // file

    std::string to_string() const;
    static FieldSpec parse(const std::string& text, const std::string& key);
};

/// Flat key-value experiment configuration ("key = value", '#' comments).
/// Unknown keys are rejected; only `regime` is required, everything else
/// has documented defaults.
struct ExperimentConfig {
    Regime regime = Regime::Transport;

    int nx = 32, ny = 32;
    double x0 = 0.0, y0 = 0.0, width = 1.0, height = 1.0;
    double delta = 0.0625; // boundary layer where sigma_a/sigma_s are known

    int n_dirs = 16;
    std::string kernel = "isotropic"; // or "henyey-greenstein"
    double kernel_g = 0.5;

    double c0 = 0.2, C0 = 3.0;
    FieldSpec xi, sigma_a, sigma_b, sigma_s, gamma;

    FieldSpec source;       // boundary source / trace profile
    double source_epsilon = 1.0;

    double tol_source = 1e-10, tol_picard = 1e-10, tol_cg = 1e-12, tol_recon = 1e-10;
    int cap_source = 10000, cap_picard = 200, cap_cg = 50000, cap_recon = 100;

    double norms_p = 4.0;
    double recon_alpha_min = 1e-6;
    bool recon_enforce_a2 = false;

    std::vector<double> uq_etas = {0.01, 0.05, 0.1};
    std::string uq_perturbation = "constant"; // or "bump"
    std::vector<double> lin_eps_list = {1e-2, 5e-3, 2.5e-3};

    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig parse_file(const std::string& path);
    std::string to_text() const;
    void apply_override(const std::string& key, const std::string& value);
    void validate() const;

    SpatialGrid build_grid() const;
    AngularQuadrature build_quadrature() const;
    ScatteringKernel build_kernel(const AngularQuadrature& q) const;
    /// Bump fields are frozen to their base value on the delta-vicinity so
    /// the known-boundary-layer assumption holds exactly.
    CoefficientSet build_coefficients(const SpatialGrid& g) const;
    /// Inflow source scaled by source_epsilon (direction-independent).
    BoundarySource build_transport_source(const SpatialGrid& g,
                                          const AngularQuadrature& q) const;
    DirichletTrace build_diffusion_trace(const SpatialGrid& g) const;

    TransportOptions transport_options() const;
    DiffusionOptions diffusion_options() const;
    ReconstructionOptions recon_options() const;
};

} // namespace qpat
