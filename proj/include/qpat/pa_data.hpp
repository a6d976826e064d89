#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpat/linearization.hpp"

namespace qpat {

/// Photoacoustic internal data and its first two linearizations.
struct InternalData {
    Regime regime = Regime::Transport;
    std::string source_id;
    ScalarField h;   // full H(x) of the semilinear solution
    ScalarField h1;  // first-order data
    ScalarField h2;  // second-order data
};

/// H_T = Xi (sigma_a <u> + sigma_b <u>^2).
ScalarField internal_data_transport(const CoefficientSet& c, const SpatialGrid& g,
                                    const AngularQuadrature& q, const PhaseField& u);

/// H_D = Xi (sigma_a u + sigma_b u^2).
ScalarField internal_data_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                    const ScalarField& u);

/// Fills (h1, h2) from a linearization bundle:
/// transport  h1 = Xi sigma_a <u1>,  h2 = Xi (sigma_a <u2> + 2 sigma_b <u1>^2)
/// diffusion  h1 = Xi sigma_a u1,    h2 = Xi (sigma_a u2 + 2 sigma_b u1^2).
/// The quadrature is required for transport bundles only.
InternalData linearized_data(const CoefficientSet& c, const SpatialGrid& g,
                             const LinearizationBundle& bundle,
                             const AngularQuadrature* q = nullptr);

/// Full forward data for one source: semilinear solve for h plus the
/// linearizations for h1/h2.
InternalData make_internal_data_transport(const CoefficientSet& c, const SpatialGrid& g,
                                          const AngularQuadrature& q,
                                          const ScatteringKernel& kern, const BoundarySource& src,
                                          const TransportOptions& opt = {},
                                          const std::string& id = "");
InternalData make_internal_data_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                          const DirichletTrace& bc,
                                          const DiffusionOptions& opt = {},
                                          const std::string& id = "");

/// One sampling of the transport data map: per-source failures are recorded
/// instead of aborting the batch.
struct DataSample {
    bool ok = false;
    std::string error;
    InternalData data;
};
std::vector<DataSample> sample_data_map_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                  const AngularQuadrature& q,
                                                  const ScatteringKernel& kern,
                                                  const std::vector<BoundarySource>& sources,
                                                  const TransportOptions& opt = {});
std::vector<DataSample> sample_data_map_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                  const std::vector<DirichletTrace>& sources,
                                                  const DiffusionOptions& opt = {});

/// Additive Gaussian perturbation, amplitude sigma * ||f||_inf, fixed seed.
void add_gaussian_noise(ScalarField& f, double sigma, std::uint64_t seed);

} // namespace qpat
