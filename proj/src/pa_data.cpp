#include "qpat/pa_data.hpp"

#include <random>

namespace qpat {

ScalarField internal_data_transport(const CoefficientSet& c, const SpatialGrid& g,
                                    const AngularQuadrature& q, const PhaseField& u) {
    if (u.nx() != g.nx() || u.ny() != g.ny() || u.n_dirs() != q.n_dirs())
        throw PreconditionError("internal_data: field shape mismatch");
    const ScalarField mean = velocity_average(u, q);
    ScalarField h(g);
    for (std::size_t cell = 0; cell < h.size(); ++cell)
        h[cell] = c.xi[cell] * (c.sigma_a[cell] * mean[cell] +
                                c.sigma_b[cell] * mean[cell] * mean[cell]);
    return h;
}

ScalarField internal_data_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                    const ScalarField& u) {
    if (u.size() != g.n_cells()) throw PreconditionError("internal_data: field shape mismatch");
    ScalarField h(g);
    for (std::size_t cell = 0; cell < h.size(); ++cell)
        h[cell] =
            c.xi[cell] * (c.sigma_a[cell] * u[cell] + c.sigma_b[cell] * u[cell] * u[cell]);
    return h;
}

InternalData linearized_data(const CoefficientSet& c, const SpatialGrid& g,
                             const LinearizationBundle& bundle, const AngularQuadrature* q) {
    InternalData d;
    d.regime = bundle.regime;
    d.h1 = ScalarField(g);
    d.h2 = ScalarField(g);
    if (bundle.regime == Regime::Transport) {
        if (bundle.u1_transport.size() == 0 || q == nullptr)
            throw PreconditionError("linearized_data: bundle regime mismatch");
        const ScalarField m1 = velocity_average(bundle.u1_transport, *q);
        const ScalarField m2 = velocity_average(bundle.u2_transport, *q);
        for (std::size_t cell = 0; cell < d.h1.size(); ++cell) {
            d.h1[cell] = c.xi[cell] * c.sigma_a[cell] * m1[cell];
            d.h2[cell] = c.xi[cell] * (c.sigma_a[cell] * m2[cell] +
                                       2.0 * c.sigma_b[cell] * m1[cell] * m1[cell]);
        }
    } else {
        if (bundle.u1_diffusion.size() == 0)
            throw PreconditionError("linearized_data: bundle regime mismatch");
        const ScalarField& v1 = bundle.u1_diffusion;
        const ScalarField& v2 = bundle.u2_diffusion;
        for (std::size_t cell = 0; cell < d.h1.size(); ++cell) {
            d.h1[cell] = c.xi[cell] * c.sigma_a[cell] * v1[cell];
            d.h2[cell] = c.xi[cell] * (c.sigma_a[cell] * v2[cell] +
                                       2.0 * c.sigma_b[cell] * v1[cell] * v1[cell]);
        }
    }
    return d;
}

InternalData make_internal_data_transport(const CoefficientSet& c, const SpatialGrid& g,
                                          const AngularQuadrature& q,
                                          const ScatteringKernel& kern, const BoundarySource& src,
                                          const TransportOptions& opt, const std::string& id) {
    const LinearizationBundle b = linearize_transport(c, g, q, kern, src, opt);
    InternalData d = linearized_data(c, g, b, &q);
    d.source_id = id;
    const PhaseField u = solve_semilinear_rte(c, g, q, kern, src, opt).first;
    d.h = internal_data_transport(c, g, q, u);
    return d;
}

InternalData make_internal_data_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                          const DirichletTrace& bc, const DiffusionOptions& opt,
                                          const std::string& id) {
    const LinearizationBundle b = linearize_diffusion(c, g, bc, opt);
    InternalData d = linearized_data(c, g, b);
    d.source_id = id;
    const ScalarField u = solve_semilinear_diffusion(c, g, bc, opt).first;
    d.h = internal_data_diffusion(c, g, u);
    return d;
}

std::vector<DataSample> sample_data_map_transport(const CoefficientSet& c, const SpatialGrid& g,
                                                  const AngularQuadrature& q,
                                                  const ScatteringKernel& kern,
                                                  const std::vector<BoundarySource>& sources,
                                                  const TransportOptions& opt) {
    std::vector<DataSample> out;
    out.reserve(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        DataSample ds;
        try {
            ds.data = make_internal_data_transport(c, g, q, kern, sources[s], opt,
                                                   "source-" + std::to_string(s));
            ds.ok = true;
        } catch (const Error& e) {
            ds.error = e.what();
        }
        out.push_back(std::move(ds));
    }
    return out;
}

std::vector<DataSample> sample_data_map_diffusion(const CoefficientSet& c, const SpatialGrid& g,
                                                  const std::vector<DirichletTrace>& sources,
                                                  const DiffusionOptions& opt) {
    std::vector<DataSample> out;
    out.reserve(sources.size());
    for (std::size_t s = 0; s < sources.size(); ++s) {
        DataSample ds;
        try {
            ds.data = make_internal_data_diffusion(c, g, sources[s], opt,
                                                   "source-" + std::to_string(s));
            ds.ok = true;
        } catch (const Error& e) {
            ds.error = e.what();
        }
        out.push_back(std::move(ds));
    }
    return out;
}

void add_gaussian_noise(ScalarField& f, double sigma, std::uint64_t seed) {
    if (sigma == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    const double scale = sigma * f.max_abs();
    for (double& v : f.data()) v += scale * n(rng);
}

} // namespace qpat
