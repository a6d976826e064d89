#include "qpat/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "qpat/pa_data.hpp"

namespace qpat {

namespace {

namespace fs = std::filesystem;

struct Ctx {
    const ExperimentConfig& cfg;
    fs::path dir;
    PipelineResult res;

    void put(const std::string& key, double v) { res.summary.emplace_back(key, format_double(v)); }
    void put(const std::string& key, const std::string& v) { res.summary.emplace_back(key, v); }

    void save(const std::string& name, const ScalarField& f) {
        write_field(dir / name, f);
        res.artifacts.push_back(name);
    }
    void save(const std::string& name, const PhaseField& f) {
        write_field(dir / name, f);
        res.artifacts.push_back(name);
    }
    void save_report(const std::string& name) {
        write_report(dir / name, res.summary);
        res.artifacts.push_back(name);
    }
    void save_csv(const std::string& name, const std::vector<std::string>& hdr,
                  const std::vector<std::vector<double>>& rows) {
        write_csv(dir / name, hdr, rows);
        res.artifacts.push_back(name);
    }
};

void transport_report(Ctx& ctx, const TransportSolveReport& rep) {
    ctx.put("source_iterations", static_cast<double>(rep.source_iterations));
    ctx.put("picard_iterations", static_cast<double>(rep.picard_iterations));
    ctx.put("residual", rep.residual);
    ctx.put("residual_scale", rep.residual_scale);
    ctx.put("epsilon_prime", rep.epsilon_prime);
    ctx.put("linf_bound", rep.linf_bound);
    ctx.put("l2_bound", rep.l2_bound);
    ctx.put("linf_ratio", rep.linf_ratio);
    if (rep.contraction_certified) {
        ctx.put("contraction_factor_certified", rep.contraction_factor);
        ctx.put("delta_ball", rep.delta_ball);
        ctx.put("observed_contraction", rep.observed_contraction);
    }
}

void recon_report(Ctx& ctx, const ReconstructionResult& r, const ScalarField& truth,
                  const SpatialGrid& g) {
    ctx.put("iterations", static_cast<double>(r.iterations));
    ctx.put("residual", r.residual);
    ctx.put("observed_contraction", r.observed_contraction);
    ctx.put("masked_cells", static_cast<double>(r.masked_cells));
    ctx.put("data_misfit", r.data_misfit);
    const double tn = l2_norm(truth, g);
    ctx.put("relative_l2_error",
            tn > 0.0 ? l2_norm(r.recovered - truth, g) / tn : l2_norm(r.recovered, g));
    if (r.certificate) {
        ctx.put("certificate.alpha", r.certificate->alpha);
        ctx.put("certificate.Pi", r.certificate->Pi);
        ctx.put("certificate.in_A1", r.certificate->in_A1 ? "true" : "false");
        ctx.put("certificate.in_A2", r.certificate->in_A2 ? "true" : "false");
    }
}

void cmd_forward_transport(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const AngularQuadrature q = cfg.build_quadrature();
    const ScatteringKernel kern = cfg.build_kernel(q);
    const CoefficientSet c = cfg.build_coefficients(g);
    const BoundarySource src = cfg.build_transport_source(g, q);
    auto [u, rep] = solve_semilinear_rte(c, g, q, kern, src, cfg.transport_options());
    ctx.save("u.qpat", u);
    ctx.save("u_mean.qpat", velocity_average(u, q));
    ctx.save("H.qpat", internal_data_transport(c, g, q, u));
    transport_report(ctx, rep);
    ctx.save_report("report.txt");
}

void cmd_forward_diffusion(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const CoefficientSet c = cfg.build_coefficients(g);
    const DirichletTrace bc = cfg.build_diffusion_trace(g);
    auto [u, rep] = solve_semilinear_diffusion(c, g, bc, cfg.diffusion_options());
    ctx.save("u.qpat", u);
    ctx.save("H.qpat", internal_data_diffusion(c, g, u));
    ctx.put("cg_iterations", static_cast<double>(rep.cg_iterations));
    ctx.put("picard_iterations", static_cast<double>(rep.picard_iterations));
    ctx.put("residual", rep.residual);
    ctx.put("linf_ratio", rep.linf_ratio);
    ctx.put("ball_check_ok", rep.ball_check_ok ? "true" : "false");
    ctx.save_report("report.txt");
}

void cmd_linearize(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const CoefficientSet c = cfg.build_coefficients(g);
    if (cfg.regime == Regime::Transport) {
        const AngularQuadrature q = cfg.build_quadrature();
        const ScatteringKernel kern = cfg.build_kernel(q);
        const BoundarySource src = cfg.build_transport_source(g, q);
        const LinearizationBundle b =
            linearize_transport(c, g, q, kern, src, cfg.transport_options());
        ctx.save("u1.qpat", b.u1_transport);
        ctx.save("u2.qpat", b.u2_transport);
        ctx.save("u1_mean.qpat", velocity_average(b.u1_transport, q));
        ctx.save("u2_mean.qpat", velocity_average(b.u2_transport, q));
    } else {
        const DirichletTrace bc = cfg.build_diffusion_trace(g);
        const LinearizationBundle b = linearize_diffusion(c, g, bc, cfg.diffusion_options());
        ctx.save("u1.qpat", b.u1_diffusion);
        ctx.save("u2.qpat", b.u2_diffusion);
    }
    ctx.put("regime", regime_name(cfg.regime));
    ctx.save_report("report.txt");
}

InternalData make_data(const ExperimentConfig& cfg, const SpatialGrid& g) {
    const CoefficientSet c = cfg.build_coefficients(g);
    InternalData d;
    if (cfg.regime == Regime::Transport) {
        const AngularQuadrature q = cfg.build_quadrature();
        const ScatteringKernel kern = cfg.build_kernel(q);
        const BoundarySource src = cfg.build_transport_source(g, q);
        d = make_internal_data_transport(c, g, q, kern, src, cfg.transport_options(), "config");
    } else {
        const DirichletTrace bc = cfg.build_diffusion_trace(g);
        d = make_internal_data_diffusion(c, g, bc, cfg.diffusion_options(), "config");
    }
    if (cfg.noise_sigma > 0.0) {
        add_gaussian_noise(d.h, cfg.noise_sigma, cfg.seed);
        add_gaussian_noise(d.h1, cfg.noise_sigma, cfg.seed + 1);
        add_gaussian_noise(d.h2, cfg.noise_sigma, cfg.seed + 2);
    }
    return d;
}

void cmd_make_data(Ctx& ctx) {
    const SpatialGrid g = ctx.cfg.build_grid();
    const InternalData d = make_data(ctx.cfg, g);
    ctx.save("h.qpat", d.h);
    ctx.save("h1.qpat", d.h1);
    ctx.save("h2.qpat", d.h2);
    ctx.put("regime", regime_name(d.regime));
    ctx.put("source_id", d.source_id);
    ctx.put("noise.sigma", ctx.cfg.noise_sigma);
    ctx.save_report("report.txt");
}

void cmd_certify(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.regime != Regime::Transport)
        throw PreconditionError("certify: admissibility classes are transport-regime only");
    const SpatialGrid g = cfg.build_grid();
    const AngularQuadrature q = cfg.build_quadrature();
    const ScatteringKernel kern = cfg.build_kernel(q);
    const CoefficientSet c = cfg.build_coefficients(g);
    const BoundarySource src = cfg.build_transport_source(g, q);
    validate_coefficients(c, g, Regime::Transport);

    const LinearizationBundle b = linearize_transport(c, g, q, kern, src,
                                                      cfg.transport_options());
    const InternalData d = linearized_data(c, g, b, &q);
    const AdmissibilityCertificate cert = certify_admissibility(
        c, g, q, kern, src, d.h1, cfg.recon_alpha_min, cfg.transport_options());

    ctx.put("alpha", cert.alpha);
    ctx.put("alpha_min", cert.alpha_min);
    ctx.put("Pi", cert.Pi);
    ctx.put("boundary_ratio", cert.boundary_ratio);
    ctx.put("C2", cert.C2);
    ctx.put("C0", cert.C0);
    ctx.put("in_A1", cert.in_A1 ? "true" : "false");
    ctx.put("in_A2", cert.in_A2 ? "true" : "false");
    ctx.put("stability_constant", cert.stability_constant);
    ctx.put("lemma_max_bound_lhs", cert.lemma_lhs);
    ctx.put("lemma_max_bound_rhs", cert.lemma_rhs);
    ctx.put("lemma_ok", cert.lemma_ok ? "true" : "false");
    ctx.save_report("certificate.txt");

    if (!cert.in_A1)
        throw PreconditionError("A1: alpha < alpha_min (alpha = " + format_double(cert.alpha) +
                                ")");
    if (!cert.in_A2)
        throw PreconditionError("A2: Pi >= 1 (Pi = " + format_double(cert.Pi) + ")");
}

void cmd_recon_sigma_a(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const CoefficientSet c = cfg.build_coefficients(g);
    const InternalData d = make_data(cfg, g);
    ReconstructionResult r;
    if (cfg.regime == Regime::Transport) {
        const AngularQuadrature q = cfg.build_quadrature();
        const ScatteringKernel kern = cfg.build_kernel(q);
        const BoundarySource src = cfg.build_transport_source(g, q);
        r = reconstruct_sigma_a_transport(c, g, q, kern, src, d.h1, cfg.recon_options());
    } else {
        const DirichletTrace bc = cfg.build_diffusion_trace(g);
        r = reconstruct_sigma_a_diffusion(c, g, bc, d.h1, cfg.recon_options());
    }
    ctx.save("sigma_a_recovered.qpat", r.recovered);
    recon_report(ctx, r, c.sigma_a, g);
    ctx.save_report("result.txt");
}

void cmd_recon_sigma_b(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const CoefficientSet c = cfg.build_coefficients(g);
    const InternalData d = make_data(cfg, g);
    ReconstructionResult r;
    if (cfg.regime == Regime::Transport) {
        const AngularQuadrature q = cfg.build_quadrature();
        const ScatteringKernel kern = cfg.build_kernel(q);
        const BoundarySource src = cfg.build_transport_source(g, q);
        r = reconstruct_sigma_b_transport(c, g, q, kern, src, d.h2, cfg.recon_options());
    } else {
        const DirichletTrace bc = cfg.build_diffusion_trace(g);
        r = reconstruct_sigma_b_diffusion(c, g, bc, d.h2, cfg.recon_options());
    }
    ctx.save("sigma_b_recovered.qpat", r.recovered);
    recon_report(ctx, r, c.sigma_b, g);
    ctx.save_report("result.txt");
}

void cmd_uq_sweep(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    const SpatialGrid g = cfg.build_grid();
    const CoefficientSet c = cfg.build_coefficients(g);
    UQOptions opt;
    opt.recon = cfg.recon_options();
    opt.p = cfg.norms_p;
    opt.perturbation = cfg.uq_perturbation == "bump" ? PerturbationKind::Bump
                                                     : PerturbationKind::Constant;
    UQSweepResult res;
    if (cfg.regime == Regime::Transport) {
        const AngularQuadrature q = cfg.build_quadrature();
        const ScatteringKernel kern = cfg.build_kernel(q);
        const BoundarySource src = cfg.build_transport_source(g, q);
        res = uq_transport_sweep(c, g, q, kern, src, cfg.uq_etas, opt);
    } else {
        const DirichletTrace bc = cfg.build_diffusion_trace(g);
        res = uq_diffusion_sweep(c, g, bc, cfg.uq_etas, opt);
    }

    std::vector<std::vector<double>> rows;
    for (const auto& r : res.rows)
        rows.push_back({r.eta, r.mis_norm, r.err_a, r.err_b, r.ratio, r.defect_u1, r.defect_u2,
                        r.intermediate_lhs, r.intermediate_rhs,
                        r.recon_ok ? 1.0 : 0.0});
    ctx.save_csv("uq.csv",
                 {"eta", "mis_norm", "err_a", "err_b", "ratio", "defect_u1", "defect_u2",
                  "intermediate_lhs", "intermediate_rhs", "recon_ok"},
                 rows);
    ctx.put("c_max", res.c_max);
    ctx.put("c_lsq", res.c_lsq);
    ctx.put("c_emp_intermediate", res.c_emp_intermediate);
    int failures = 0;
    for (const auto& r : res.rows)
        if (!r.recon_ok) ++failures;
    ctx.put("failed_etas", static_cast<double>(failures));
    ctx.save_report("uq_summary.txt");
    if (failures == static_cast<int>(res.rows.size()) && !res.rows.empty())
        throw DivergenceError("uq-sweep: every eta failed to reconstruct");
}

void cmd_verify_derivatives(Ctx& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.regime != Regime::Transport)
        throw PreconditionError(
            "verify-derivatives: implemented for the transport regime (the diffusion "
            "analogue is covered by the library tests)");
    const SpatialGrid g = cfg.build_grid();
    const AngularQuadrature q = cfg.build_quadrature();
    const ScatteringKernel kern = cfg.build_kernel(q);
    const CoefficientSet c = cfg.build_coefficients(g);
    // The unit-profile source: epsilon scaling is applied per eps entry.
    ExperimentConfig unit = cfg;
    unit.source_epsilon = 1.0;
    const BoundarySource src = unit.build_transport_source(g, q);
    const DerivativeCheckReport rep = verify_derivatives_transport(
        c, g, q, kern, src, cfg.lin_eps_list, cfg.transport_options());

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < rep.eps.size(); ++i)
        rows.push_back({rep.eps[i], rep.r1[i], rep.r2[i],
                        i + 1 < rep.eps.size() ? rep.r1_ratio[i] : 0.0,
                        i + 1 < rep.eps.size() ? rep.r2_ratio[i] : 0.0});
    ctx.save_csv("derivatives.csv", {"eps", "r1", "r2", "r1_ratio", "r2_ratio"}, rows);
    ctx.put("u1_eps_dd_error", rep.u1_eps_dd_error);
    ctx.put("u2_eps_dd_error", rep.u2_eps_dd_error);
    ctx.put("ratios_ok", rep.ratios_ok ? "true" : "false");
    ctx.put("sigma_b_zero", rep.sigma_b_zero ? "true" : "false");
    ctx.save_report("report.txt");
    if (!rep.ratios_ok)
        throw DivergenceError("verify-derivatives: Richardson ratio outside [1.5, 2.5]");
}

} // namespace

PipelineResult run_pipeline(const std::string& cmd, const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir) {
    cfg.validate();
    fs::create_directories(out_dir);
    Ctx ctx{cfg, out_dir, {}};
    ctx.put("cmd", cmd);
    try {
        if (cmd == "forward-transport") cmd_forward_transport(ctx);
        else if (cmd == "forward-diffusion") cmd_forward_diffusion(ctx);
        else if (cmd == "linearize") cmd_linearize(ctx);
        else if (cmd == "make-data") cmd_make_data(ctx);
        else if (cmd == "certify") cmd_certify(ctx);
        else if (cmd == "recon-sigma-a") cmd_recon_sigma_a(ctx);
        else if (cmd == "recon-sigma-b") cmd_recon_sigma_b(ctx);
        else if (cmd == "uq-sweep") cmd_uq_sweep(ctx);
        else if (cmd == "verify-derivatives") cmd_verify_derivatives(ctx);
        else
            throw PreconditionError(
                "unknown command '" + cmd +
                "' (forward-transport | forward-diffusion | linearize | make-data | certify | "
                "recon-sigma-a | recon-sigma-b | uq-sweep | verify-derivatives)");
    } catch (...) {
        // Keep whatever artifacts were produced enumerable even on failure.
        write_manifest(out_dir, ctx.res.artifacts);
        throw;
    }
    write_manifest(out_dir, ctx.res.artifacts);
    ctx.res.artifacts.push_back("manifest.txt");
    return std::move(ctx.res);
}

} // namespace qpat
