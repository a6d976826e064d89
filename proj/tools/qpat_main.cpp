#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpat/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"qpat: semilinear radiative-transport / diffusion photoacoustic toolbox"};

    std::string config_path;
    std::string cmd;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "experiment config file (key = value lines)")
        ->required();
    app.add_option("--cmd", cmd,
                   "pipeline command: forward-transport | forward-diffusion | linearize | "
                   "make-data | certify | recon-sigma-a | recon-sigma-b | uq-sweep | "
                   "verify-derivatives")
        ->required();
    app.add_option("--out", out_dir, "output directory (defaults to the config's out.dir)");
    app.add_option("--override", overrides, "config override key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        qpat::ExperimentConfig cfg = qpat::ExperimentConfig::parse_file(config_path);
        for (const auto& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw qpat::ParseError("--override expects key=value, got '" + ov + "'");
            cfg.apply_override(ov.substr(0, eq), ov.substr(eq + 1));
        }
        cfg.validate();
        const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
        const qpat::PipelineResult res = qpat::run_pipeline(cmd, cfg, dir);
        for (const auto& [k, v] : res.summary) std::cout << k << " = " << v << "\n";
        std::cout << "artifacts(" << dir << "):";
        for (const auto& a : res.artifacts) std::cout << " " << a;
        std::cout << "\n";
        return 0;
    } catch (const qpat::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const qpat::PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
