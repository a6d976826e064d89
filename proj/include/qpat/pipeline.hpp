#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qpat/config.hpp"
#include "qpat/io.hpp"

namespace qpat {

struct PipelineResult {
    std::vector<std::string> artifacts; // file names relative to out_dir
    Report summary;
};

/// Runs one pipeline command into `out_dir` (created if needed) and writes
/// a manifest of every artifact. Commands: forward-transport,
/// forward-diffusion, linearize, make-data, certify, recon-sigma-a,
/// recon-sigma-b, uq-sweep, verify-derivatives. Precondition violations
/// throw PreconditionError (exit 2 at the CLI), non-convergence throws
/// DivergenceError (exit 3).
PipelineResult run_pipeline(const std::string& cmd, const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir);

} // namespace qpat
