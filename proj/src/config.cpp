#include "qpat/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "qpat/io.hpp"

namespace qpat {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    const auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParseError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& v, const std::string& key) {
    const double d = to_double(v, key);
    const int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ParseError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return i;
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& key) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (is >> tok) out.push_back(to_double(tok, key));
    if (out.empty()) throw ParseError("config: key '" + key + "' expects a list of numbers");
    return out;
}

std::string list_to_string(const std::vector<double>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << format_double(v[i]);
    return os.str();
}

} // namespace

std::string FieldSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Constant: os << "constant " << format_double(value); break;
        case Kind::GaussianBump:
            os << "gaussian-bump " << format_double(base) << " " << format_double(amp) << " "
               << format_double(cx) << " " << format_double(cy) << " " << format_double(radius);
            break;
        case Kind::File: os << "file " << path; break;
    }
    return os.str();
}

FieldSpec FieldSpec::parse(const std::string& text, const std::string& key) {
    std::istringstream is(text);
    std::string kind;
    is >> kind;
    FieldSpec fs;
    if (kind == "constant") {
        fs.kind = Kind::Constant;
        std::string v;
        if (!(is >> v)) throw ParseError("config: '" + key + "': constant needs a value");
        fs.value = to_double(v, key);
    } else if (kind == "gaussian-bump") {
        fs.kind = Kind::GaussianBump;
        std::string b, a, x, y, r;
        if (!(is >> b >> a >> x >> y >> r))
            throw ParseError("config: '" + key +
                             "': gaussian-bump needs <base> <amp> <cx> <cy> <radius>");
        fs.base = to_double(b, key);
        fs.amp = to_double(a, key);
        fs.cx = to_double(x, key);
        fs.cy = to_double(y, key);
        fs.radius = to_double(r, key);
        if (!(fs.radius > 0.0)) throw ParseError("config: '" + key + "': radius must be > 0");
    } else if (kind == "file") {
        fs.kind = Kind::File;
        if (!(is >> fs.path)) throw ParseError("config: '" + key + "': file needs a path");
    } else {
        throw ParseError("config: '" + key + "': unknown field spec '" + kind +
                         "' (constant | gaussian-bump | file)");
    }
    std::string extra;
    if (is >> extra) throw ParseError("config: '" + key + "': trailing tokens");
    return fs;
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "regime") {
        if (v == "transport") regime = Regime::Transport;
        else if (v == "diffusion") regime = Regime::Diffusion;
        else throw ParseError("config: regime must be transport|diffusion");
    } else if (key == "grid.nx") nx = to_int(v, key);
    else if (key == "grid.ny") ny = to_int(v, key);
    else if (key == "grid.x0") x0 = to_double(v, key);
    else if (key == "grid.y0") y0 = to_double(v, key);
    else if (key == "grid.width") width = to_double(v, key);
    else if (key == "grid.height") height = to_double(v, key);
    else if (key == "grid.delta") delta = to_double(v, key);
    else if (key == "quad.n_dirs") n_dirs = to_int(v, key);
    else if (key == "kernel") {
        if (v != "isotropic" && v != "henyey-greenstein")
            throw ParseError("config: kernel must be isotropic|henyey-greenstein");
        kernel = v;
    } else if (key == "kernel.g") kernel_g = to_double(v, key);
    else if (key == "coef.c0") c0 = to_double(v, key);
    else if (key == "coef.C0") C0 = to_double(v, key);
    else if (key == "coef.xi") xi = FieldSpec::parse(v, key);
    else if (key == "coef.sigma_a") sigma_a = FieldSpec::parse(v, key);
    else if (key == "coef.sigma_b") sigma_b = FieldSpec::parse(v, key);
    else if (key == "coef.sigma_s") sigma_s = FieldSpec::parse(v, key);
    else if (key == "coef.gamma") gamma = FieldSpec::parse(v, key);
    else if (key == "source") source = FieldSpec::parse(v, key);
    else if (key == "source.epsilon") source_epsilon = to_double(v, key);
    else if (key == "tol.source") tol_source = to_double(v, key);
    else if (key == "tol.picard") tol_picard = to_double(v, key);
    else if (key == "tol.cg") tol_cg = to_double(v, key);
    else if (key == "tol.recon") tol_recon = to_double(v, key);
    else if (key == "cap.source") cap_source = to_int(v, key);
    else if (key == "cap.picard") cap_picard = to_int(v, key);
    else if (key == "cap.cg") cap_cg = to_int(v, key);
    else if (key == "cap.recon") cap_recon = to_int(v, key);
    else if (key == "norms.p") norms_p = to_double(v, key);
    else if (key == "recon.alpha_min") recon_alpha_min = to_double(v, key);
    else if (key == "recon.enforce_a2") recon_enforce_a2 = to_bool(v, key);
    else if (key == "uq.etas") uq_etas = to_list(v, key);
    else if (key == "uq.perturbation") {
        if (v != "constant" && v != "bump")
            throw ParseError("config: uq.perturbation must be constant|bump");
        uq_perturbation = v;
    } else if (key == "lin.eps_list") lin_eps_list = to_list(v, key);
    else if (key == "noise.sigma") noise_sigma = to_double(v, key);
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_double(v, key));
    else if (key == "out.dir") out_dir = v;
    else throw ParseError("config: unknown key '" + key + "'");
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    bool have_regime = false;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("config: line " + std::to_string(lineno) +
                             ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError("config: line " + std::to_string(lineno) + ": empty key or value");
        try {
            cfg.apply_override(key, value);
        } catch (const ParseError& e) {
            throw ParseError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
        }
        if (key == "regime") have_regime = true;
    }
    if (!have_regime)
        throw ParseError("config: missing required keys: regime (transport|diffusion)");
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ParseError("config: cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse(buf.str());
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    os << "regime = " << regime_name(regime) << "\n";
    os << "grid.nx = " << nx << "\n";
    os << "grid.ny = " << ny << "\n";
    os << "grid.x0 = " << format_double(x0) << "\n";
    os << "grid.y0 = " << format_double(y0) << "\n";
    os << "grid.width = " << format_double(width) << "\n";
    os << "grid.height = " << format_double(height) << "\n";
    os << "grid.delta = " << format_double(delta) << "\n";
    os << "quad.n_dirs = " << n_dirs << "\n";
    os << "kernel = " << kernel << "\n";
    os << "kernel.g = " << format_double(kernel_g) << "\n";
    os << "coef.c0 = " << format_double(c0) << "\n";
    os << "coef.C0 = " << format_double(C0) << "\n";
    os << "coef.xi = " << xi.to_string() << "\n";
    os << "coef.sigma_a = " << sigma_a.to_string() << "\n";
    os << "coef.sigma_b = " << sigma_b.to_string() << "\n";
    os << "coef.sigma_s = " << sigma_s.to_string() << "\n";
    os << "coef.gamma = " << gamma.to_string() << "\n";
    os << "source = " << source.to_string() << "\n";
    os << "source.epsilon = " << format_double(source_epsilon) << "\n";
    os << "tol.source = " << format_double(tol_source) << "\n";
    os << "tol.picard = " << format_double(tol_picard) << "\n";
    os << "tol.cg = " << format_double(tol_cg) << "\n";
    os << "tol.recon = " << format_double(tol_recon) << "\n";
    os << "cap.source = " << cap_source << "\n";
    os << "cap.picard = " << cap_picard << "\n";
    os << "cap.cg = " << cap_cg << "\n";
    os << "cap.recon = " << cap_recon << "\n";
    os << "norms.p = " << format_double(norms_p) << "\n";
    os << "recon.alpha_min = " << format_double(recon_alpha_min) << "\n";
    os << "recon.enforce_a2 = " << (recon_enforce_a2 ? "true" : "false") << "\n";
    os << "uq.etas = " << list_to_string(uq_etas) << "\n";
    os << "uq.perturbation = " << uq_perturbation << "\n";
    os << "lin.eps_list = " << list_to_string(lin_eps_list) << "\n";
    os << "noise.sigma = " << format_double(noise_sigma) << "\n";
    os << "seed = " << seed << "\n";
    os << "out.dir = " << out_dir << "\n";
    return os.str();
}

void ExperimentConfig::validate() const {
    std::vector<std::string> bad;
    if (nx < 3 || ny < 3) bad.push_back("grid.nx/grid.ny must be >= 3");
    if (!(width > 0.0) || !(height > 0.0)) bad.push_back("grid.width/height must be > 0");
    if (delta < 0.0 || delta >= 0.5 * std::min(width, height))
        bad.push_back("grid.delta must lie in [0, min(side)/2)");
    if (n_dirs < 4 || n_dirs % 2) bad.push_back("quad.n_dirs must be even and >= 4");
    if (!(c0 > 0.0) || !(C0 >= c0)) bad.push_back("coef.c0/C0 must satisfy 0 < c0 <= C0");
    if (!(source_epsilon > 0.0)) bad.push_back("source.epsilon must be > 0");
    if (!(tol_source > 0.0 && tol_picard > 0.0 && tol_cg > 0.0 && tol_recon > 0.0))
        bad.push_back("tolerances must be > 0");
    if (cap_source < 1 || cap_picard < 1 || cap_cg < 1 || cap_recon < 1)
        bad.push_back("iteration caps must be >= 1");
    if (!(norms_p > 2.0)) bad.push_back("norms.p must be > 2");
    for (double e : lin_eps_list)
        if (!(e > 0.0)) bad.push_back("lin.eps_list entries must be > 0");
    for (double e : uq_etas)
        if (e < 0.0) bad.push_back("uq.etas entries must be >= 0");
    if (!bad.empty()) {
        std::string msg = "config: invalid values:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ParseError(msg);
    }
}

SpatialGrid ExperimentConfig::build_grid() const {
    return SpatialGrid(nx, ny, x0, y0, width, height, delta);
}

AngularQuadrature ExperimentConfig::build_quadrature() const {
    return AngularQuadrature::uniform(n_dirs);
}

ScatteringKernel ExperimentConfig::build_kernel(const AngularQuadrature& q) const {
    if (kernel == "isotropic") return ScatteringKernel::isotropic(q);
    return ScatteringKernel::henyey_greenstein(q, kernel_g);
}

namespace {

ScalarField build_field(const FieldSpec& fs, const SpatialGrid& g) {
    switch (fs.kind) {
        case FieldSpec::Kind::Constant: return ScalarField(g, fs.value);
        case FieldSpec::Kind::GaussianBump: {
            ScalarField f(g, fs.base);
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i) {
                    if (g.in_boundary_layer(i, j)) continue; // frozen to base
                    const double dx = g.cx(i) - fs.cx;
                    const double dy = g.cy(j) - fs.cy;
                    f.at(i, j) = fs.base + fs.amp * std::exp(-(dx * dx + dy * dy) /
                                                             (2.0 * fs.radius * fs.radius));
                }
            return f;
        }
        case FieldSpec::Kind::File: {
            const FieldFile ff = read_field(fs.path);
            if (ff.nx != g.nx() || ff.ny != g.ny() || ff.nv != 0)
                throw ParseError("config: field file " + fs.path +
                                 " does not match the grid");
            return ff.as_scalar();
        }
    }
    throw ParseError("config: unreachable field kind");
}

} // namespace

CoefficientSet ExperimentConfig::build_coefficients(const SpatialGrid& g) const {
    CoefficientSet c;
    c.xi = build_field(xi, g);
    c.sigma_a = build_field(sigma_a, g);
    c.sigma_b = build_field(sigma_b, g);
    c.sigma_s = build_field(sigma_s, g);
    c.gamma = build_field(gamma, g);
    c.c0 = c0;
    c.C0 = C0;
    return c;
}

BoundarySource ExperimentConfig::build_transport_source(const SpatialGrid& g,
                                                        const AngularQuadrature& q) const {
    if (source.kind == FieldSpec::Kind::File) {
        BoundarySource b = read_boundary_source(source.path, g, q);
        b *= source_epsilon;
        return b;
    }
    if (source.kind == FieldSpec::Kind::Constant)
        return BoundarySource::constant(g, q, source_epsilon * source.value);
    const FieldSpec fs = source;
    return BoundarySource::from_function(g, q, [fs, eps = source_epsilon](Vec2 x, Vec2) {
        const double dx = x.x - fs.cx, dy = x.y - fs.cy;
        return eps * (fs.base +
                      fs.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * fs.radius * fs.radius)));
    });
}

DirichletTrace ExperimentConfig::build_diffusion_trace(const SpatialGrid& g) const {
    if (source.kind == FieldSpec::Kind::File)
        throw ParseError("config: file sources are supported for the transport regime only");
    if (source.kind == FieldSpec::Kind::Constant)
        return DirichletTrace(g, source_epsilon * source.value);
    const FieldSpec fs = source;
    return DirichletTrace::from_function(g, [fs, eps = source_epsilon](Vec2 x) {
        const double dx = x.x - fs.cx, dy = x.y - fs.cy;
        return eps * (fs.base +
                      fs.amp * std::exp(-(dx * dx + dy * dy) / (2.0 * fs.radius * fs.radius)));
    });
}

TransportOptions ExperimentConfig::transport_options() const {
    TransportOptions t;
    t.tol_source = tol_source;
    t.max_source_iter = cap_source;
    t.tol_picard = tol_picard;
    t.max_picard_iter = cap_picard;
    return t;
}

DiffusionOptions ExperimentConfig::diffusion_options() const {
    DiffusionOptions d;
    d.tol_cg = tol_cg;
    d.max_cg_iter = cap_cg;
    d.tol_picard = tol_picard;
    d.max_picard_iter = cap_picard;
    return d;
}

ReconstructionOptions ExperimentConfig::recon_options() const {
    ReconstructionOptions r;
    r.tol = tol_recon;
    r.max_iter = cap_recon;
    r.enforce_a2 = recon_enforce_a2;
    r.transport = transport_options();
    r.diffusion = diffusion_options();
    return r;
}

} // namespace qpat
