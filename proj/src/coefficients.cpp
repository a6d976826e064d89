#include "qpat/coefficients.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qpat {

namespace {

struct NamedField {
    const char* name;
    const ScalarField* f;
};

void check_bounds(const NamedField& nf, double c0, double C0,
                  std::vector<std::string>& violations) {
    for (double v : nf.f->data()) {
        if (!std::isfinite(v)) {
            violations.push_back(std::string(nf.name) + ": non-finite value");
            return;
        }
        if (v < c0 || v > C0) {
            std::ostringstream os;
            os << nf.name << ": value " << v << " outside declared bounds [" << c0 << ", " << C0
               << "]";
            violations.push_back(os.str());
            return;
        }
    }
}

void check_vicinity_constant(const char* name, const ScalarField& f, const SpatialGrid& g,
                             std::vector<std::string>& violations) {
    if (g.boundary_layer_delta() <= 0.0) return;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            if (g.in_boundary_layer(i, j)) {
                lo = std::min(lo, f.at(i, j));
                hi = std::max(hi, f.at(i, j));
            }
    if (hi - lo > 1e-12 * std::max(1.0, std::abs(hi)))
        violations.push_back(std::string(name) +
                             ": not constant on the delta-vicinity of the boundary");
}

} // namespace

CoefficientCertificate validate_coefficients(const CoefficientSet& c, const SpatialGrid& g,
                                             Regime regime, bool must_pass) {
    CoefficientCertificate cert;
    cert.c0 = c.c0;
    cert.C0 = c.C0;
    if (!(c.c0 > 0.0) || !(c.C0 >= c.c0))
        cert.violations.push_back("declared bounds must satisfy 0 < c0 <= C0");

    std::vector<NamedField> fields;
    if (regime == Regime::Transport)
        fields = {{"xi", &c.xi}, {"sigma_a", &c.sigma_a}, {"sigma_b", &c.sigma_b},
                  {"sigma_s", &c.sigma_s}};
    else
        fields = {{"xi", &c.xi}, {"sigma_a", &c.sigma_a}, {"sigma_b", &c.sigma_b},
                  {"gamma", &c.gamma}};

    cert.field_min = std::numeric_limits<double>::infinity();
    cert.field_max = -cert.field_min;
    for (const auto& nf : fields) {
        if (nf.f->size() != g.n_cells()) {
            cert.violations.push_back(std::string(nf.name) + ": wrong shape for grid");
            continue;
        }
        check_bounds(nf, c.c0, c.C0, cert.violations);
        for (double v : nf.f->data()) {
            cert.field_min = std::min(cert.field_min, v);
            cert.field_max = std::max(cert.field_max, v);
        }
    }

    if (regime == Regime::Transport && c.sigma_a.size() == g.n_cells() &&
        c.sigma_s.size() == g.n_cells()) {
        check_vicinity_constant("sigma_a", c.sigma_a, g, cert.violations);
        check_vicinity_constant("sigma_s", c.sigma_s, g, cert.violations);
        double nu = 1.0, sbar = 0.0;
        for (std::size_t i = 0; i < c.sigma_a.size(); ++i) {
            const double sa = c.sigma_a[i], ss = c.sigma_s[i];
            const double tot = sa + ss;
            if (tot > 0.0) nu = std::min(nu, sa / tot);
            sbar = std::max(sbar, tot);
        }
        cert.nu = nu;
        cert.sigma_bar = sbar;
        if (!(nu > 0.0 && nu < 1.0))
            cert.violations.push_back("derived nu = inf sigma_a/(sigma_a+sigma_s) not in (0, 1)");
        if (nu > 0.0 && c.c0 > 0.0) cert.C2 = 1.0 / (nu * c.c0);
    }

    cert.ok = cert.violations.empty();
    if (!cert.ok && must_pass) {
        std::string msg = "coefficient validation failed:";
        for (const auto& v : cert.violations) msg += "\n  " + v;
        throw PreconditionError(msg);
    }
    return cert;
}

void require_solvable(const CoefficientSet& c, const SpatialGrid& g, Regime regime) {
    auto check_shape = [&](const char* name, const ScalarField& f) {
        if (f.size() != g.n_cells())
            throw PreconditionError(std::string("coefficients: ") + name +
                                    " has wrong shape for grid");
    };
    check_shape("sigma_a", c.sigma_a);
    check_shape("sigma_b", c.sigma_b);
    check_shape("xi", c.xi);
    for (double v : c.sigma_a.data())
        if (!(v > 0.0) || !std::isfinite(v))
            throw PreconditionError("coefficients: sigma_a must be strictly positive");
    for (double v : c.sigma_b.data())
        if (!(v >= 0.0) || !std::isfinite(v))
            throw PreconditionError("coefficients: sigma_b must be nonnegative");
    if (regime == Regime::Transport) {
        check_shape("sigma_s", c.sigma_s);
        for (double v : c.sigma_s.data())
            if (!(v >= 0.0) || !std::isfinite(v))
                throw PreconditionError("coefficients: sigma_s must be nonnegative");
    } else {
        check_shape("gamma", c.gamma);
        for (double v : c.gamma.data())
            if (!(v > 0.0) || !std::isfinite(v))
                throw PreconditionError("coefficients: gamma must be strictly positive");
    }
}

} // namespace qpat
