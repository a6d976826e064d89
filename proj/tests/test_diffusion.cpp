#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "qpat/diffusion.hpp"
#include "qpat/linearization.hpp"

using namespace qpat;
using test::unit_grid;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Dense Cholesky on the assembled operator: the independent linear-algebra
// oracle for the CG path (small grids only).
std::vector<double> dense_solve(const EllipticOperator& A, const std::vector<double>& b) {
    const std::size_t n = b.size();
    std::vector<double> M(n * n, 0.0);
    std::vector<double> e(n, 0.0), col(n);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        A.apply(e, col);
        e[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) M[i * n + j] = col[i];
    }
    // Cholesky M = L L^T.
    for (std::size_t k = 0; k < n; ++k) {
        double d = M[k * n + k];
        for (std::size_t m = 0; m < k; ++m) d -= M[k * n + m] * M[k * n + m];
        REQUIRE(d > 0.0); // SPD
        M[k * n + k] = std::sqrt(d);
        for (std::size_t i = k + 1; i < n; ++i) {
            double s = M[i * n + k];
            for (std::size_t m = 0; m < k; ++m) s -= M[i * n + m] * M[k * n + m];
            M[i * n + k] = s / M[k * n + k];
        }
    }
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t m = 0; m < i; ++m) s -= M[i * n + m] * y[m];
        y[i] = s / M[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t m = ii + 1; m < n; ++m) s -= M[m * n + ii] * x[m];
        x[ii] = s / M[ii * n + ii];
    }
    return x;
}

} // namespace

TEST_CASE("zero data gives the zero solution") {
    const SpatialGrid g = unit_grid(12);
    const CoefficientSet c = test::homogeneous(g);
    auto [u, rep] = solve_linear_diffusion(c, g, DirichletTrace(g, 0.0), ScalarField());
    CHECK(u.max_abs() == 0.0);
    CHECK(rep.cg_iterations == 0);
}

TEST_CASE("1-D cosh profile reproduced at second order") {
    auto exact = [](double x) { return std::cosh(x - 0.5) / std::cosh(0.5); };
    double prev = 0.0;
    for (int n : {16, 32}) {
        const SpatialGrid g = unit_grid(n);
        const CoefficientSet c = CoefficientSet::constants(g, 1, 1, 1, 1, 1, 0, 0);
        const DirichletTrace tr =
            DirichletTrace::from_function(g, [&](Vec2 p) { return exact(p.x); });
        auto [u, rep] = solve_linear_diffusion(c, g, tr, ScalarField());
        double err = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                err = std::max(err, std::abs(u.at(i, j) - exact(g.cx(i))));
        if (prev > 0.0) CHECK(prev / err >= 3.4); // ~3.9 observed (order ~1.95)
        prev = err;
    }
    CHECK(prev <= 1.6e-4); // observed 1.18e-4 at n = 32
}

TEST_CASE("manufactured solution converges at order two") {
    std::vector<double> errs;
    for (int n : {16, 32, 64}) {
        const SpatialGrid g = unit_grid(n);
        const CoefficientSet c = CoefficientSet::constants(g, 1, 0.7, 1, 1, 1.3, 0, 0);
        const ScalarField S = ScalarField::from_function(g, [&](double x, double y) {
            return (2.0 * 1.3 * kPi * kPi + 0.7) * std::sin(kPi * x) * std::sin(kPi * y);
        });
        auto [u, rep] = solve_linear_diffusion(c, g, DirichletTrace(g, 0.0), S);
        double err = 0.0;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                err = std::max(err,
                               std::abs(u.at(i, j) - std::sin(kPi * g.cx(i)) *
                                                         std::sin(kPi * g.cy(j))));
        errs.push_back(err);
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        const double order = std::log2(errs[i] / errs[i + 1]);
        CHECK(order >= 1.8);
        CHECK(order <= 2.2);
    }
}

TEST_CASE("discrete maximum principle") {
    const SpatialGrid g = unit_grid(20);
    CoefficientSet c = test::homogeneous(g);
    c.gamma = test::bump_field(g, 1.0, 0.8, 0.5, 0.5, 0.25);
    const DirichletTrace tr = DirichletTrace::from_function(
        g, [&](Vec2 p) { return 0.3 + 0.7 * test::smooth_boundary_profile(g, p); });
    auto [u, rep] = solve_linear_diffusion(c, g, tr, ScalarField());
    CHECK(u.min() >= 0.0);
    CHECK(u.max() <= tr.max_abs() * (1.0 + 1e-12));
}

TEST_CASE("CG against a dense Cholesky oracle, with monotone energy error") {
    const SpatialGrid g = unit_grid(12);
    CoefficientSet c = test::homogeneous(g);
    c.gamma = test::bump_field(g, 1.0, 1.2, 0.4, 0.6, 0.2);
    c.sigma_a = test::bump_field(g, 0.6, 0.8, 0.6, 0.4, 0.25);
    const EllipticOperator A(g, c.gamma, c.sigma_a);
    const DirichletTrace tr(g, 1.0);
    ScalarField S(g, 0.5);
    const std::vector<double> b = A.rhs(S, tr);
    const std::vector<double> x_star = dense_solve(A, b);

    std::vector<double> energy_err;
    DiffusionOptions opt;
    opt.cg_observer = [&](int, const std::vector<double>& x) {
        std::vector<double> d(x.size()), ad;
        for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - x_star[i];
        A.apply(d, ad);
        double e = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) e += d[i] * ad[i];
        energy_err.push_back(std::sqrt(std::max(e, 0.0)));
    };
    auto [u, rep] = solve_linear_diffusion(c, g, tr, S, opt);
    CHECK(rep.cg_residual <= opt.tol_cg);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        worst = std::max(worst, std::abs(u[i] - x_star[i]));
    CHECK(worst <= 1e-9);
    REQUIRE(energy_err.size() >= 3);
    for (std::size_t i = 0; i + 1 < energy_err.size(); ++i)
        CHECK(energy_err[i + 1] <= energy_err[i] * (1.0 + 1e-12));
}

TEST_CASE("coefficient violations are rejected") {
    const SpatialGrid g = unit_grid(8);
    CoefficientSet c = test::homogeneous(g);
    c.gamma.at(3, 3) = -0.2;
    CHECK_THROWS_AS(solve_linear_diffusion(c, g, DirichletTrace(g, 1.0), ScalarField()),
                    PreconditionError);
}

TEST_CASE("semilinear diffusion") {
    const SpatialGrid g = unit_grid(20);
    CoefficientSet c = test::homogeneous(g);
    c.c0 = 0.5;
    c.C0 = 1.5;
    c.sigma_b = test::bump_field(g, 0.9, 0.4, 0.55, 0.45, 0.2);

    SUBCASE("sigma_b = 0 equals the linear solve bitwise") {
        CoefficientSet c0 = c;
        c0.sigma_b = ScalarField(g, 0.0);
        const DirichletTrace tr(g, 1e-2);
        auto [us, rs] = solve_semilinear_diffusion(c0, g, tr);
        auto [ul, rl] = solve_linear_diffusion(c0, g, tr, ScalarField());
        for (std::size_t i = 0; i < us.size(); ++i) CHECK(us[i] == ul[i]);
    }

    SUBCASE("the quadratic term only absorbs: 0 < u <= u0") {
        const DirichletTrace tr(g, 2e-2);
        auto [u, rep] = solve_semilinear_diffusion(c, g, tr);
        auto [u0, rep0] = solve_linear_diffusion(c, g, tr, ScalarField());
        CHECK(u.min() > 0.0);
        for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] <= u0[i] * (1.0 + 1e-12));
        CHECK(rep.ball_check_ok);
    }

    SUBCASE("Richardson: ||u_eps - eps u1||_inf = O(eps^2)") {
        const DirichletTrace unit(g, 1.0);
        const ScalarField u1 = solve_u1_diffusion(c, g, unit);
        double rem[2];
        int idx = 0;
        for (double eps : {1e-2, 5e-3}) {
            auto [u, rep] = solve_semilinear_diffusion(c, g, eps * unit);
            double m = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                m = std::max(m, std::abs(u[i] - eps * u1[i]));
            rem[idx++] = m;
        }
        const double ratio = rem[0] / rem[1];
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
    }
}
