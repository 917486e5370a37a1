#include "logdiff/grid.hpp"

#include <doctest.h>
#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

using namespace logdiff;

namespace {

Field random_field(const GridSpec& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return Field::sample(g, [&](double) { return u(rng); });
}

// Dense stencil matrix of -Delta_h.
Eigen::MatrixXd dense_neg_laplacian(const GridSpec& g)
{
    const auto n = static_cast<Eigen::Index>(g.n_interior());
    const double s = 1.0 / (g.h() * g.h());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, i) = 2 * s;
        if (i > 0)
            a(i, i - 1) = -s;
        if (i + 1 < n)
            a(i, i + 1) = -s;
    }
    return a;
}

} // namespace

TEST_CASE("grid spec validation")
{
    CHECK_THROWS_AS(GridSpec(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(1.0, 1), std::invalid_argument);
    const GridSpec g(2.0, 3);
    CHECK(g.h() == doctest::Approx(0.5));
    CHECK(g.node(0) == doctest::Approx(0.5));
    CHECK(g.node(2) == doctest::Approx(1.5));
}

TEST_CASE("field rejects wrong length and non-finite values")
{
    const GridSpec g(1.0, 4);
    CHECK_THROWS_AS(Field(g, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Field(g, {1, 2, 3, NAN}), std::invalid_argument);
    CHECK_THROWS_AS(Field(g, {1, 2, INFINITY, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Field(g) + Field(GridSpec(1.0, 5)), GridMismatch);
    CHECK_THROWS_AS(inner_l2(Field(g), Field(GridSpec(2.0, 4))), GridMismatch);
}

TEST_CASE("laplacian: zero, eigenvectors, quadratic")
{
    const GridSpec g(1.0, 15);
    CHECK(laplacian_apply(Field(g)) == Field(g));

    const auto es = eigensystem(g, 15);
    for (const auto& m : es.modes) {
        const Field lap = laplacian_apply(m.vector);
        for (std::size_t j = 0; j < g.n_interior(); ++j)
            CHECK(lap[j] == doctest::Approx(-m.eigenvalue * m.vector[j]).epsilon(1e-12).scale(m.eigenvalue));
    }

    const GridSpec g3(1.0, 3);
    const Field q = Field::sample(g3, [](double x) { return x * (1.0 - x); });
    const Field lap = laplacian_apply(q);
    for (double v : lap.values())
        CHECK(v == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("inverse laplacian: zero, eigen relation, Green's function")
{
    const GridSpec g(1.0, 31);
    CHECK(neg_laplacian_inverse(Field(g)) == Field(g));

    const auto es = eigensystem(g, 5);
    for (const auto& m : es.modes) {
        const Field u = neg_laplacian_inverse(m.vector);
        for (std::size_t j = 0; j < g.n_interior(); ++j)
            CHECK(u[j] == doctest::Approx(m.vector[j] / m.eigenvalue).epsilon(1e-12).scale(1.0));
    }

    // Quadrature of the continuum Green's function G(x,y) = x(1-y) for x <= y.
    // The trapezoid rule is exact on each linear piece, so the sum over the
    // nodes is exact for f = 1.
    const Field one = Field::constant(g, 1.0);
    const Field u = neg_laplacian_inverse(one);
    for (std::size_t i = 0; i < g.n_interior(); ++i) {
        const double x = g.node(i);
        double green = 0.0;
        for (std::size_t j = 0; j < g.n_interior(); ++j) {
            const double y = g.node(j);
            green += g.h() * (x <= y ? x * (1 - y) : y * (1 - x));
        }
        CHECK(u[i] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-13));
        CHECK(u[i] == doctest::Approx(green).epsilon(1e-13));
    }
}

TEST_CASE("resolvent: zero, eigen relation, H^-1 contraction, mu guard")
{
    const GridSpec g(1.0, 31);
    CHECK(laplacian_resolvent(0.3, Field(g)) == Field(g));
    CHECK_THROWS_AS(laplacian_resolvent(0.0, Field(g)), std::invalid_argument);
    CHECK_THROWS_AS(laplacian_resolvent(-1.0, Field(g)), std::invalid_argument);

    const double mu = 1e-2;
    const auto es = eigensystem(g, 31);
    for (const auto& m : es.modes) {
        const Field z = laplacian_resolvent(mu, m.vector);
        for (std::size_t j = 0; j < g.n_interior(); ++j)
            CHECK(z[j] == doctest::Approx(m.vector[j] / (1 + mu * m.eigenvalue)).epsilon(1e-12).scale(1.0));
    }

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Field f = random_field(g, rng);
        CHECK(norm_hminus1(laplacian_resolvent(mu, f)) <= norm_hminus1(f) * (1 + 1e-14));
    }
}

TEST_CASE("eigenpairs: normalization, continuum limit, dense oracle")
{
    for (std::size_t n : {7u, 15u, 63u}) {
        const GridSpec g(1.0, n);
        const auto es = eigensystem(g, n);
        for (std::size_t a = 1; a <= n; ++a)
            for (std::size_t b = 1; b <= n; ++b)
                CHECK(inner_l2(es.mode(a).vector, es.mode(b).vector) ==
                      doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }

    double prev_err = 1.0;
    for (std::size_t n : {15u, 63u, 255u, 1023u}) {
        const double err = std::abs(discrete_eigenvalue(GridSpec(std::numbers::pi, n), 1) - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 1e-6);

    const GridSpec g(1.0, 15);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense_neg_laplacian(g));
    const auto es = eigensystem(g, 15);
    for (std::size_t k = 1; k <= 15; ++k) {
        const double dense = solver.eigenvalues()(static_cast<Eigen::Index>(k - 1));
        CHECK(std::abs(es.mode(k).eigenvalue - dense) <= 1e-10 * dense);
    }
    CHECK(std::abs(es.mode(3).eigenvalue - solver.eigenvalues()(2)) <= 1e-10 * solver.eigenvalues()(2));

    CHECK_THROWS(eigensystem(g, 16));
    CHECK_THROWS(eigensystem(g, 0));
}

TEST_CASE("norms and inner products")
{
    const GridSpec g(2.0, 31);
    const auto es = eigensystem(g, 4);
    CHECK(inner_l2(es.mode(1).vector, es.mode(1).vector) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(inner_l2(es.mode(1).vector, es.mode(2).vector)) < 1e-13);

    // Dirichlet quadrature: the boundary nodes carry zero, so a constant
    // field c on the n interior nodes integrates to c*(L - h).
    const Field c = Field::constant(g, 3.0);
    for (double p : {1.0, 2.0, 4.0}) {
        const double measure = g.h() * static_cast<double>(g.n_interior());
        CHECK(norm_lp(c, p) == doctest::Approx(3.0 * std::pow(measure, 1 / p)).epsilon(1e-13));
    }
    CHECK(norm_linf(c) == 3.0);
    CHECK(norm_lp(Field(g), 2.0) == 0.0);

    for (const auto& m : es.modes)
        CHECK(norm_hminus1(m.vector) == doctest::Approx(1 / std::sqrt(m.eigenvalue)).epsilon(1e-12));
    CHECK(norm_hminus1(Field(g)) == 0.0);

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const Field f = random_field(g, rng), h = random_field(g, rng);
        CHECK(std::abs(inner_hminus1(f, h) - inner_hminus1(h, f)) <= 1e-12 * (1 + std::abs(inner_hminus1(f, h))));
        CHECK(norm_hminus1(f) * norm_hminus1(f) <= norm_l2(f) * norm_l2(f) / es.mode(1).eigenvalue * (1 + 1e-12));
    }
}

TEST_CASE("tridiagonal solve matches dense solve")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::size_t n = 20;
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = i ? u(rng) : 0.0;
        up[i] = i + 1 < n ? u(rng) : 0.0;
        di[i] = 3.0 + u(rng);
        rhs[i] = u(rng);
        const auto ii = static_cast<Eigen::Index>(i);
        a(ii, ii) = di[i];
        if (i)
            a(ii, ii - 1) = lo[i];
        if (i + 1 < n)
            a(ii, ii + 1) = up[i];
        b(ii) = rhs[i];
    }
    const Eigen::VectorXd ref = a.partialPivLu().solve(b);
    const auto x = solve_tridiagonal(lo, di, up, rhs);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(x[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-12));
}

TEST_CASE("second-order convergence of the inverse laplacian")
{
    // -u'' = pi^2 sin(pi x) has u = sin(pi x).
    std::vector<double> hs, errs;
    for (std::size_t n : {15u, 31u, 63u, 127u}) {
        const GridSpec g(1.0, n);
        const double pi = std::numbers::pi;
        const Field f = Field::sample(g, [&](double x) { return pi * pi * std::sin(pi * x); });
        const Field exact = Field::sample(g, [&](double x) { return std::sin(pi * x); });
        hs.push_back(g.h());
        errs.push_back(norm_linf(neg_laplacian_inverse(f) - exact));
    }
    for (std::size_t i = 1; i < hs.size(); ++i) {
        const double order = std::log(errs[i - 1] / errs[i]) / std::log(hs[i - 1] / hs[i]);
        CHECK(order > 1.9);
        CHECK(order < 2.1);
    }
}
