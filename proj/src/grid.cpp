#include "logdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace logdiff {

GridSpec::GridSpec(double length, std::size_t n_interior)
    : length_(length), n_(n_interior), h_(0.0)
{
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("grid length must be positive and finite");
    if (n_interior < 2)
        throw std::invalid_argument("grid needs at least 2 interior nodes");
    h_ = length_ / static_cast<double>(n_ + 1);
}

Field::Field(const GridSpec& grid)
    : grid_(grid), values_(grid.n_interior(), 0.0)
{
}

Field::Field(const GridSpec& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.n_interior())
        throw GridMismatch("field length " + std::to_string(values_.size()) +
                           " does not match grid with " +
                           std::to_string(grid_.n_interior()) + " interior nodes");
    for (std::size_t j = 0; j < values_.size(); ++j)
        if (!std::isfinite(values_[j]))
            throw std::invalid_argument("non-finite field value at node " + std::to_string(j));
}

Field Field::constant(const GridSpec& grid, double c)
{
    return Field(grid, std::vector<double>(grid.n_interior(), c));
}

void require_same_grid(const Field& a, const Field& b)
{
    if (!(a.grid() == b.grid()))
        throw GridMismatch("fields live on different grids");
}

Field operator+(const Field& a, const Field& b)
{
    require_same_grid(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = a[j] + b[j];
    return Field(a.grid(), std::move(v));
}

Field operator-(const Field& a, const Field& b)
{
    require_same_grid(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = a[j] - b[j];
    return Field(a.grid(), std::move(v));
}

Field operator*(double c, const Field& a)
{
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = c * a[j];
    return Field(a.grid(), std::move(v));
}

Field laplacian_apply(const Field& f)
{
    const std::size_t n = f.size();
    const double ih2 = 1.0 / (f.grid().h() * f.grid().h());
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? f[j - 1] : 0.0;
        const double right = j + 1 < n ? f[j + 1] : 0.0;
        out[j] = (left - 2.0 * f[j] + right) * ih2;
    }
    return Field(f.grid(), std::move(out));
}

std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs)
{
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n)
        throw std::invalid_argument("tridiagonal band sizes differ");
    if (n == 0)
        return {};

    std::vector<double> c(n), x(n);
    double beta = diag[0];
    if (beta == 0.0)
        throw std::runtime_error("zero pivot in tridiagonal solve");
    x[0] = rhs[0] / beta;
    for (std::size_t j = 1; j < n; ++j) {
        c[j] = upper[j - 1] / beta;
        beta = diag[j] - lower[j] * c[j];
        if (beta == 0.0)
            throw std::runtime_error("zero pivot in tridiagonal solve");
        x[j] = (rhs[j] - lower[j] * x[j - 1]) / beta;
    }
    for (std::size_t j = n - 1; j-- > 0;)
        x[j] -= c[j + 1] * x[j + 1];
    return x;
}

namespace {

// (a I - b Delta_h) u = f with a >= 0, b > 0.
Field shifted_laplacian_solve(double a, double b, const Field& f)
{
    const std::size_t n = f.size();
    const double s = b / (f.grid().h() * f.grid().h());
    std::vector<double> lower(n, -s), diag(n, a + 2.0 * s), upper(n, -s);
    return Field(f.grid(), solve_tridiagonal(lower, diag, upper, f.values()));
}

} // namespace

Field neg_laplacian_inverse(const Field& f)
{
    return shifted_laplacian_solve(0.0, 1.0, f);
}

Field laplacian_resolvent(double mu, const Field& f)
{
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw std::invalid_argument("resolvent parameter mu must be positive");
    return shifted_laplacian_solve(1.0, mu, f);
}

double discrete_eigenvalue(const GridSpec& grid, std::size_t k)
{
    const double h = grid.h();
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi * h / (2.0 * grid.length()));
    return 4.0 / (h * h) * s * s;
}

EigenSystem eigensystem(const GridSpec& grid, std::size_t k_max)
{
    if (k_max < 1 || k_max > grid.n_interior())
        throw std::invalid_argument("k_max must lie in [1, n_interior]");

    EigenSystem sys{grid, {}};
    sys.modes.reserve(k_max);
    const double L = grid.length();
    for (std::size_t k = 1; k <= k_max; ++k) {
        std::vector<double> e(grid.n_interior());
        double sq = 0.0;
        for (std::size_t j = 0; j < e.size(); ++j) {
            e[j] = std::sqrt(2.0 / L) *
                   std::sin(static_cast<double>(k) * std::numbers::pi * grid.node(j) / L);
            sq += e[j] * e[j];
        }
        // The continuum normalization is exact for the discrete sum up to
        // rounding; renormalize so |e_k|_2 = 1 holds to machine precision.
        const double scale = 1.0 / std::sqrt(grid.h() * sq);
        for (double& v : e)
            v *= scale;
        sys.modes.push_back(Mode{k, discrete_eigenvalue(grid, k), Field(grid, std::move(e))});
    }
    return sys;
}

double inner_l2(const Field& f, const Field& g)
{
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        s += f[j] * g[j];
    return f.grid().h() * s;
}

double norm_l2(const Field& f)
{
    return std::sqrt(inner_l2(f, f));
}

double norm_lp(const Field& f, double p)
{
    if (!(p >= 1.0))
        throw std::invalid_argument("norm_lp requires p >= 1");
    if (std::isinf(p))
        return norm_linf(f);
    double s = 0.0;
    for (double v : f.values())
        s += std::pow(std::abs(v), p);
    return std::pow(f.grid().h() * s, 1.0 / p);
}

double norm_linf(const Field& f)
{
    double m = 0.0;
    for (double v : f.values())
        m = std::max(m, std::abs(v));
    return m;
}

double inner_hminus1(const Field& f, const Field& g)
{
    require_same_grid(f, g);
    return inner_l2(neg_laplacian_inverse(f), g);
}

double norm_hminus1(const Field& f)
{
    return std::sqrt(std::max(0.0, inner_hminus1(f, f)));
}

} // namespace logdiff
