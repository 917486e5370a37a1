#ifndef LOGDIFF_GRID_HPP
#define LOGDIFF_GRID_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

/// Uniform discretization of the interval (0, L) with homogeneous Dirichlet
/// conditions. Unknowns live at the interior nodes xi_j = j*h, j = 1..n.
class GridSpec
{
public:
    GridSpec(double length, std::size_t n_interior);

    double length() const { return length_; }
    std::size_t n_interior() const { return n_; }
    double h() const { return h_; }

    /// Coordinate of interior node j (0-based storage index, so j = 0 is xi_1).
    double node(std::size_t j) const { return static_cast<double>(j + 1) * h_; }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    double length_;
    std::size_t n_;
    double h_;
};

class GridMismatch : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Nodal values on a grid. Values are immutable once constructed and always
/// finite; boundary values are implicitly zero.
class Field
{
public:
    explicit Field(const GridSpec& grid);
    Field(const GridSpec& grid, std::vector<double> values);

    template <class F>
    static Field sample(const GridSpec& grid, F&& f)
    {
        std::vector<double> v(grid.n_interior());
        for (std::size_t j = 0; j < v.size(); ++j)
            v[j] = f(grid.node(j));
        return Field(grid, std::move(v));
    }

    static Field constant(const GridSpec& grid, double c);

    const GridSpec& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t j) const { return values_[j]; }

    /// Copy of the nodal values for callers that need to build a new field.
    std::vector<double> to_vector() const { return values_; }

    friend bool operator==(const Field&, const Field&) = default;

private:
    GridSpec grid_;
    std::vector<double> values_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double c, const Field& a);

void require_same_grid(const Field& a, const Field& b);

struct Mode
{
    std::size_t k;      // 1-based mode index
    double eigenvalue;  // of -Delta_h
    Field vector;       // L2-normalized under the weight h
};

struct EigenSystem
{
    GridSpec grid;
    std::vector<Mode> modes;

    std::size_t size() const { return modes.size(); }
    const Mode& mode(std::size_t k) const { return modes.at(k - 1); }
};

/// Discrete Laplacian with the 3-point stencil and zero boundary values.
Field laplacian_apply(const Field& f);

/// Solves -Delta_h u = f.
Field neg_laplacian_inverse(const Field& f);

/// (I - mu Delta_h)^{-1} f. Throws std::invalid_argument for mu <= 0.
Field laplacian_resolvent(double mu, const Field& f);

/// Closed-form sine eigenpairs of -Delta_h, modes 1..k_max.
EigenSystem eigensystem(const GridSpec& grid, std::size_t k_max);

/// lambda_k = (4/h^2) sin^2(k pi h / (2L))
double discrete_eigenvalue(const GridSpec& grid, std::size_t k);

double inner_l2(const Field& f, const Field& g);
double norm_l2(const Field& f);
double norm_lp(const Field& f, double p);
double norm_linf(const Field& f);

double inner_hminus1(const Field& f, const Field& g);
double norm_hminus1(const Field& f);

/// Thomas algorithm for a tridiagonal system. `lower[j]` multiplies x[j-1]
/// in row j (lower[0] unused), `upper[j]` multiplies x[j+1] (upper[n-1]
/// unused). Intended for diagonally dominant systems; no pivoting.
std::vector<double> solve_tridiagonal(std::span<const double> lower,
                                      std::span<const double> diag,
                                      std::span<const double> upper,
                                      std::span<const double> rhs);

} // namespace logdiff

#endif // LOGDIFF_GRID_HPP
