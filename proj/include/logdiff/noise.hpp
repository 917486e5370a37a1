#ifndef LOGDIFF_NOISE_HPP
#define LOGDIFF_NOISE_HPP

#include "logdiff/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace logdiff {

/// Mode amplitudes gamma_k. Either the power law gamma0 * k^(-decay) or an
/// explicit list (modes past the end of the list have amplitude 0).
struct GammaRule
{
    double gamma0 = 1.0;
    double decay = 8.0;
    std::optional<std::vector<double>> explicit_values;

    static GammaRule power_law(double gamma0, double decay);
    static GammaRule explicit_list(std::vector<double> values);

    double operator()(std::size_t k) const;
    bool is_power_law() const { return !explicit_values.has_value(); }
    /// Same rule with every gamma_k multiplied by c.
    GammaRule scaled(double c) const;
};

struct NoiseSpec
{
    std::size_t k_max = 8;
    GammaRule gamma;
    std::uint64_t seed = 42;
    double t_final = 0.5;
    std::size_t n_steps = 500;

    void validate() const;
    double dt() const { return t_final / static_cast<double>(n_steps); }
    double time(std::size_t n) const { return t_final * static_cast<double>(n) / static_cast<double>(n_steps); }
};

/// Partial sums of the two trace conditions on gamma_k together with the
/// exponent margins of the power law (a margin > 0 means the infinite series
/// converges under lambda_k ~ k^2).
struct H1Report
{
    double sum_gamma2_lambda2 = 0.0;
    double sum_gamma_lambda3 = 0.0;
    std::optional<double> margin_gamma2_lambda2;  // 2r - 5
    std::optional<double> margin_gamma_lambda3;   // r - 7
    bool deterministic = false;
    bool pass = false;
};

H1Report validate_h1(const NoiseSpec& spec, const EigenSystem& eigen);

/// One realization of sqrt(Q) W on the time-space grid.
struct NoisePath
{
    NoiseSpec spec;
    GridSpec grid;
    std::vector<Field> values;                 // values[n] = sqrt(Q) W(t_n)
    std::vector<std::vector<double>> brownian; // brownian[k-1][n] = beta_k(t_n)

    std::size_t n_steps() const { return values.size() - 1; }
    double time(std::size_t n) const { return spec.time(n); }
};

/// Seed of the independent substream driving mode k.
std::uint64_t mode_seed(std::uint64_t master, std::size_t k);

/// Refuses specs failing validate_h1 unless override_h1 is set.
NoisePath synthesize(const NoiseSpec& spec, const GridSpec& grid, const EigenSystem& eigen,
                     bool override_h1 = false);

/// Path with every gamma_k = 0.
NoisePath zero_noise(const NoiseSpec& spec, const GridSpec& grid);

/// The same Brownian path sampled on every `stride`-th time point.
NoisePath restrict_time(const NoisePath& path, std::size_t stride);

/// max_n |sqrt(Q)W(t_n)|_inf
double sup_norm_estimate(const NoisePath& path);

/// Greedy left-to-right time partition whose cells have L-infinity
/// oscillation below alpha. Returned indices start at 0 and end at n_steps.
std::vector<std::size_t> modulus_of_continuity(const NoisePath& path, double alpha);

/// max over nodes of (max - min) of the path on time indices [first, last].
double cell_oscillation(const NoisePath& path, std::size_t first, std::size_t last);

class TimeGridTooCoarse : public std::runtime_error
{
public:
    TimeGridTooCoarse(std::size_t step, double oscillation, double alpha);
    std::size_t step() const { return step_; }
    double oscillation() const { return oscillation_; }

private:
    std::size_t step_;
    double oscillation_;
};

/// CSV with header step,time,node,value (node is the 1-based interior index).
void write_noise_csv(std::ostream& out, const NoisePath& path);
/// Inverse of write_noise_csv. Brownian values are recovered by projecting
/// onto the eigenvectors (zero for modes with gamma_k = 0).
NoisePath read_noise_csv(std::istream& in, const NoiseSpec& spec, const GridSpec& grid,
                         const EigenSystem& eigen);

} // namespace logdiff

#endif // LOGDIFF_NOISE_HPP
