#ifndef LOGDIFF_CONFIG_HPP
#define LOGDIFF_CONFIG_HPP

#include "logdiff/grid.hpp"
#include "logdiff/noise.hpp"
#include "logdiff/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Experiment description read from a sectioned key = value file:
///
///   [grid]     length, n_interior
///   [noise]    k_max, gamma0, decay, gammas, seed, n_paths, alpha, override_h1
///   [solver]   epsilon, epsilons, dt, t_final, scheme, newton_tol,
///              newton_max_iter, retry_budget
///   [initial]  profile (zero | bump | mode | file), amplitude, mode, file
///   [verify]   checks, mu, tol_vi_constant, ratio_max, bound_epsilons, bound_paths
///   [output]   directory, dump_trajectories, workers
///
/// Unknown sections or keys are errors.
struct ExperimentConfig
{
    double length = 1.0;
    std::size_t n_interior = 127;

    std::size_t k_max = 8;
    double gamma0 = 1.0;
    double decay = 8.0;
    std::optional<std::vector<double>> gammas;
    std::uint64_t seed = 42;
    std::size_t n_paths = 200;
    double alpha = 0.5;
    bool override_h1 = false;

    double epsilon = 1e-2;
    std::vector<double> epsilons{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    double dt = 1e-3;
    double t_final = 0.5;
    Scheme scheme = Scheme::implicit;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int retry_budget = 3;

    std::string profile = "bump";
    double amplitude = 4.0;
    std::size_t mode = 1;
    std::filesystem::path file;

    std::vector<std::string> checks{"ito_l2_bound", "psi_l1_estimate", "vi_residual",
                                    "total_variation", "hminus1_sup_bound"};
    double mu = 1e-2;
    double tol_vi_constant = 1.0;
    double ratio_max = 10.0;
    std::vector<double> bound_epsilons{1e-1, 1e-2, 1e-3, 1e-4};
    std::size_t bound_paths = 5;

    std::filesystem::path directory = "out";
    bool dump_trajectories = false;
    std::size_t workers = 1;

    GridSpec grid() const;
    /// Noise spec of ensemble member `path` (seed offset by the index).
    NoiseSpec noise_spec(std::size_t path = 0) const;
    SolverConfig solver(double eps) const;
    SolverConfig solver() const { return solver(epsilon); }
    Field initial_datum() const;

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

/// Relative file paths are resolved against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& file);

/// Nodal values, one per line; blank lines and lines starting with '#' are skipped.
Field read_field_file(const std::filesystem::path& file, const GridSpec& grid);

} // namespace logdiff

#endif // LOGDIFF_CONFIG_HPP
