#ifndef LOGDIFF_EXPERIMENT_HPP
#define LOGDIFF_EXPERIMENT_HPP

#include "logdiff/config.hpp"

#include <exception>
#include <functional>
#include <iosfwd>
#include <vector>

namespace logdiff {

/// Process exit codes shared by all subcommands.
enum ExitCode : int {
    kExitOk = 0,
    kExitCheckFailed = 1,
    kExitConfigError = 2,
    kExitSolverFailure = 3,
};

/// Runs job(i) for i in [0, count) on up to `workers` threads. Results come
/// back in index order; the exception of the lowest failing index is
/// rethrown after all jobs finish.
template <class R>
std::vector<R> parallel_map(std::size_t count, std::size_t workers, const std::function<R(std::size_t)>& job);

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sweep_eps(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);
int cmd_noise_check(const ExperimentConfig& cfg, std::ostream& log);

} // namespace logdiff

#include "logdiff/detail/parallel_map.hpp"

#endif // LOGDIFF_EXPERIMENT_HPP
