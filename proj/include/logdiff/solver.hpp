#ifndef LOGDIFF_SOLVER_HPP
#define LOGDIFF_SOLVER_HPP

#include "logdiff/grid.hpp"
#include "logdiff/noise.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

enum class Scheme { implicit, explicit_euler };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct SolverConfig
{
    double epsilon = 1e-2;
    double dt = 1e-3;
    double t_final = 0.5;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int retry_budget = 3;   // dt-halvings allowed for a failing step
    Scheme scheme = Scheme::implicit;

    void validate() const;
    std::size_t n_steps() const;
};

struct StepDiagnostics
{
    int newton_iters = 0;
    double residual = 0.0;
    int substeps = 1;
};

struct StepResult
{
    Field y;
    StepDiagnostics diag;
};

class StepFailure : public std::runtime_error
{
public:
    StepFailure(const std::string& what, double last_residual, std::size_t step = 0)
        : std::runtime_error(what), residual_(last_residual), step_(step) {}
    double last_residual() const { return residual_; }
    std::size_t step() const { return step_; }

private:
    double residual_;
    std::size_t step_;
};

class StabilityViolation : public std::runtime_error
{
public:
    StabilityViolation(double bound)
        : std::runtime_error("explicit step unstable: dt*(4/h^2)*max psi_bar' = " +
                             std::to_string(bound) + " > 1"),
          bound_(bound) {}
    double bound() const { return bound_; }

private:
    double bound_;
};

/// Psi_bar_eps applied nodewise.
Field psi_bar_field(double epsilon, const Field& x);

/// Residual Y - dt*Delta_h Psi_bar(Y + w) - y_prev.
Field implicit_residual(const Field& y, const Field& y_prev, const Field& w, double epsilon, double dt);

/// One implicit Euler step of the pathwise equation: solves
///   Y - dt*Delta_h Psi_bar_eps(Y + w_next) = y_prev
/// by damped Newton. Throws StepFailure when newton_max_iter is exceeded.
StepResult step_implicit(const Field& y_prev, const Field& w_next, const SolverConfig& cfg);

/// dt*(4/h^2)*max_j Psi_bar'(y_j + w_j), the forward-Euler stability number.
double explicit_stability_number(const Field& y, const Field& w, const SolverConfig& cfg);

/// Forward Euler: Y = y_prev + dt*Delta_h Psi_bar(y_prev + w_prev).
/// Throws StabilityViolation when the stability number exceeds 1.
Field step_explicit(const Field& y_prev, const Field& w_prev, const SolverConfig& cfg);

struct Trajectory
{
    SolverConfig config;
    GridSpec grid;
    std::shared_ptr<const NoisePath> noise;
    std::vector<double> times;
    std::vector<Field> y_fields;  // Y_eps(t_n)
    std::vector<Field> x_fields;  // X_eps(t_n) = Y_eps(t_n) + sqrt(Q)W(t_n)
    std::vector<StepDiagnostics> diagnostics;  // one per step, index n -> step n to n+1

    std::size_t n_steps() const { return times.size() - 1; }
    double dt() const { return config.dt; }
};

/// Marches the configured scheme over the noise time grid. A failing
/// implicit step is retried with dt halved (noise interpolated linearly
/// inside the step) up to retry_budget times.
Trajectory solve_path(const Field& x0, std::shared_ptr<const NoisePath> noise, const SolverConfig& cfg);

/// sup_n |a(t_n) - b(t_n)|_{-1} over Y fields, on identical time grids.
double sup_hminus1_distance_y(const Trajectory& a, const Trajectory& b);

struct SweepReport
{
    std::vector<double> epsilons;
    std::vector<std::vector<double>> distance;  // pairwise sup-t H^-1 distance of Y
    std::vector<double> consecutive;            // distance[i][i+1]
    bool strictly_decreasing = false;
};

/// Runs solve_path for each epsilon on the same noise path. The list must be
/// positive and non-increasing.
SweepReport epsilon_sweep(const Field& x0, std::shared_ptr<const NoisePath> noise,
                          const SolverConfig& cfg, const std::vector<double>& eps_list);

/// CSV step,time,node,Y,X
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
/// CSV step,newton_iters,residual
void write_diagnostics_csv(std::ostream& out, const Trajectory& traj);

} // namespace logdiff

#endif // LOGDIFF_SOLVER_HPP
