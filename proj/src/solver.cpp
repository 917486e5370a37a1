#include "logdiff/solver.hpp"
#include "logdiff/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace logdiff {

Scheme parse_scheme(const std::string& name)
{
    if (name == "implicit")
        return Scheme::implicit;
    if (name == "explicit")
        return Scheme::explicit_euler;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected implicit or explicit)");
}

std::string to_string(Scheme s)
{
    return s == Scheme::implicit ? "implicit" : "explicit";
}

void SolverConfig::validate() const
{
    RegularizationParam{epsilon};
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("dt must be positive");
    if (!(t_final > 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("t_final must be positive");
    if (!(newton_tol > 0.0))
        throw std::invalid_argument("newton_tol must be positive");
    if (newton_max_iter < 1)
        throw std::invalid_argument("newton_max_iter must be >= 1");
    if (retry_budget < 0)
        throw std::invalid_argument("retry_budget must be >= 0");
    n_steps();
}

std::size_t SolverConfig::n_steps() const
{
    const double ratio = t_final / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(n * dt - t_final) > 1e-9 * t_final)
        throw std::invalid_argument("dt must divide t_final");
    return static_cast<std::size_t>(n);
}

namespace {

double weighted_norm(const std::vector<double>& r, double h)
{
    double s = 0.0;
    for (double v : r)
        s += v * v;
    return std::sqrt(h * s);
}

// Residual of the implicit step; also fills the nodal flux u = Psi_bar(y + w)
// and, when requested, its derivative.
double residual_into(const std::vector<double>& y, std::span<const double> y_prev,
                     std::span<const double> w, RegularizationParam eps, double c, double h,
                     std::vector<double>& r, std::vector<double>* deriv)
{
    const std::size_t n = y.size();
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = y[j] + w[j];
        const auto p = yosida_point(eps, x);
        u[j] = p.value + eps.value() * x;
        if (deriv)
            (*deriv)[j] = p.derivative + eps.value();
    }
    r.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = j > 0 ? u[j - 1] : 0.0;
        const double right = j + 1 < n ? u[j + 1] : 0.0;
        r[j] = y[j] - c * (left - 2.0 * u[j] + right) - y_prev[j];
    }
    return weighted_norm(r, h);
}

constexpr int kMaxDampingHalvings = 30;

StepResult newton_step(const Field& y_prev, const Field& w, double epsilon, double dt,
                       double tol, int max_iter)
{
    require_same_grid(y_prev, w);
    const RegularizationParam eps(epsilon);
    const std::size_t n = y_prev.size();
    const double h = y_prev.grid().h();
    const double c = dt / (h * h);

    std::vector<double> y = y_prev.to_vector();
    std::vector<double> r, d(n), trial(n), r_trial;
    double rnorm = residual_into(y, y_prev.values(), w.values(), eps, c, h, r, &d);

    int it = 0;
    while (rnorm > tol) {
        if (it >= max_iter)
            throw StepFailure("Newton did not converge in " + std::to_string(max_iter) +
                                  " iterations (residual " + std::to_string(rnorm) + ")",
                              rnorm);
        ++it;

        // Jacobian I - c*Delta_h*diag(d): row j couples d_{j-1}, d_j, d_{j+1}.
        std::vector<double> lower(n), diag(n), upper(n), rhs(n);
        for (std::size_t j = 0; j < n; ++j) {
            diag[j] = 1.0 + 2.0 * c * d[j];
            lower[j] = j > 0 ? -c * d[j - 1] : 0.0;
            upper[j] = j + 1 < n ? -c * d[j + 1] : 0.0;
            rhs[j] = -r[j];
        }
        const std::vector<double> delta = solve_tridiagonal(lower, diag, upper, rhs);

        double lambda = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= kMaxDampingHalvings; ++halving, lambda *= 0.5) {
            for (std::size_t j = 0; j < n; ++j)
                trial[j] = y[j] + lambda * delta[j];
            const double tn = residual_into(trial, y_prev.values(), w.values(), eps, c, h, r_trial, nullptr);
            if (tn < rnorm) {
                accepted = true;
                y.swap(trial);
                break;
            }
        }
        if (!accepted)
            throw StepFailure("Newton damping could not reduce the residual (" +
                                  std::to_string(rnorm) + ")",
                              rnorm);
        rnorm = residual_into(y, y_prev.values(), w.values(), eps, c, h, r, &d);
    }
    return StepResult{Field(y_prev.grid(), std::move(y)), StepDiagnostics{it, rnorm, 1}};
}

} // namespace

Field psi_bar_field(double epsilon, const Field& x)
{
    const RegularizationParam eps(epsilon);
    std::vector<double> v(x.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = psi_bar(eps, x[j]);
    return Field(x.grid(), std::move(v));
}

Field implicit_residual(const Field& y, const Field& y_prev, const Field& w, double epsilon, double dt)
{
    return y - dt * laplacian_apply(psi_bar_field(epsilon, y + w)) - y_prev;
}

StepResult step_implicit(const Field& y_prev, const Field& w_next, const SolverConfig& cfg)
{
    return newton_step(y_prev, w_next, cfg.epsilon, cfg.dt, cfg.newton_tol, cfg.newton_max_iter);
}

double explicit_stability_number(const Field& y, const Field& w, const SolverConfig& cfg)
{
    require_same_grid(y, w);
    const RegularizationParam eps(cfg.epsilon);
    double dmax = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
        dmax = std::max(dmax, psi_bar_derivative(eps, y[j] + w[j]));
    const double h = y.grid().h();
    return cfg.dt * 4.0 / (h * h) * dmax;
}

Field step_explicit(const Field& y_prev, const Field& w_prev, const SolverConfig& cfg)
{
    const double bound = explicit_stability_number(y_prev, w_prev, cfg);
    if (bound > 1.0)
        throw StabilityViolation(bound);
    return y_prev + cfg.dt * laplacian_apply(psi_bar_field(cfg.epsilon, y_prev + w_prev));
}

namespace {

StepResult implicit_with_retry(const Field& y_prev, const Field& w_prev, const Field& w_next,
                               const SolverConfig& cfg, std::size_t step)
{
    try {
        return step_implicit(y_prev, w_next, cfg);
    } catch (const StepFailure& first) {
        double last = first.last_residual();
        for (int attempt = 1; attempt <= cfg.retry_budget; ++attempt) {
            const int m = 1 << attempt;
            SolverConfig sub = cfg;
            sub.dt = cfg.dt / m;
            try {
                Field y = y_prev;
                StepDiagnostics total{0, 0.0, m};
                for (int i = 1; i <= m; ++i) {
                    const double theta = static_cast<double>(i) / m;
                    const Field w = w_prev + theta * (w_next - w_prev);
                    StepResult r = step_implicit(y, w, sub);
                    total.newton_iters += r.diag.newton_iters;
                    total.residual = std::max(total.residual, r.diag.residual);
                    y = std::move(r.y);
                }
                return StepResult{std::move(y), total};
            } catch (const StepFailure& again) {
                last = again.last_residual();
            }
        }
        throw StepFailure("step " + std::to_string(step) + " failed after " +
                              std::to_string(cfg.retry_budget) + " dt-halvings: " + first.what(),
                          last, step);
    }
}

} // namespace

Trajectory solve_path(const Field& x0, std::shared_ptr<const NoisePath> noise, const SolverConfig& cfg)
{
    cfg.validate();
    if (!noise)
        throw std::invalid_argument("solve_path: missing noise path");
    const std::size_t N = cfg.n_steps();
    if (noise->n_steps() != N || std::abs(noise->spec.t_final - cfg.t_final) > 1e-12 * cfg.t_final)
        throw std::invalid_argument("noise time grid does not match the solver configuration");
    if (!(noise->grid == x0.grid()))
        throw GridMismatch("noise and initial datum live on different grids");

    Trajectory traj{cfg, x0.grid(), noise, {}, {}, {}, {}};
    traj.times.reserve(N + 1);
    traj.y_fields.reserve(N + 1);
    traj.x_fields.reserve(N + 1);
    traj.diagnostics.reserve(N);

    for (std::size_t n = 0; n <= N; ++n)
        traj.times.push_back(noise->time(n));
    traj.y_fields.push_back(x0);
    traj.x_fields.push_back(x0 + noise->values[0]);

    for (std::size_t n = 0; n < N; ++n) {
        const Field& y = traj.y_fields.back();
        if (cfg.scheme == Scheme::implicit) {
            StepResult r = implicit_with_retry(y, noise->values[n], noise->values[n + 1], cfg, n);
            traj.y_fields.push_back(std::move(r.y));
            traj.diagnostics.push_back(r.diag);
        } else {
            traj.y_fields.push_back(step_explicit(y, noise->values[n], cfg));
            traj.diagnostics.push_back(StepDiagnostics{0, 0.0, 1});
        }
        traj.x_fields.push_back(traj.y_fields.back() + noise->values[n + 1]);
    }
    return traj;
}

double sup_hminus1_distance_y(const Trajectory& a, const Trajectory& b)
{
    if (a.times.size() != b.times.size())
        throw std::invalid_argument("trajectories have different time grids");
    double d = 0.0;
    for (std::size_t n = 0; n < a.y_fields.size(); ++n)
        d = std::max(d, norm_hminus1(a.y_fields[n] - b.y_fields[n]));
    return d;
}

SweepReport epsilon_sweep(const Field& x0, std::shared_ptr<const NoisePath> noise,
                          const SolverConfig& cfg, const std::vector<double>& eps_list)
{
    if (eps_list.empty())
        throw std::invalid_argument("epsilon list is empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        RegularizationParam{eps_list[i]};
        if (i > 0 && eps_list[i] > eps_list[i - 1])
            throw std::invalid_argument("epsilon list must be non-increasing");
    }

    std::vector<Trajectory> runs;
    runs.reserve(eps_list.size());
    for (double e : eps_list) {
        SolverConfig c = cfg;
        c.epsilon = e;
        runs.push_back(solve_path(x0, noise, c));
    }

    const std::size_t m = eps_list.size();
    SweepReport rep;
    rep.epsilons = eps_list;
    rep.distance.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            rep.distance[i][j] = rep.distance[j][i] = sup_hminus1_distance_y(runs[i], runs[j]);
    for (std::size_t i = 0; i + 1 < m; ++i)
        rep.consecutive.push_back(rep.distance[i][i + 1]);
    rep.strictly_decreasing = !rep.consecutive.empty();
    for (std::size_t i = 1; i < rep.consecutive.size(); ++i)
        rep.strictly_decreasing = rep.strictly_decreasing && rep.consecutive[i] < rep.consecutive[i - 1];
    return rep;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    buf << "step,time,node,Y,X\n";
    for (std::size_t n = 0; n < traj.times.size(); ++n)
        for (std::size_t j = 0; j < traj.grid.n_interior(); ++j)
            buf << n << ',' << traj.times[n] << ',' << (j + 1) << ',' << traj.y_fields[n][j] << ','
                << traj.x_fields[n][j] << '\n';
    out << buf.str();
}

void write_diagnostics_csv(std::ostream& out, const Trajectory& traj)
{
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    buf << "step,newton_iters,residual\n";
    for (std::size_t n = 0; n < traj.diagnostics.size(); ++n)
        buf << (n + 1) << ',' << traj.diagnostics[n].newton_iters << ',' << traj.diagnostics[n].residual << '\n';
    out << buf.str();
}

} // namespace logdiff
