#include "logdiff/experiment.hpp"
#include "logdiff/nonlinearity.hpp"
#include "logdiff/verifier.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace logdiff {

namespace {

class CsvFile
{
public:
    CsvFile(const fs::path& path, const std::string& header) : out_(path)
    {
        if (!out_)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        buf_.precision(std::numeric_limits<double>::max_digits10);
        buf_ << header << '\n';
    }
    ~CsvFile() { out_ << buf_.str(); }

    template <class... Ts>
    void row(const Ts&... cols)
    {
        std::size_t i = 0;
        ((buf_ << (i++ ? "," : "") << cols), ...);
        buf_ << '\n';
    }
    std::ostream& raw() { return buf_; }

private:
    std::ofstream out_;
    std::ostringstream buf_;
};

std::shared_ptr<const NoisePath> make_noise(const ExperimentConfig& cfg, std::size_t path,
                                            const GridSpec& grid, const EigenSystem& eigen)
{
    return std::make_shared<const NoisePath>(
        synthesize(cfg.noise_spec(path), grid, eigen, cfg.override_h1));
}

Trajectory run_path(const ExperimentConfig& cfg, std::size_t path, const Field& x0,
                    std::shared_ptr<const NoisePath> noise, double eps)
{
    try {
        return solve_path(x0, std::move(noise), cfg.solver(eps));
    } catch (const StepFailure& e) {
        throw StepFailure("path " + std::to_string(path) + " (seed " + std::to_string(cfg.seed + path) +
                              ", epsilon " + std::to_string(eps) + ") failed at step " +
                              std::to_string(e.step()) + ": " + e.what(),
                          e.last_residual(), e.step());
    } catch (const StabilityViolation& e) {
        throw StepFailure("path " + std::to_string(path) + " (seed " + std::to_string(cfg.seed + path) +
                              "): " + e.what(),
                          e.bound());
    }
}

template <class F>
int guarded(std::ostream& log, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const StepFailure& e) {
        log << "solver failure: " << e.what() << '\n';
        return kExitSolverFailure;
    } catch (const ResolventFailure& e) {
        log << "solver failure: " << e.what() << '\n';
        return kExitSolverFailure;
    } catch (const std::invalid_argument& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
}

std::size_t ensemble_modes(const ExperimentConfig& cfg)
{
    return std::max<std::size_t>(cfg.k_max, 1);
}

} // namespace

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        fs::create_directories(cfg.directory);
        const GridSpec grid = cfg.grid();
        const EigenSystem eigen = eigensystem(grid, ensemble_modes(cfg));
        const Field x0 = cfg.initial_datum();

        struct Row
        {
            double l2, hm1;
            long iters_total;
            int iters_max;
            double max_residual;
        };
        const auto rows = parallel_map<Row>(cfg.n_paths, cfg.workers, [&](std::size_t i) {
            const Trajectory traj = run_path(cfg, i, x0, make_noise(cfg, i, grid, eigen), cfg.epsilon);
            if (cfg.dump_trajectories) {
                std::ofstream t(cfg.directory / ("trajectory_" + std::to_string(i) + ".csv"));
                write_trajectory_csv(t, traj);
                std::ofstream d(cfg.directory / ("diagnostics_" + std::to_string(i) + ".csv"));
                write_diagnostics_csv(d, traj);
            }
            Row r{norm_l2(traj.x_fields.back()), norm_hminus1(traj.x_fields.back()), 0, 0, 0.0};
            for (const auto& d : traj.diagnostics) {
                r.iters_total += d.newton_iters;
                r.iters_max = std::max(r.iters_max, d.newton_iters);
                r.max_residual = std::max(r.max_residual, d.residual);
            }
            return r;
        });

        CsvFile summary(cfg.directory / "summary.csv",
                        "path,seed,l2_final,hminus1_final,newton_iters_total,newton_iters_max,max_residual");
        for (std::size_t i = 0; i < rows.size(); ++i)
            summary.row(i, cfg.seed + i, rows[i].l2, rows[i].hm1, rows[i].iters_total, rows[i].iters_max,
                        rows[i].max_residual);
        log << "simulate: " << rows.size() << " paths written to " << (cfg.directory / "summary.csv").string()
            << '\n';
        return static_cast<int>(kExitOk);
    });
}

int cmd_sweep_eps(const ExperimentConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        if (cfg.epsilons.size() < 2)
            throw ConfigError("sweep-eps needs at least two epsilons");
        for (std::size_t i = 1; i < cfg.epsilons.size(); ++i)
            if (!(cfg.epsilons[i] < cfg.epsilons[i - 1]))
                throw ConfigError("sweep-eps epsilons must be strictly decreasing");
        fs::create_directories(cfg.directory);
        const GridSpec grid = cfg.grid();
        const EigenSystem eigen = eigensystem(grid, ensemble_modes(cfg));
        const Field x0 = cfg.initial_datum();

        const auto sweeps = parallel_map<SweepReport>(cfg.n_paths, cfg.workers, [&](std::size_t i) {
            try {
                return epsilon_sweep(x0, make_noise(cfg, i, grid, eigen), cfg.solver(), cfg.epsilons);
            } catch (const StepFailure& e) {
                throw StepFailure("path " + std::to_string(i) + " (seed " + std::to_string(cfg.seed + i) +
                                      ") failed at step " + std::to_string(e.step()) + ": " + e.what(),
                                  e.last_residual(), e.step());
            }
        });

        CsvFile matrix(cfg.directory / "sweep_matrix.csv", "path,seed,eps_i,eps_j,distance");
        CsvFile curve(cfg.directory / "sweep_curve.csv", "path,seed,eps_from,eps_to,distance,decreasing");
        std::size_t monotone = 0;
        for (std::size_t p = 0; p < sweeps.size(); ++p) {
            const auto& s = sweeps[p];
            for (std::size_t i = 0; i < s.epsilons.size(); ++i)
                for (std::size_t j = 0; j < s.epsilons.size(); ++j)
                    matrix.row(p, cfg.seed + p, s.epsilons[i], s.epsilons[j], s.distance[i][j]);
            for (std::size_t i = 0; i < s.consecutive.size(); ++i) {
                const bool dec = i == 0 || s.consecutive[i] < s.consecutive[i - 1];
                curve.row(p, cfg.seed + p, s.epsilons[i], s.epsilons[i + 1], s.consecutive[i], dec ? 1 : 0);
            }
            monotone += s.strictly_decreasing ? 1 : 0;
        }
        log << "sweep-eps: " << monotone << " of " << sweeps.size()
            << " paths have strictly decreasing consecutive distances\n";
        return static_cast<int>(kExitOk);
    });
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        if (cfg.checks.empty())
            throw ConfigError("verify block selects no checks");
        auto wants = [&](const std::string& c) {
            return std::find(cfg.checks.begin(), cfg.checks.end(), c) != cfg.checks.end();
        };
        fs::create_directories(cfg.directory);
        const GridSpec grid = cfg.grid();
        const EigenSystem eigen = eigensystem(grid, ensemble_modes(cfg));
        const Field x0 = cfg.initial_datum();
        std::vector<Report> reports;

        if (wants("ito_l2_bound")) {
            if (cfg.n_paths < kMinItoEnsemble)
                throw ConfigError("ito_l2_bound needs n_paths >= " + std::to_string(kMinItoEnsemble));
            struct Member
            {
                std::vector<double> series;
                std::pair<double, double> l4;
            };
            const auto members = parallel_map<Member>(cfg.n_paths, cfg.workers, [&](std::size_t i) {
                const Trajectory t = run_path(cfg, i, x0, make_noise(cfg, i, grid, eigen), cfg.epsilon);
                return Member{squared_l2_series(t), l4_record(t)};
            });
            std::vector<std::vector<double>> series;
            double l4_max = 0.0, l4_int = 0.0;
            for (const auto& m : members) {
                series.push_back(m.series);
                l4_max += m.l4.first;
                l4_int += m.l4.second;
            }
            std::vector<double> times(series.front().size());
            for (std::size_t n = 0; n < times.size(); ++n)
                times[n] = cfg.noise_spec().time(n);
            Report r = ito_l2_bound(series, times, x0, cfg.noise_spec(), eigen);
            r.set_scalar("mean_sup_t_l4_norm", l4_max / static_cast<double>(members.size()));
            r.set_scalar("mean_spacetime_x4", l4_int / static_cast<double>(members.size()));
            reports.push_back(std::move(r));
        }

        const bool bounds = wants("psi_l1_estimate") || wants("total_variation") || wants("hminus1_sup_bound");
        if (bounds) {
            struct Bounds
            {
                std::vector<double> l1, tv, hs;
            };
            const auto per_path = parallel_map<Bounds>(cfg.bound_paths, cfg.workers, [&](std::size_t i) {
                const auto noise = make_noise(cfg, i, grid, eigen);
                Bounds out;
                for (double e : cfg.bound_epsilons) {
                    const Trajectory t = run_path(cfg, i, x0, noise, e);
                    out.l1.push_back(psi_l1_estimate(t));
                    out.tv.push_back(total_variation_diag(t));
                    out.hs.push_back(hminus1_sup_bound(t));
                }
                return out;
            });
            for (std::size_t p = 0; p < per_path.size(); ++p) {
                const std::string tag = "/path" + std::to_string(p);
                if (wants("psi_l1_estimate"))
                    reports.push_back(bounded_ratio("psi_l1_estimate" + tag, cfg.bound_epsilons, per_path[p].l1,
                                                    cfg.ratio_max));
                if (wants("total_variation"))
                    reports.push_back(bounded_ratio("total_variation" + tag, cfg.bound_epsilons, per_path[p].tv,
                                                    cfg.ratio_max));
                if (wants("hminus1_sup_bound"))
                    reports.push_back(bounded_ratio("hminus1_sup_bound" + tag, cfg.bound_epsilons,
                                                    per_path[p].hs, cfg.ratio_max));
            }
        }

        if (wants("vi_residual")) {
            const Trajectory t = run_path(cfg, 0, x0, make_noise(cfg, 0, grid, eigen), cfg.epsilon);
            const double tol = cfg.tol_vi_constant * (cfg.dt + cfg.epsilon);
            Report r = vi_residual(t, build_test_process(t, cfg.mu), x0, tol);
            r.name = "vi_residual";
            for (auto& row : r.rows)
                row.check = r.name;
            reports.push_back(std::move(r));
            Report s = vi_residual(t, self_test_process(t), x0, 1e-9);
            s.name = "vi_self_test";
            for (auto& row : s.rows)
                row.check = s.name;
            reports.push_back(std::move(s));
        }

        bool all = true;
        std::ofstream csv(cfg.directory / "verify_report.csv");
        std::ofstream txt(cfg.directory / "verify_summary.txt");
        bool first = true;
        for (const auto& r : reports) {
            write_report_csv(csv, r, first);
            first = false;
            txt << summary_text(r);
            log << summary_text(r);
            all = all && r.pass;
        }
        if (!all) {
            log << "verify: failed checks:";
            for (const auto& r : reports)
                if (!r.pass)
                    log << ' ' << r.name;
            log << '\n';
        }
        return static_cast<int>(all ? kExitOk : kExitCheckFailed);
    });
}

int cmd_noise_check(const ExperimentConfig& cfg, std::ostream& log)
{
    return guarded(log, [&] {
        cfg.validate();
        fs::create_directories(cfg.directory);
        const GridSpec grid = cfg.grid();
        const EigenSystem eigen = eigensystem(grid, ensemble_modes(cfg));
        const NoiseSpec spec = cfg.noise_spec();
        const H1Report h1 = validate_h1(spec, eigen);

        {
            CsvFile out(cfg.directory / "noise_h1.csv", "quantity,value");
            const double nan = std::numeric_limits<double>::quiet_NaN();
            out.row("sum_gamma2_lambda2", h1.sum_gamma2_lambda2);
            out.row("sum_gamma_lambda3", h1.sum_gamma_lambda3);
            out.row("margin_gamma2_lambda2", h1.margin_gamma2_lambda2.value_or(nan));
            out.row("margin_gamma_lambda3", h1.margin_gamma_lambda3.value_or(nan));
            out.row("deterministic", h1.deterministic ? 1 : 0);
            out.row("pass", h1.pass ? 1 : 0);
        }
        log << "noise-check: sum gamma^2 lambda^2 = " << h1.sum_gamma2_lambda2
            << ", sum gamma lambda^3 = " << h1.sum_gamma_lambda3 << (h1.pass ? " (pass)" : " (FAIL)") << '\n';
        if (!h1.pass && !cfg.override_h1)
            return static_cast<int>(kExitCheckFailed);

        const auto sups = parallel_map<double>(cfg.n_paths, cfg.workers, [&](std::size_t i) {
            return sup_norm_estimate(*make_noise(cfg, i, grid, eigen));
        });
        {
            CsvFile out(cfg.directory / "noise_sup.csv", "path,seed,sup_norm");
            for (std::size_t i = 0; i < sups.size(); ++i)
                out.row(i, cfg.seed + i, sups[i]);
        }

        const auto noise = make_noise(cfg, 0, grid, eigen);
        CsvFile part(cfg.directory / "noise_partition.csv",
                     "cell,start_step,end_step,start_time,end_time,oscillation");
        try {
            const auto cuts = modulus_of_continuity(*noise, cfg.alpha);
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
                part.row(c, cuts[c], cuts[c + 1], noise->time(cuts[c]), noise->time(cuts[c + 1]),
                         cell_oscillation(*noise, cuts[c], cuts[c + 1]));
            log << "noise-check: alpha = " << cfg.alpha << " partition has " << cuts.size() - 1 << " cells\n";
        } catch (const TimeGridTooCoarse& e) {
            log << "noise-check: " << e.what() << '\n';
            return static_cast<int>(kExitCheckFailed);
        }
        return static_cast<int>(h1.pass ? kExitOk : kExitCheckFailed);
    });
}

} // namespace logdiff
