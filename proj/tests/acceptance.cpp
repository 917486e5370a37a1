// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.
#include "logdiff/nonlinearity.hpp"
#include "logdiff/verifier.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

using namespace logdiff;

namespace {

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            if (pass)
                detail << "failed: ";
            else
                detail << "; ";
            detail << what;
        }
        pass = pass && ok;
    }
};

SolverConfig solver_config(double eps, double dt, double t_final, Scheme scheme = Scheme::implicit)
{
    SolverConfig c;
    c.epsilon = eps;
    c.dt = dt;
    c.t_final = t_final;
    c.scheme = scheme;
    return c;
}

NoiseSpec noise_spec(std::uint64_t seed, double t_final, std::size_t steps, double decay = 8.0)
{
    NoiseSpec s;
    s.k_max = 8;
    s.gamma = GammaRule::power_law(1.0, decay);
    s.seed = seed;
    s.t_final = t_final;
    s.n_steps = steps;
    return s;
}

Field bump(const GridSpec& g, double amp = 4.0)
{
    return Field::sample(g, [&](double x) { return amp * x * (g.length() - x); });
}

std::string sci(double v)
{
    std::ostringstream s;
    s << std::setprecision(3) << std::scientific << v;
    return s.str();
}

// -- 1 ----------------------------------------------------------------------
void monotone_operator_suite(Outcome& out)
{
    std::mt19937_64 rng(20240901);
    std::uniform_real_distribution<double> mag(-3.0, 3.0), leps(-4.0, 0.0), coin(0.0, 1.0);
    auto draw = [&] { return (coin(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, mag(rng)); };

    const int trials = 100000;
    int fails[5] = {0, 0, 0, 0, 0};
    double worst_identity = 0.0, worst_fd = 0.0;
    for (int i = 0; i < trials; ++i) {
        const RegularizationParam eps(std::pow(10.0, leps(rng)));
        const double x = draw(), y = draw();
        const double jx = psi_resolvent(eps, x), jy = psi_resolvent(eps, y);

        if (std::abs(jx - jy) > std::abs(x - y) * (1 + 1e-14))
            ++fails[0];
        if ((psi_yosida(eps, x) - psi_yosida(eps, y)) * (x - y) < 0.0)
            ++fails[1];

        // Psi_eps(x) = Psi(J x) with J x = x - eps*Psi_eps(x) from the resolvent equation.
        const double v = psi_yosida(eps, x);
        const double id = std::abs(v - psi(x - eps.value() * v)) / std::max(1.0, std::abs(v));
        worst_identity = std::max(worst_identity, id);
        if (id > 1e-10)
            ++fails[2];

        const double gm = g_moreau(eps, x);
        if (g(jx) > gm * (1 + 1e-14) || gm > g(x) * (1 + 1e-14))
            ++fails[3];

        const double step = 1e-5;
        const double fd = (g_bar(eps, x + step) - g_bar(eps, x - step)) / (2 * step);
        const double rel = std::abs(fd - psi_bar(eps, x)) / std::abs(psi_bar(eps, x));
        worst_fd = std::max(worst_fd, rel);
        if (rel > 1e-6)
            ++fails[4];
    }
    const char* names[] = {"nonexpansive", "monotone", "identity", "sandwich", "derivative"};
    for (int c = 0; c < 5; ++c)
        out.require(fails[c] == 0, std::string(names[c]) + " " + std::to_string(fails[c]) + " failures");
    out.detail << (out.pass ? "" : "; ") << trials << " samples, worst identity " << sci(worst_identity)
               << ", worst derivative rel " << sci(worst_fd);
}

// -- 2 ----------------------------------------------------------------------
void grid_oracle_suite(Outcome& out)
{
    const GridSpec g(1.0, 15);
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
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(a);
    const auto es = eigensystem(g, 15);
    double worst_val = 0.0, worst_vec = 0.0;
    for (std::size_t k = 1; k <= 15; ++k) {
        const auto kk = static_cast<Eigen::Index>(k - 1);
        const double lam = dense.eigenvalues()(kk);
        worst_val = std::max(worst_val, std::abs(es.mode(k).eigenvalue - lam) / lam);
        // Dense eigenvectors are Euclidean-normalized; ours carry the weight h.
        Eigen::VectorXd ours(n);
        for (Eigen::Index j = 0; j < n; ++j)
            ours(j) = es.mode(k).vector[static_cast<std::size_t>(j)] * std::sqrt(g.h());
        worst_vec = std::max(worst_vec, 1.0 - std::abs(ours.dot(dense.eigenvectors().col(kk))));
    }
    out.require(worst_val <= 1e-10, "eigenvalue rel err " + sci(worst_val));
    out.require(worst_vec <= 1e-10, "eigenvector alignment " + sci(worst_vec));

    double worst_green = 0.0;
    for (std::size_t nn : {15u, 31u, 63u, 127u}) {
        const GridSpec gg(1.0, nn);
        const Field u = neg_laplacian_inverse(Field::constant(gg, 1.0));
        for (std::size_t j = 0; j < nn; ++j) {
            const double x = gg.node(j);
            worst_green = std::max(worst_green, std::abs(u[j] - x * (1 - x) / 2) / (x * (1 - x) / 2));
        }
    }
    out.require(worst_green <= 1e-12, "Green's function rel err " + sci(worst_green));

    std::vector<double> lh, le;
    for (std::size_t nn : {15u, 31u, 63u, 127u}) {
        const GridSpec gg(1.0, nn);
        const double pi = std::numbers::pi;
        const Field f = Field::sample(gg, [&](double x) { return pi * pi * std::sin(pi * x); });
        const Field exact = Field::sample(gg, [&](double x) { return std::sin(pi * x); });
        lh.push_back(std::log(gg.h()));
        le.push_back(std::log(norm_linf(neg_laplacian_inverse(f) - exact)));
    }
    const double mh = (lh[0] + lh[1] + lh[2] + lh[3]) / 4, me = (le[0] + le[1] + le[2] + le[3]) / 4;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < 4; ++i) {
        sxy += (lh[i] - mh) * (le[i] - me);
        sxx += (lh[i] - mh) * (lh[i] - mh);
    }
    const double order = sxy / sxx;
    out.require(order >= 1.9 && order <= 2.1, "fitted order " + std::to_string(order));

    double worst_norm = 0.0;
    for (const auto& m : es.modes)
        worst_norm = std::max(worst_norm, std::abs(norm_hminus1(m.vector) * std::sqrt(m.eigenvalue) - 1.0));
    out.require(worst_norm <= 1e-10, "H^-1 norm of e_k " + sci(worst_norm));

    out.detail << (out.pass ? "" : "; ") << "eig " << sci(worst_val) << ", green " << sci(worst_green)
               << ", order " << std::setprecision(4) << order << ", |e_k|_-1 " << sci(worst_norm);
}

// -- 3 ----------------------------------------------------------------------
void ito_bound(Outcome& out)
{
    const auto start = std::chrono::steady_clock::now();
    const GridSpec g(1.0, 127);
    const auto es = eigensystem(g, 8);
    const std::size_t M = 200;
    for (const char* which : {"zero", "bump"}) {
        const Field x0 = std::string(which) == "zero" ? Field(g) : bump(g);
        std::vector<std::vector<double>> series;
        std::vector<double> times;
        for (std::size_t m = 0; m < M; ++m) {
            const auto noise = std::make_shared<const NoisePath>(synthesize(noise_spec(42 + m, 0.5, 500), g, es));
            const auto traj = solve_path(x0, noise, solver_config(1e-2, 1e-3, 0.5));
            series.push_back(squared_l2_series(traj));
            times = traj.times;
        }
        const auto r = ito_l2_bound(series, times, x0, noise_spec(42, 0.5, 500), es);
        double worst_rel = INFINITY;
        for (const auto& row : r.rows)
            if (row.t > 0)
                worst_rel = std::min(worst_rel, row.margin / row.rhs);
        out.require(r.pass, std::string("x0 = ") + which + " min margin " + sci(r.min_margin()));
        out.detail << (out.pass ? "" : "; ") << "x0=" << which << " min relative margin (t>0) "
                   << std::setprecision(3) << worst_rel << ", ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs <= 300.0, "runtime " + std::to_string(secs) + " s");
    out.detail << "runtime " << std::setprecision(3) << secs << " s";
}

// -- 4 ----------------------------------------------------------------------
void psi_l1_boundedness(Outcome& out)
{
    const GridSpec g(1.0, 127);
    const auto es = eigensystem(g, 8);
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto noise = std::make_shared<const NoisePath>(synthesize(noise_spec(seed, 0.5, 500), g, es));
        std::vector<double> vals;
        for (double e : eps)
            vals.push_back(psi_l1_estimate(solve_path(bump(g), noise, solver_config(e, 1e-3, 0.5))));
        const auto r = bounded_ratio("psi_l1", eps, vals, 10.0);
        worst = std::max(worst, r.scalar("ratio"));
        out.require(r.pass, "seed " + std::to_string(seed) + " ratio " + std::to_string(r.scalar("ratio")));
    }
    out.detail << (out.pass ? "" : "; ") << "worst max/min ratio " << std::setprecision(4) << worst;
}

// -- 5 ----------------------------------------------------------------------
void epsilon_cauchy(Outcome& out)
{
    const GridSpec g(1.0, 127);
    const auto es = eigensystem(g, 8);
    const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto noise = std::make_shared<const NoisePath>(synthesize(noise_spec(seed, 0.5, 500), g, es));
        const auto s = epsilon_sweep(bump(g), noise, solver_config(1e-2, 1e-3, 0.5), eps);
        std::ostringstream curve;
        for (double d : s.consecutive)
            curve << ' ' << sci(d);
        out.require(s.strictly_decreasing, "seed " + std::to_string(seed) + ":" + curve.str());
        if (seed == 1)
            out.detail << "seed 1 curve" << curve.str();
    }
}

// -- 6 ----------------------------------------------------------------------
void vi_refinement(Outcome& out)
{
    const GridSpec g(1.0, 127);
    const auto es = eigensystem(g, 8);
    const double T = 0.5, mu = 1e-2, C = 1.0;
    const auto finest = synthesize(noise_spec(42, T, 4000), g, es);
    const Field x0 = bump(g);

    std::vector<double> resid, interior;
    double dt = 1e-3, eps = 1e-2;
    for (std::size_t stride = 8; stride >= 1; stride /= 2, dt /= 2, eps /= 2) {
        const auto noise = std::make_shared<const NoisePath>(restrict_time(finest, stride));
        const auto traj = solve_path(x0, noise, solver_config(eps, dt, T));
        const auto r = vi_residual(traj, build_test_process(traj, mu), x0, C * (dt + eps));
        const auto self = vi_residual(traj, self_test_process(traj), x0, 1e-9);
        resid.push_back(r.scalar("max_residual"));
        double sup_pos_t = -INFINITY;
        for (const auto& row : r.rows)
            if (row.t > 0)
                sup_pos_t = std::max(sup_pos_t, row.lhs - (row.rhs - r.tolerance));
        interior.push_back(sup_pos_t);
        out.require(r.pass, "residual above C(dt+eps) at dt=" + sci(dt));
        out.require(self.pass && self.scalar("max_residual") <= 1e-9,
                    "self-test residual " + sci(self.scalar("max_residual")));
    }
    for (std::size_t i = 1; i < resid.size(); ++i)
        out.require(resid[i] <= resid[i - 1], "max residual increased at level " + std::to_string(i));
    out.detail << (out.pass ? "" : "; ") << "max-t residual";
    for (double v : resid)
        out.detail << ' ' << sci(v);
    out.detail << " (sup over t>0:";
    for (double v : interior)
        out.detail << ' ' << sci(v);
    out.detail << ")";
}

// -- 7 ----------------------------------------------------------------------
void uniqueness_proxy(Outcome& out)
{
    // The explicit scheme needs dt*4/h^2 <= 1, which pins a coarse grid.
    const GridSpec g(1.0, 15);
    const auto es = eigensystem(g, 8);
    const double T = 0.5;
    const auto finest = synthesize(noise_spec(42, T, 5000), g, es);
    std::vector<double> dist;
    for (std::size_t stride : {4u, 2u, 1u}) {
        const auto noise = std::make_shared<const NoisePath>(restrict_time(finest, stride));
        const double dt = 1e-4 * static_cast<double>(stride);
        const auto a = solve_path(bump(g), noise, solver_config(1e-2, dt, T));
        const auto b = solve_path(bump(g), noise, solver_config(1e-2, dt, T, Scheme::explicit_euler));
        dist.push_back(uniqueness_distance(a, b));
    }
    for (std::size_t i = 1; i < dist.size(); ++i)
        out.require(dist[i - 1] / dist[i] >= 1.8, "ratio " + std::to_string(dist[i - 1] / dist[i]));
    out.detail << (out.pass ? "" : "; ") << "distances " << sci(dist[0]) << ' ' << sci(dist[1]) << ' '
               << sci(dist[2]) << ", ratios " << std::setprecision(4) << dist[0] / dist[1] << ' '
               << dist[1] / dist[2];
}

// -- 8 ----------------------------------------------------------------------
void noise_correctness(Outcome& out)
{
    const GridSpec g(1.0, 31);
    const auto es = eigensystem(g, 8);
    NoiseSpec spec = noise_spec(0, 0.5, 10);
    const std::size_t paths = 10000;
    const std::size_t steps[2] = {5, 10};
    double sum2[3][2] = {};
    for (std::size_t m = 0; m < paths; ++m) {
        spec.seed = 100000 + m;
        const auto p = synthesize(spec, g, es);
        for (std::size_t k = 1; k <= 3; ++k)
            for (int t = 0; t < 2; ++t) {
                const double c = inner_l2(p.values[steps[t]], es.mode(k).vector);
                sum2[k - 1][t] += c * c;
            }
    }
    double worst = 0.0;
    for (std::size_t k = 1; k <= 3; ++k)
        for (int t = 0; t < 2; ++t) {
            const double expect = spec.gamma(k) * spec.gamma(k) * spec.time(steps[t]);
            const double rel = std::abs(sum2[k - 1][t] / paths - expect) / expect;
            worst = std::max(worst, rel);
            out.require(rel <= 0.05, "mode " + std::to_string(k) + " variance off by " + sci(rel));
        }

    const auto es127 = eigensystem(GridSpec(1.0, 127), 8);
    const auto r8 = validate_h1(noise_spec(42, 0.5, 500, 8.0), es127);
    const auto r4 = validate_h1(noise_spec(42, 0.5, 500, 4.0), es127);
    out.require(r8.pass && *r8.margin_gamma2_lambda2 > 0 && *r8.margin_gamma_lambda3 > 0, "r = 8 margins");
    out.require(!r4.pass, "r = 4 not rejected");

    const auto a = synthesize(noise_spec(42, 0.5, 500), GridSpec(1.0, 127), es127);
    const auto b = synthesize(noise_spec(42, 0.5, 500), GridSpec(1.0, 127), es127);
    out.require(a.values == b.values && a.brownian == b.brownian, "rerun not bit-identical");

    out.detail << (out.pass ? "" : "; ") << "worst variance rel err " << sci(worst) << ", r=8 margins "
               << *r8.margin_gamma2_lambda2 << '/' << *r8.margin_gamma_lambda3 << ", r=4 margin "
               << *r4.margin_gamma_lambda3;
}

// -- 9 ----------------------------------------------------------------------
void degenerate_cases(Outcome& out)
{
    const GridSpec g(1.0, 63);
    auto traj = solve_path(Field(g), std::make_shared<const NoisePath>(zero_noise(noise_spec(42, 0.5, 500), g)),
                           solver_config(1e-2, 1e-3, 0.5));
    bool zero = true;
    for (std::size_t n = 0; n < traj.x_fields.size(); ++n)
        zero = zero && traj.x_fields[n] == Field(g) && traj.y_fields[n] == Field(g);
    out.require(zero, "trajectory not identically zero");
    const auto z = make_test_process(std::vector<Field>(traj.times.size(), Field(g)), traj.times, *traj.noise, "zero");
    out.require(vi_residual(traj, z, Field(g), 0.0).scalar("max_residual") == 0.0, "VI residual with Z = 0");
    out.require(total_variation_diag(traj) == 0.0, "total variation");

    const auto es = eigensystem(g, 8);
    double worst = 0.0;
    for (const auto& m : es.modes) {
        const Field inv = neg_laplacian_inverse(m.vector);
        const Field res = laplacian_resolvent(1e-2, m.vector);
        for (std::size_t j = 0; j < g.n_interior(); ++j) {
            worst = std::max(worst, std::abs(inv[j] - m.vector[j] / m.eigenvalue));
            worst = std::max(worst, std::abs(res[j] - m.vector[j] / (1 + 1e-2 * m.eigenvalue)));
        }
        worst = std::max(worst, std::abs(norm_hminus1(m.vector) - 1 / std::sqrt(m.eigenvalue)));
        worst = std::max(worst, std::abs(norm_l2(m.vector) - 1.0));
    }
    NoiseSpec one = noise_spec(42, 0.5, 500);
    one.k_max = 1;
    one.gamma = GammaRule::explicit_list({0.7});
    const auto p = synthesize(one, g, es);
    double sup = 0.0;
    for (std::size_t n = 0; n < p.values.size(); ++n) {
        worst = std::max(worst, std::abs(norm_l2(p.values[n]) - 0.7 * std::abs(p.brownian[0][n])));
        sup = std::max(sup, 0.7 * std::abs(p.brownian[0][n]));
    }
    worst = std::max(worst, std::abs(sup_norm_estimate(p) - sup * norm_linf(es.mode(1).vector)));
    out.require(worst <= 1e-12, "single-mode identities off by " + sci(worst));
    out.detail << (out.pass ? "" : "; ") << "zero case exact, single-mode identities within " << sci(worst);
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"monotone-operator suite", monotone_operator_suite},
        {"grid oracle suite", grid_oracle_suite},
        {"Ito L2 bound", ito_bound},
        {"psi_eps L1 boundedness across epsilon", psi_l1_boundedness},
        {"epsilon-Cauchy in H^-1", epsilon_cauchy},
        {"variational-inequality residual", vi_refinement},
        {"implicit/explicit uniqueness proxy", uniqueness_proxy},
        {"noise correctness", noise_correctness},
        {"degenerate cases", degenerate_cases},
    };
    int failed = 0;
    int id = 0;
    for (const auto& [title, run] : criteria) {
        ++id;
        Outcome out;
        try {
            run(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " exception: " << e.what();
        }
        failed += out.pass ? 0 : 1;
        std::cout << "criterion " << id << ": " << (out.pass ? "PASS" : "FAIL") << "  " << title << "  ["
                  << out.detail.str() << "]" << std::endl;
    }
    return failed;
}
