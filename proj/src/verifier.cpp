#include "logdiff/verifier.hpp"
#include "logdiff/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace logdiff {

void Report::add_row(double t, double lhs, double rhs)
{
    ReportRow row{name, t, lhs, rhs, rhs - lhs, lhs <= rhs};
    pass = pass && row.pass;
    rows.push_back(std::move(row));
}

void Report::set_scalar(const std::string& key, double value)
{
    for (auto& [k, v] : scalars)
        if (k == key) {
            v = value;
            return;
        }
    scalars.emplace_back(key, value);
}

double Report::scalar(const std::string& key) const
{
    for (const auto& [k, v] : scalars)
        if (k == key)
            return v;
    throw std::out_of_range("report '" + name + "' has no scalar '" + key + "'");
}

double Report::min_margin() const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows)
        m = std::min(m, r.margin);
    return m;
}

void write_report_csv(std::ostream& out, const Report& report, bool header)
{
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    if (header)
        buf << "check_name,t,lhs,rhs,margin,pass\n";
    for (const auto& r : report.rows)
        buf << r.check << ',' << r.t << ',' << r.lhs << ',' << r.rhs << ',' << r.margin << ','
            << (r.pass ? 1 : 0) << '\n';
    out << buf.str();
}

std::string summary_text(const Report& report)
{
    std::ostringstream s;
    s.precision(6);
    s << report.name << ": " << (report.pass ? "PASS" : "FAIL") << " (tolerance " << report.tolerance;
    if (!report.rows.empty())
        s << ", min margin " << report.min_margin();
    s << ")\n";
    for (const auto& [k, v] : report.scalars)
        s << "  " << k << " = " << v << '\n';
    return s.str();
}

namespace {

// Cumulative trapezoid integral of f over times; out[0] = 0.
std::vector<double> cumulative_trapezoid(std::span<const double> f, std::span<const double> times)
{
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t n = 1; n < f.size(); ++n)
        out[n] = out[n - 1] + 0.5 * (times[n] - times[n - 1]) * (f[n - 1] + f[n]);
    return out;
}

double trapezoid(std::span<const double> f, std::span<const double> times)
{
    return f.empty() ? 0.0 : cumulative_trapezoid(f, times).back();
}

} // namespace

std::vector<double> squared_l2_series(const Trajectory& traj)
{
    std::vector<double> s;
    s.reserve(traj.x_fields.size());
    for (const auto& x : traj.x_fields)
        s.push_back(inner_l2(x, x));
    return s;
}

double ito_noise_rate(const NoiseSpec& spec, const EigenSystem& eigen)
{
    if (eigen.size() < spec.k_max)
        throw std::invalid_argument("eigen system has fewer modes than k_max");
    double rate = 0.0;
    for (std::size_t k = 1; k <= spec.k_max; ++k) {
        const double gk = spec.gamma(k);
        const double lk = eigen.mode(k).eigenvalue;
        rate += lk * lk * gk * gk;
    }
    return rate;
}

Report ito_l2_bound(std::span<const std::vector<double>> series, std::span<const double> times,
                    const Field& x0, const NoiseSpec& spec, const EigenSystem& eigen)
{
    const std::size_t M = series.size();
    if (M < kMinItoEnsemble)
        throw std::invalid_argument("ito_l2_bound needs at least " + std::to_string(kMinItoEnsemble) +
                                    " trajectories, got " + std::to_string(M));
    for (const auto& s : series)
        if (s.size() != times.size())
            throw std::invalid_argument("ensemble members have different time grids");

    const double rate = ito_noise_rate(spec, eigen);
    const double x_sq = inner_l2(x0, x0);

    Report rep;
    rep.name = "ito_l2_bound";
    rep.tolerance = 3.0;  // standard errors
    for (std::size_t n = 0; n < times.size(); ++n) {
        double mean = 0.0;
        for (const auto& s : series)
            mean += s[n];
        mean /= static_cast<double>(M);
        double var = 0.0;
        for (const auto& s : series)
            var += (s[n] - mean) * (s[n] - mean);
        var /= static_cast<double>(M - 1);
        const double stderr_ = std::sqrt(var / static_cast<double>(M));
        const double bound = x_sq + times[n] * rate;
        // rounding slack so that the exact equality at t = 0 is not a failure
        const double slack = 1e-12 * (1.0 + bound);
        rep.add_row(times[n], mean, bound + 3.0 * stderr_ + slack);
    }
    rep.set_scalar("ensemble_size", static_cast<double>(M));
    rep.set_scalar("noise_rate", rate);
    rep.set_scalar("initial_l2_sq", x_sq);
    rep.set_scalar("min_margin", rep.min_margin());
    return rep;
}

Report ito_l2_bound(std::span<const Trajectory> ensemble, const NoiseSpec& spec, const EigenSystem& eigen)
{
    if (ensemble.empty())
        throw std::invalid_argument("ito_l2_bound: empty ensemble");
    std::vector<std::vector<double>> series;
    series.reserve(ensemble.size());
    for (const auto& t : ensemble)
        series.push_back(squared_l2_series(t));
    return ito_l2_bound(series, ensemble.front().times, ensemble.front().y_fields.front(), spec, eigen);
}

double psi_l1_estimate(const Trajectory& traj)
{
    const RegularizationParam eps(traj.config.epsilon);
    std::vector<double> per_time;
    per_time.reserve(traj.x_fields.size());
    for (const auto& x : traj.x_fields) {
        double s = 0.0;
        for (double v : x.values())
            s += std::abs(psi_yosida(eps, v));
        per_time.push_back(traj.grid.h() * s);
    }
    return trapezoid(per_time, traj.times);
}

double total_variation_on(const Trajectory& traj, std::span<const std::size_t> partition)
{
    if (partition.size() < 2 || partition.front() != 0 || partition.back() != traj.n_steps())
        throw std::invalid_argument("partition must start at 0 and end at the last step");
    double tv = 0.0;
    for (std::size_t i = 1; i < partition.size(); ++i) {
        if (partition[i] <= partition[i - 1])
            throw std::invalid_argument("partition must be strictly increasing");
        const Field diff = traj.y_fields[partition[i]] - traj.y_fields[partition[i - 1]];
        tv += norm_hminus1(neg_laplacian_inverse(diff));
    }
    return tv;
}

double total_variation_diag(const Trajectory& traj)
{
    std::vector<std::size_t> all(traj.n_steps() + 1);
    for (std::size_t n = 0; n < all.size(); ++n)
        all[n] = n;
    if (all.size() < 2)
        return 0.0;
    return total_variation_on(traj, all);
}

double hminus1_sup_bound(const Trajectory& traj)
{
    double m = 0.0;
    for (const auto& y : traj.y_fields)
        m = std::max(m, inner_hminus1(y, y));
    return m;
}

Report bounded_ratio(const std::string& name, std::span<const double> labels,
                     std::span<const double> values, double max_ratio)
{
    if (values.empty() || labels.size() != values.size())
        throw std::invalid_argument("bounded_ratio: labels and values must be non-empty and aligned");
    Report rep;
    rep.name = name;
    rep.tolerance = max_ratio;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : values) {
        lo = std::min(lo, std::abs(v));
        hi = std::max(hi, std::abs(v));
    }
    for (std::size_t i = 0; i < values.size(); ++i)
        rep.add_row(labels[i], std::abs(values[i]), max_ratio * lo);
    // an all-zero family is trivially bounded
    if (hi == 0.0) {
        rep.pass = true;
        for (auto& r : rep.rows)
            r.pass = true;
    }
    rep.set_scalar("max", hi);
    rep.set_scalar("min", lo);
    rep.set_scalar("ratio", hi == 0.0 ? 1.0 : (lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo));
    return rep;
}

std::vector<Field> time_derivative(std::span<const Field> fields, std::span<const double> times)
{
    if (fields.size() != times.size() || fields.empty())
        throw std::invalid_argument("time_derivative: fields and times must be non-empty and aligned");
    const std::size_t N = fields.size() - 1;
    std::vector<Field> out;
    out.reserve(fields.size());
    if (N == 0) {
        out.emplace_back(fields[0].grid());
        return out;
    }
    for (std::size_t n = 0; n <= N; ++n) {
        const std::size_t a = n == 0 ? 0 : n - 1;
        const std::size_t b = n == N ? N : n + 1;
        out.push_back((1.0 / (times[b] - times[a])) * (fields[b] - fields[a]));
    }
    return out;
}

TestProcess make_test_process(std::vector<Field> z, std::vector<double> times, const NoisePath& noise,
                              std::string provenance)
{
    if (z.size() != times.size() || z.size() != noise.values.size())
        throw std::invalid_argument("test process and noise path have different time grids");

    TestProcess tp{std::move(times), std::move(z), {}, std::move(provenance), {}};
    tp.z_prime = time_derivative(tp.z_fields, tp.times);

    auto& adm = tp.admissibility;
    std::vector<double> zp_energy, g_vals, g_up;
    for (std::size_t n = 0; n < tp.z_fields.size(); ++n) {
        adm.sup_l2 = std::max(adm.sup_l2, norm_l2(tp.z_fields[n]));
        zp_energy.push_back(inner_hminus1(tp.z_prime[n], tp.z_prime[n]));
        const Field s = tp.z_fields[n] + noise.values[n];
        double gs = 0.0, sq = 0.0;
        for (double v : s.values()) {
            gs += g(v);
            sq += v * v;
        }
        g_vals.push_back(noise.grid.h() * gs);
        g_up.push_back(noise.grid.h() * sq);
    }
    adm.derivative_energy = trapezoid(zp_energy, tp.times);
    adm.g_integral = trapezoid(g_vals, tp.times);
    adm.g_upper = trapezoid(g_up, tp.times);

    if (!std::isfinite(adm.sup_l2))
        adm.failing_clause = "i";
    else if (!std::isfinite(adm.derivative_energy))
        adm.failing_clause = "ii";
    else if (!std::isfinite(adm.g_integral) || adm.g_integral > adm.g_upper * (1.0 + 1e-12) + 1e-300)
        adm.failing_clause = "iii";
    adm.admissible = adm.failing_clause.empty();
    if (!adm.admissible)
        throw InadmissibleTestProcess(adm.failing_clause);
    return tp;
}

TestProcess build_test_process(const Trajectory& traj, double mu)
{
    std::vector<Field> z;
    z.reserve(traj.y_fields.size());
    for (const auto& y : traj.y_fields)
        z.push_back(laplacian_resolvent(mu, y));
    std::ostringstream tag;
    tag << "J_mu of trajectory (mu=" << mu << ")";
    return make_test_process(std::move(z), traj.times, *traj.noise, tag.str());
}

TestProcess self_test_process(const Trajectory& traj)
{
    return make_test_process(traj.y_fields, traj.times, *traj.noise, "trajectory Y");
}

Report vi_residual(const Trajectory& traj, const TestProcess& z, const Field& x0, double tol_vi)
{
    const std::size_t T = traj.times.size();
    if (z.z_fields.size() != T || z.times != traj.times)
        throw std::invalid_argument("vi_residual: test process and trajectory time grids differ");
    if (!(z.z_fields.front().grid() == traj.grid) || !(x0.grid() == traj.grid))
        throw GridMismatch("vi_residual: fields live on different grids");

    const NoisePath& noise = *traj.noise;
    const double h = traj.grid.h();
    std::size_t violations = 0;
    auto g_integral = [&](const Field& f) {
        double s = 0.0;
        for (double v : f.values()) {
            const double gv = g(v);
            if (gv < 0.0 || gv > v * v)
                ++violations;
            s += gv;
        }
        return h * s;
    };

    std::vector<double> gx(T), gz(T), mixed(T), gap(T);
    for (std::size_t n = 0; n < T; ++n) {
        const Field& w = noise.values[n];
        const Field d = traj.x_fields[n] - w - z.z_fields[n];
        gx[n] = g_integral(traj.x_fields[n]);
        gz[n] = g_integral(z.z_fields[n] + w);
        mixed[n] = inner_hminus1(z.z_prime[n], d);
        gap[n] = 0.5 * inner_hminus1(d, d);
    }
    const auto Gx = cumulative_trapezoid(gx, traj.times);
    const auto Gz = cumulative_trapezoid(gz, traj.times);
    const auto Mx = cumulative_trapezoid(mixed, traj.times);
    const Field d0 = x0 - z.z_fields.front();
    const double initial = 0.5 * inner_hminus1(d0, d0);

    Report rep;
    rep.name = "vi_residual";
    rep.tolerance = tol_vi;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t n = 0; n < T; ++n) {
        const double lhs = gap[n] + Gx[n] + Mx[n];
        const double rhs = initial + Gz[n];
        worst = std::max(worst, lhs - rhs);
        rep.add_row(traj.times[n], lhs, rhs + tol_vi);
    }
    rep.set_scalar("max_residual", worst);
    rep.set_scalar("g_bound_violations", static_cast<double>(violations));
    rep.pass = rep.pass && violations == 0;
    return rep;
}

double uniqueness_distance(const Trajectory& a, const Trajectory& b)
{
    const Trajectory& fine = a.n_steps() >= b.n_steps() ? a : b;
    const Trajectory& coarse = a.n_steps() >= b.n_steps() ? b : a;
    if (!(a.grid == b.grid))
        throw GridMismatch("uniqueness_distance: trajectories live on different grids");
    if (coarse.n_steps() == 0 || fine.n_steps() % coarse.n_steps() != 0 ||
        std::abs(fine.times.back() - coarse.times.back()) > 1e-12 * std::max(1.0, fine.times.back()))
        throw std::invalid_argument("uniqueness_distance: time grids are not nested");
    if (!(a.y_fields.front() == b.y_fields.front()))
        throw std::invalid_argument("uniqueness_distance: trajectories start from different data");
    if (!a.noise || !b.noise || a.noise->spec.seed != b.noise->spec.seed)
        throw std::invalid_argument("uniqueness_distance: trajectories use different noise seeds");

    const std::size_t stride = fine.n_steps() / coarse.n_steps();
    double d = 0.0;
    for (std::size_t n = 0; n <= coarse.n_steps(); ++n) {
        if (!(fine.noise->values[n * stride] == coarse.noise->values[n]))
            throw std::invalid_argument("uniqueness_distance: noise paths differ at a common time");
        d = std::max(d, norm_hminus1(fine.x_fields[n * stride] - coarse.x_fields[n]));
    }
    return d;
}

std::pair<double, double> l4_record(const Trajectory& traj)
{
    double mx = 0.0;
    std::vector<double> quartic;
    for (const auto& x : traj.x_fields) {
        const double n4 = norm_lp(x, 4.0);
        mx = std::max(mx, n4);
        quartic.push_back(n4 * n4 * n4 * n4);
    }
    return {mx, trapezoid(quartic, traj.times)};
}

} // namespace logdiff
