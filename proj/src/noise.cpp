#include "logdiff/noise.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace logdiff {

GammaRule GammaRule::power_law(double gamma0, double decay)
{
    GammaRule r;
    r.gamma0 = gamma0;
    r.decay = decay;
    return r;
}

GammaRule GammaRule::explicit_list(std::vector<double> values)
{
    GammaRule r;
    r.explicit_values = std::move(values);
    return r;
}

double GammaRule::operator()(std::size_t k) const
{
    if (explicit_values) {
        const auto& v = *explicit_values;
        return k >= 1 && k <= v.size() ? v[k - 1] : 0.0;
    }
    return gamma0 * std::pow(static_cast<double>(k), -decay);
}

GammaRule GammaRule::scaled(double c) const
{
    GammaRule r = *this;
    if (r.explicit_values)
        for (double& v : *r.explicit_values)
            v *= c;
    else
        r.gamma0 *= c;
    return r;
}

void NoiseSpec::validate() const
{
    if (k_max < 1)
        throw std::invalid_argument("noise k_max must be >= 1");
    if (n_steps < 1)
        throw std::invalid_argument("noise n_steps must be >= 1");
    if (!(t_final > 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("noise t_final must be positive");
    if (gamma.explicit_values) {
        for (double v : *gamma.explicit_values)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("explicit gamma values must be finite and >= 0");
    } else {
        if (!(gamma.gamma0 >= 0.0) || !std::isfinite(gamma.gamma0))
            throw std::invalid_argument("gamma0 must be finite and >= 0");
        if (!std::isfinite(gamma.decay))
            throw std::invalid_argument("gamma decay exponent must be finite");
    }
}

H1Report validate_h1(const NoiseSpec& spec, const EigenSystem& eigen)
{
    spec.validate();
    if (eigen.size() < spec.k_max)
        throw std::invalid_argument("eigen system has fewer modes than k_max");

    H1Report rep;
    bool any_nonzero = false;
    for (std::size_t k = 1; k <= spec.k_max; ++k) {
        const double gk = spec.gamma(k);
        const double lk = eigen.mode(k).eigenvalue;
        rep.sum_gamma2_lambda2 += gk * gk * lk * lk;
        rep.sum_gamma_lambda3 += gk * lk * lk * lk;
        any_nonzero = any_nonzero || gk != 0.0;
    }
    rep.deterministic = !any_nonzero;

    const bool finite = std::isfinite(rep.sum_gamma2_lambda2) && std::isfinite(rep.sum_gamma_lambda3);
    if (spec.gamma.is_power_law()) {
        // gamma_k^2 lambda_k^2 ~ k^(4-2r), gamma_k lambda_k^3 ~ k^(6-r); a
        // series k^p converges iff p < -1.
        const double r = spec.gamma.decay;
        rep.margin_gamma2_lambda2 = -1.0 - (4.0 - 2.0 * r);
        rep.margin_gamma_lambda3 = -1.0 - (6.0 - r);
    }
    if (rep.deterministic)
        rep.pass = true;
    else if (rep.margin_gamma2_lambda2)
        rep.pass = finite && *rep.margin_gamma2_lambda2 > 0.0 && *rep.margin_gamma_lambda3 > 0.0;
    else
        rep.pass = finite;
    return rep;
}

std::uint64_t mode_seed(std::uint64_t master, std::size_t k)
{
    // splitmix64 finalizer applied to the master seed offset by the mode index
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(k);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

NoisePath synthesize(const NoiseSpec& spec, const GridSpec& grid, const EigenSystem& eigen,
                     bool override_h1)
{
    spec.validate();
    if (spec.k_max > grid.n_interior())
        throw std::invalid_argument("k_max exceeds the number of representable modes");
    if (eigen.size() < spec.k_max || !(eigen.grid == grid))
        throw std::invalid_argument("eigen system does not cover k_max modes on this grid");
    if (!override_h1 && !validate_h1(spec, eigen).pass)
        throw std::invalid_argument("gamma sequence fails the trace conditions; pass override_h1 to synthesize anyway");

    const std::size_t N = spec.n_steps;
    const double sqrt_dt = std::sqrt(spec.dt());

    NoisePath path{spec, grid, {}, {}};
    path.brownian.assign(spec.k_max, std::vector<double>(N + 1, 0.0));
    for (std::size_t k = 1; k <= spec.k_max; ++k) {
        std::mt19937_64 rng(mode_seed(spec.seed, k));
        std::normal_distribution<double> normal(0.0, 1.0);
        auto& beta = path.brownian[k - 1];
        for (std::size_t n = 0; n < N; ++n)
            beta[n + 1] = beta[n] + sqrt_dt * normal(rng);
    }

    std::vector<double> gam(spec.k_max);
    for (std::size_t k = 1; k <= spec.k_max; ++k)
        gam[k - 1] = spec.gamma(k);

    path.values.reserve(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        std::vector<double> w(grid.n_interior(), 0.0);
        for (std::size_t k = 0; k < spec.k_max; ++k) {
            const double a = gam[k] * path.brownian[k][n];
            if (a == 0.0)
                continue;
            const auto e = eigen.modes[k].vector.values();
            for (std::size_t j = 0; j < w.size(); ++j)
                w[j] += a * e[j];
        }
        path.values.emplace_back(grid, std::move(w));
    }
    return path;
}

NoisePath zero_noise(const NoiseSpec& spec, const GridSpec& grid)
{
    NoiseSpec s = spec;
    s.gamma = GammaRule::explicit_list({});
    s.validate();
    NoisePath path{s, grid, {}, {}};
    path.brownian.assign(s.k_max, std::vector<double>(s.n_steps + 1, 0.0));
    path.values.assign(s.n_steps + 1, Field(grid));
    return path;
}

NoisePath restrict_time(const NoisePath& path, std::size_t stride)
{
    const std::size_t N = path.n_steps();
    if (stride < 1 || N % stride != 0)
        throw std::invalid_argument("stride must divide the number of time steps");

    NoisePath out{path.spec, path.grid, {}, {}};
    out.spec.n_steps = N / stride;
    for (std::size_t n = 0; n <= N; n += stride)
        out.values.push_back(path.values[n]);
    out.brownian.resize(path.brownian.size());
    for (std::size_t k = 0; k < path.brownian.size(); ++k)
        for (std::size_t n = 0; n <= N; n += stride)
            out.brownian[k].push_back(path.brownian[k][n]);
    return out;
}

double sup_norm_estimate(const NoisePath& path)
{
    double m = 0.0;
    for (const auto& w : path.values)
        m = std::max(m, norm_linf(w));
    return m;
}

double cell_oscillation(const NoisePath& path, std::size_t first, std::size_t last)
{
    const std::size_t n = path.grid.n_interior();
    double osc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double lo = path.values[first][j], hi = lo;
        for (std::size_t t = first + 1; t <= last; ++t) {
            lo = std::min(lo, path.values[t][j]);
            hi = std::max(hi, path.values[t][j]);
        }
        osc = std::max(osc, hi - lo);
    }
    return osc;
}

TimeGridTooCoarse::TimeGridTooCoarse(std::size_t step, double oscillation, double alpha)
    : std::runtime_error("one time step (" + std::to_string(step) + " -> " + std::to_string(step + 1) +
                         ") already oscillates by " + std::to_string(oscillation) +
                         " >= alpha = " + std::to_string(alpha) + "; refine the time grid"),
      step_(step), oscillation_(oscillation)
{
}

std::vector<std::size_t> modulus_of_continuity(const NoisePath& path, double alpha)
{
    if (!(alpha > 0.0))
        throw std::invalid_argument("alpha must be positive");

    const std::size_t N = path.n_steps();
    const std::size_t nodes = path.grid.n_interior();
    std::vector<std::size_t> cuts{0};
    std::vector<double> lo(path.values[0].values().begin(), path.values[0].values().end());
    std::vector<double> hi = lo;

    auto absorb = [&](std::size_t t) {
        double osc = 0.0;
        for (std::size_t j = 0; j < nodes; ++j) {
            lo[j] = std::min(lo[j], path.values[t][j]);
            hi[j] = std::max(hi[j], path.values[t][j]);
            osc = std::max(osc, hi[j] - lo[j]);
        }
        return osc;
    };

    std::size_t start = 0;
    for (std::size_t t = 1; t <= N; ++t) {
        if (absorb(t) < alpha)
            continue;
        if (t - 1 == start)
            throw TimeGridTooCoarse(start, cell_oscillation(path, start, t), alpha);
        // close the cell at t-1 and restart from there
        start = t - 1;
        cuts.push_back(start);
        lo.assign(path.values[start].values().begin(), path.values[start].values().end());
        hi = lo;
        const double osc = absorb(t);
        if (osc >= alpha)
            throw TimeGridTooCoarse(start, osc, alpha);
    }
    cuts.push_back(N);
    return cuts;
}

void write_noise_csv(std::ostream& out, const NoisePath& path)
{
    std::ostringstream buf;
    buf.precision(std::numeric_limits<double>::max_digits10);
    buf << "step,time,node,value\n";
    for (std::size_t n = 0; n < path.values.size(); ++n)
        for (std::size_t j = 0; j < path.grid.n_interior(); ++j)
            buf << n << ',' << path.time(n) << ',' << (j + 1) << ',' << path.values[n][j] << '\n';
    out << buf.str();
}

NoisePath read_noise_csv(std::istream& in, const NoiseSpec& spec, const GridSpec& grid,
                         const EigenSystem& eigen)
{
    spec.validate();
    std::string line;
    if (!std::getline(in, line) || line != "step,time,node,value")
        throw std::runtime_error("noise CSV: missing or unexpected header");

    const std::size_t N = spec.n_steps;
    const std::size_t nodes = grid.n_interior();
    std::vector<std::vector<double>> vals(N + 1, std::vector<double>(nodes, 0.0));
    std::vector<std::vector<bool>> seen(N + 1, std::vector<bool>(nodes, false));
    std::size_t count = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream row(line);
        std::string a, b, c, d;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
            !std::getline(row, c, ',') || !std::getline(row, d))
            throw std::runtime_error("noise CSV: malformed row '" + line + "'");
        const std::size_t n = std::stoul(a);
        const std::size_t node = std::stoul(c);
        if (n > N || node < 1 || node > nodes || seen[n][node - 1])
            throw std::runtime_error("noise CSV: row out of range or duplicated: '" + line + "'");
        vals[n][node - 1] = std::stod(d);
        seen[n][node - 1] = true;
        ++count;
    }
    if (count != (N + 1) * nodes)
        throw std::runtime_error("noise CSV: expected " + std::to_string((N + 1) * nodes) +
                                 " rows, got " + std::to_string(count));

    NoisePath path{spec, grid, {}, {}};
    for (auto& v : vals)
        path.values.emplace_back(grid, std::move(v));
    path.brownian.assign(spec.k_max, std::vector<double>(N + 1, 0.0));
    for (std::size_t k = 1; k <= spec.k_max && k <= eigen.size(); ++k) {
        const double gk = spec.gamma(k);
        if (gk == 0.0)
            continue;
        for (std::size_t n = 0; n <= N; ++n)
            path.brownian[k - 1][n] = inner_l2(path.values[n], eigen.mode(k).vector) / gk;
    }
    return path;
}

} // namespace logdiff
