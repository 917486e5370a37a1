#include "logdiff/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace logdiff {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
    if (used != v.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + v + "'");
    return d;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& v)
{
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': integer out of range '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::istringstream s(v);
    std::string item;
    while (std::getline(s, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v)
{
    std::vector<double> out;
    for (const auto& item : split_list(v))
        out.push_back(to_double(key, item));
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::map<std::string, Setter> make_setters(const std::filesystem::path& base)
{
    return {
        {"grid.length", [](auto& c, auto& v) { c.length = to_double("length", v); }},
        {"grid.n_interior", [](auto& c, auto& v) { c.n_interior = to_unsigned("n_interior", v); }},

        {"noise.k_max", [](auto& c, auto& v) { c.k_max = to_unsigned("k_max", v); }},
        {"noise.gamma0", [](auto& c, auto& v) { c.gamma0 = to_double("gamma0", v); }},
        {"noise.decay", [](auto& c, auto& v) { c.decay = to_double("decay", v); }},
        {"noise.gammas", [](auto& c, auto& v) { c.gammas = to_double_list("gammas", v); }},
        {"noise.seed", [](auto& c, auto& v) { c.seed = to_unsigned("seed", v); }},
        {"noise.n_paths", [](auto& c, auto& v) { c.n_paths = to_unsigned("n_paths", v); }},
        {"noise.alpha", [](auto& c, auto& v) { c.alpha = to_double("alpha", v); }},
        {"noise.override_h1", [](auto& c, auto& v) { c.override_h1 = to_bool("override_h1", v); }},

        {"solver.epsilon", [](auto& c, auto& v) { c.epsilon = to_double("epsilon", v); }},
        {"solver.epsilons", [](auto& c, auto& v) { c.epsilons = to_double_list("epsilons", v); }},
        {"solver.dt", [](auto& c, auto& v) { c.dt = to_double("dt", v); }},
        {"solver.t_final", [](auto& c, auto& v) { c.t_final = to_double("t_final", v); }},
        {"solver.scheme",
         [](auto& c, auto& v) {
             try {
                 c.scheme = parse_scheme(v);
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(e.what());
             }
         }},
        {"solver.newton_tol", [](auto& c, auto& v) { c.newton_tol = to_double("newton_tol", v); }},
        {"solver.newton_max_iter",
         [](auto& c, auto& v) { c.newton_max_iter = static_cast<int>(to_unsigned("newton_max_iter", v)); }},
        {"solver.retry_budget",
         [](auto& c, auto& v) { c.retry_budget = static_cast<int>(to_unsigned("retry_budget", v)); }},

        {"initial.profile", [](auto& c, auto& v) { c.profile = v; }},
        {"initial.amplitude", [](auto& c, auto& v) { c.amplitude = to_double("amplitude", v); }},
        {"initial.mode", [](auto& c, auto& v) { c.mode = to_unsigned("mode", v); }},
        {"initial.file",
         [base](auto& c, auto& v) {
             std::filesystem::path p(v);
             c.file = p.is_absolute() ? p : base / p;
         }},

        {"verify.checks", [](auto& c, auto& v) { c.checks = split_list(v); }},
        {"verify.mu", [](auto& c, auto& v) { c.mu = to_double("mu", v); }},
        {"verify.tol_vi_constant", [](auto& c, auto& v) { c.tol_vi_constant = to_double("tol_vi_constant", v); }},
        {"verify.ratio_max", [](auto& c, auto& v) { c.ratio_max = to_double("ratio_max", v); }},
        {"verify.bound_epsilons", [](auto& c, auto& v) { c.bound_epsilons = to_double_list("bound_epsilons", v); }},
        {"verify.bound_paths", [](auto& c, auto& v) { c.bound_paths = to_unsigned("bound_paths", v); }},

        {"output.directory", [](auto& c, auto& v) { c.directory = v; }},
        {"output.dump_trajectories", [](auto& c, auto& v) { c.dump_trajectories = to_bool("dump_trajectories", v); }},
        {"output.workers", [](auto& c, auto& v) { c.workers = to_unsigned("workers", v); }},
    };
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    const auto table = make_setters(base_dir);
    std::set<std::string> sections;
    for (const auto& [key, _] : table)
        sections.insert(key.substr(0, key.find('.')));

    std::set<std::string> seen;
    std::string section, raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';')
            continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + "malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            if (!sections.count(section))
                throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + "expected key = value, got '" + line + "'");
        if (section.empty())
            throw ConfigError(where + "key outside of any section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (const auto hash = value.find(" #"); hash != std::string::npos)
            value = trim(value.substr(0, hash));

        const auto it = table.find(key);
        if (it == table.end())
            throw ConfigError(where + "unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError(where + "duplicate key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot open config file '" + file.string() + "'");
    return parse_config(in, file.has_parent_path() ? file.parent_path() : std::filesystem::path("."));
}

GridSpec ExperimentConfig::grid() const
{
    return GridSpec(length, n_interior);
}

NoiseSpec ExperimentConfig::noise_spec(std::size_t path) const
{
    NoiseSpec s;
    s.k_max = k_max;
    s.gamma = gammas ? GammaRule::explicit_list(*gammas) : GammaRule::power_law(gamma0, decay);
    s.seed = seed + path;
    s.t_final = t_final;
    s.n_steps = solver().n_steps();
    return s;
}

SolverConfig ExperimentConfig::solver(double eps) const
{
    SolverConfig c;
    c.epsilon = eps;
    c.dt = dt;
    c.t_final = t_final;
    c.newton_tol = newton_tol;
    c.newton_max_iter = newton_max_iter;
    c.retry_budget = retry_budget;
    c.scheme = scheme;
    return c;
}

Field read_field_file(const std::filesystem::path& file, const GridSpec& grid)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot open initial datum file '" + file.string() + "'");
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#')
            continue;
        v.push_back(to_double("initial.file", line));
    }
    if (v.size() != grid.n_interior())
        throw ConfigError("initial datum file has " + std::to_string(v.size()) + " values, grid has " +
                          std::to_string(grid.n_interior()) + " interior nodes");
    return Field(grid, std::move(v));
}

Field ExperimentConfig::initial_datum() const
{
    const GridSpec g = grid();
    if (profile == "zero")
        return Field(g);
    if (profile == "bump") {
        const double L = length;
        return Field::sample(g, [&](double xi) { return amplitude * xi * (L - xi); });
    }
    if (profile == "mode")
        return amplitude * eigensystem(g, mode).mode(mode).vector;
    if (profile == "file")
        return read_field_file(file, g);
    throw ConfigError("unknown initial profile '" + profile + "'");
}

void ExperimentConfig::validate() const
{
    try {
        const GridSpec g = grid();
        solver().validate();
        for (double e : epsilons)
            solver(e).validate();
        for (double e : bound_epsilons)
            solver(e).validate();
        noise_spec().validate();
        if (k_max > g.n_interior())
            throw ConfigError("k_max exceeds n_interior");
        if (profile == "mode" && (mode < 1 || mode > g.n_interior()))
            throw ConfigError("initial mode index out of range");
        if (profile == "file" && !std::filesystem::exists(file))
            throw ConfigError("initial datum file '" + file.string() + "' does not exist");
        if (profile != "zero" && profile != "bump" && profile != "mode" && profile != "file")
            throw ConfigError("unknown initial profile '" + profile + "'");
        if (!std::isfinite(amplitude))
            throw ConfigError("amplitude must be finite");
        if (!(alpha > 0.0))
            throw ConfigError("alpha must be positive");
        if (!(mu > 0.0))
            throw ConfigError("mu must be positive");
        if (!(tol_vi_constant >= 0.0))
            throw ConfigError("tol_vi_constant must be >= 0");
        if (!(ratio_max >= 1.0))
            throw ConfigError("ratio_max must be >= 1");
        if (workers < 1)
            throw ConfigError("workers must be >= 1");
        static const std::set<std::string> known{"ito_l2_bound", "psi_l1_estimate", "vi_residual",
                                                 "total_variation", "hminus1_sup_bound"};
        for (const auto& c : checks)
            if (!known.count(c))
                throw ConfigError("unknown check '" + c + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

} // namespace logdiff
