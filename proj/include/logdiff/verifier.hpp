#ifndef LOGDIFF_VERIFIER_HPP
#define LOGDIFF_VERIFIER_HPP

#include "logdiff/grid.hpp"
#include "logdiff/noise.hpp"
#include "logdiff/solver.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace logdiff {

struct ReportRow
{
    std::string check;
    double t = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs; the row passes iff margin >= 0
    bool pass = true;
};

/// Outcome of one numerical check. Every row records both sides of its
/// inequality; `tolerance` is whatever slack was folded into the rhs.
struct Report
{
    std::string name;
    double tolerance = 0.0;
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, double>> scalars;
    bool pass = true;

    void add_row(double t, double lhs, double rhs);
    void set_scalar(const std::string& key, double value);
    double scalar(const std::string& key) const;
    double min_margin() const;
};

/// Header: check_name,t,lhs,rhs,margin,pass
void write_report_csv(std::ostream& out, const Report& report, bool header = true);
std::string summary_text(const Report& report);

// -- Ito L2 bound -----------------------------------------------------------

/// |X(t_n)|_2^2 along one trajectory.
std::vector<double> squared_l2_series(const Trajectory& traj);

/// sum_{k<=K} lambda_k^2 gamma_k^2
double ito_noise_rate(const NoiseSpec& spec, const EigenSystem& eigen);

/// Checks mean_m |X_m(t_n)|^2 <= |x|^2 + t_n*rate + 3*stderr at every t_n.
/// Needs at least 30 series.
Report ito_l2_bound(std::span<const std::vector<double>> series, std::span<const double> times,
                    const Field& x0, const NoiseSpec& spec, const EigenSystem& eigen);
Report ito_l2_bound(std::span<const Trajectory> ensemble, const NoiseSpec& spec, const EigenSystem& eigen);

inline constexpr std::size_t kMinItoEnsemble = 30;

// -- a-priori quantities ----------------------------------------------------

/// int_0^T int_O |Psi_eps(Y + sqrt(Q)W)|, rectangle rule in space and
/// trapezoid rule in time.
double psi_l1_estimate(const Trajectory& traj);

/// sum_n |(-Delta_h)^{-1}(Y(t_{n+1}) - Y(t_n))|_{-1} over the full grid.
double total_variation_diag(const Trajectory& traj);
/// Same sum restricted to a sub-partition of time indices (first 0, last N).
double total_variation_on(const Trajectory& traj, std::span<const std::size_t> partition);

/// max_n |Y(t_n)|_{-1}^2
double hminus1_sup_bound(const Trajectory& traj);

/// Checks max/min <= max_ratio for a family of values indexed by labels.
/// An all-zero family passes.
Report bounded_ratio(const std::string& name, std::span<const double> labels,
                     std::span<const double> values, double max_ratio);

// -- Test processes and the variational inequality --------------------------

struct Admissibility
{
    double sup_l2 = 0.0;           // i)   max_n |Z(t_n)|_2
    double derivative_energy = 0.0;// ii)  sum dt |Z'|_{-1}^2
    double g_integral = 0.0;       // iii) int int g(Z + sqrt(Q)W)
    double g_upper = 0.0;          //      int int (Z + sqrt(Q)W)^2 >= g_integral
    bool admissible = false;
    std::string failing_clause;
};

struct TestProcess
{
    std::vector<double> times;
    std::vector<Field> z_fields;
    std::vector<Field> z_prime;
    std::string provenance;
    Admissibility admissibility;
};

class InadmissibleTestProcess : public std::runtime_error
{
public:
    InadmissibleTestProcess(const std::string& clause)
        : std::runtime_error("test process fails admissibility clause " + clause), clause_(clause) {}
    const std::string& clause() const { return clause_; }

private:
    std::string clause_;
};

/// Centered differences in the interior, one-sided at both ends.
std::vector<Field> time_derivative(std::span<const Field> fields, std::span<const double> times);

/// Wraps arbitrary Z(t_n) values; throws InadmissibleTestProcess if a
/// clause evaluates to a non-finite quantity.
TestProcess make_test_process(std::vector<Field> z, std::vector<double> times, const NoisePath& noise,
                              std::string provenance);

/// Z = (I - mu Delta_h)^{-1} Y_eps.
TestProcess build_test_process(const Trajectory& traj, double mu);

/// Z = Y_eps itself.
TestProcess self_test_process(const Trajectory& traj);

/// Per-time LHS - RHS of the variational inequality defining a solution.
/// Rows carry lhs/rhs; the report passes when max_n (lhs - rhs) <= tol_vi.
/// Scalars: max_residual, g_bound_violations.
Report vi_residual(const Trajectory& traj, const TestProcess& z, const Field& x0, double tol_vi);

/// sup over common times of |X_a - X_b|_{-1}. The trajectories must share
/// the initial datum and noise path; one time grid must refine the other.
double uniqueness_distance(const Trajectory& a, const Trajectory& b);

/// max_n |X(t_n)|_4 and the space-time integral of X^4 (recorded only).
std::pair<double, double> l4_record(const Trajectory& traj);

} // namespace logdiff

#endif // LOGDIFF_VERIFIER_HPP
