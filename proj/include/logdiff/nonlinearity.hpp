#ifndef LOGDIFF_NONLINEARITY_HPP
#define LOGDIFF_NONLINEARITY_HPP

#include <stdexcept>

namespace logdiff {

/// Yosida parameter epsilon > 0.
class RegularizationParam
{
public:
    explicit RegularizationParam(double epsilon);
    double value() const { return eps_; }

private:
    double eps_;
};

/// Psi(x) = sign(x) ln(|x| + 1), with the selection Psi(0) = 0.
double psi(double x);

/// Psi'(x) = 1/(|x| + 1).
double psi_derivative(double x);

/// Convex potential g(x) = (|x|+1) ln(|x|+1) - |x|, with g' = Psi.
double g(double x);

/// Solves y + eps*Psi(y) = x. Safeguarded Newton on the bracket between 0 and x.
double psi_resolvent(RegularizationParam eps, double x);

/// Yosida approximation Psi_eps(x) = (x - J_eps x)/eps, evaluated as Psi(J_eps x).
double psi_yosida(RegularizationParam eps, double x);

/// d/dx Psi_eps(x) = Psi'(J)/(1 + eps Psi'(J)).
double psi_yosida_derivative(RegularizationParam eps, double x);

/// Psi_eps(x) + eps*x.
double psi_bar(RegularizationParam eps, double x);
double psi_bar_derivative(RegularizationParam eps, double x);

/// Moreau-Yosida envelope g_eps(x) = (x - J)^2/(2 eps) + g(J).
double g_moreau(RegularizationParam eps, double x);

/// g_eps(x) + eps x^2/2, the potential of psi_bar.
double g_bar(RegularizationParam eps, double x);

/// Everything the Newton solver needs from one resolvent evaluation.
struct YosidaPoint
{
    double resolvent;   // J_eps(x)
    double value;       // Psi_eps(x)
    double derivative;  // Psi_eps'(x)
};

YosidaPoint yosida_point(RegularizationParam eps, double x);

class ResolventFailure : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace logdiff

#endif // LOGDIFF_NONLINEARITY_HPP
