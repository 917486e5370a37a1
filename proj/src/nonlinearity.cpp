#include "logdiff/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace logdiff {

RegularizationParam::RegularizationParam(double epsilon) : eps_(epsilon)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw std::invalid_argument("epsilon must be positive and finite");
}

double psi(double x)
{
    if (x == 0.0)
        return 0.0;
    return std::copysign(std::log1p(std::abs(x)), x);
}

double psi_derivative(double x)
{
    return 1.0 / (std::abs(x) + 1.0);
}

double g(double x)
{
    const double a = std::abs(x);
    return (a + 1.0) * std::log1p(a) - a;
}

namespace {

constexpr int kMaxResolventIterations = 100;

// Root of y + eps*ln(1+y) = a on [0, a], a >= 0.
double positive_resolvent(double eps, double a)
{
    if (a == 0.0)
        return 0.0;

    double lo = 0.0, hi = a, y = a;
    for (int it = 0; it < kMaxResolventIterations; ++it) {
        const double f = y + eps * std::log1p(y) - a;
        if (f == 0.0)
            return y;
        if (f > 0.0)
            hi = y;
        else
            lo = y;

        double next = y - f / (1.0 + eps / (1.0 + y));
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        const double step = std::abs(next - y);
        y = next;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon() * y || hi - lo <= 0.0)
            break;
    }

    const double residual = std::abs(y + eps * std::log1p(y) - a);
    if (residual > 1e-12 * std::max(1.0, a))
        throw ResolventFailure("resolvent did not converge for x = " + std::to_string(a) +
                               ", residual " + std::to_string(residual));
    return y;
}

} // namespace

double psi_resolvent(RegularizationParam eps, double x)
{
    if (!std::isfinite(x))
        throw std::invalid_argument("psi_resolvent: non-finite argument");
    return std::copysign(positive_resolvent(eps.value(), std::abs(x)), x);
}

YosidaPoint yosida_point(RegularizationParam eps, double x)
{
    const double e = eps.value();
    const double j = psi_resolvent(eps, x);
    const double d = psi_derivative(j);
    // Psi(J) equals (x - J)/eps but does not cancel when eps is small.
    return YosidaPoint{j, psi(j), d / (1.0 + e * d)};
}

double psi_yosida(RegularizationParam eps, double x)
{
    return yosida_point(eps, x).value;
}

double psi_yosida_derivative(RegularizationParam eps, double x)
{
    return yosida_point(eps, x).derivative;
}

double psi_bar(RegularizationParam eps, double x)
{
    return psi_yosida(eps, x) + eps.value() * x;
}

double psi_bar_derivative(RegularizationParam eps, double x)
{
    return psi_yosida_derivative(eps, x) + eps.value();
}

double g_moreau(RegularizationParam eps, double x)
{
    // (x - J)^2/(2 eps) written as eps*Psi(J)^2/2, which avoids the
    // cancellation in x - J for small eps.
    const double j = psi_resolvent(eps, x);
    const double p = psi(j);
    return 0.5 * eps.value() * p * p + g(j);
}

double g_bar(RegularizationParam eps, double x)
{
    return g_moreau(eps, x) + 0.5 * eps.value() * x * x;
}

} // namespace logdiff
