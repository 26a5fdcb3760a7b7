#include "netpolicy/special_functions.hpp"

#include <cmath>
#include <limits>

#include "netpolicy/errors.hpp"

namespace netpolicy {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for I_x(a,b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    require(a > 0.0 && b > 0.0, "incomplete beta needs positive shape parameters");
    require(x >= 0.0 && x <= 1.0, "incomplete beta argument must lie in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_fraction(a, b, x) / a;
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double inverse_incomplete_beta(double a, double b, double y) {
    require(a > 0.0 && b > 0.0, "incomplete beta needs positive shape parameters");
    require(y >= 0.0 && y <= 1.0, "target probability must lie in [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 1.0;
    const double lb = log_beta(a, b);
    double lo = 0.0, hi = 1.0, x = 0.5;
    // Bisection in the bulk, Newton near the root.
    for (int it = 0; it < 200; ++it) {
        double f = incomplete_beta(a, b, x) - y;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
        double step = f / std::exp(log_pdf);
        double next = x - step;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(x, 1e-300)) return next;
        if (hi - lo <= std::numeric_limits<double>::min()) return next;
        x = next;
    }
    return x;
}

double student_t_cdf(double df, double t) {
    require(df > 0.0, "degrees of freedom must be positive");
    if (t == 0.0) return 0.5;
    double x = df / (df + t * t);
    double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

}  // namespace netpolicy
