#pragma once

namespace netpolicy {

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// x with I_x(a, b) = y; safeguarded Newton iteration on a bisection bracket.
double inverse_incomplete_beta(double a, double b, double y);

double student_t_cdf(double df, double t);

}  // namespace netpolicy
