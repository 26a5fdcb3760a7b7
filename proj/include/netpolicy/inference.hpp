#pragma once

#include <cstddef>
#include <span>

namespace netpolicy {

enum class Sided { two, one_greater, one_less };

struct TestResult {
    double statistic = 0.0;
    int degrees_freedom = 0;
    double alpha = 0.0;
    double critical_value = 0.0;
    bool reject = false;
    Sided sided = Sided::two;
    int coords_tested = 1;
    // alpha > 0.08 with several coordinates: the level guarantee does not hold.
    bool level_warning = false;
};

// sqrt(G) * mean / sd with divisor G - 1. Throws DegenerateStatistic when sd = 0.
double t_statistic(std::span<const double> pair_values);

// Student-t inverse CDF.
double t_quantile(int df, double prob);

// Two-sided critical value at level 1 - (1 - alpha)^(1/l) with K/(2l) - 1
// degrees of freedom.
double multi_coord_critical_value(int clusters, int coords, double alpha);

// coords = 1: t test on pair_values. coords = l > 1: pair_values are grouped
// by coordinate in consecutive blocks of equal size and the statistic is
// max_j |Q_j|.
TestResult policy_optimality_test(std::span<const double> pair_values, double alpha, Sided sided = Sided::two,
                                  int coords = 1);

}  // namespace netpolicy
