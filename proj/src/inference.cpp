#include "netpolicy/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netpolicy/errors.hpp"
#include "netpolicy/special_functions.hpp"

namespace netpolicy {

double t_statistic(std::span<const double> v) {
    require(v.size() >= 2, "the t statistic needs at least two pair estimates");
    const double g = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / g;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (g - 1.0));
    if (!(sd > 0.0)) throw DegenerateStatistic("pair estimates have zero sample variance");
    return std::sqrt(g) * mean / sd;
}

double t_quantile(int df, double prob) {
    require(df >= 1, "degrees of freedom must be at least 1");
    require(prob > 0.0 && prob < 1.0, "probability must lie strictly between 0 and 1");
    if (prob == 0.5) return 0.0;
    // Tail mass on the quantile's side; 1 - prob is exact for prob >= 0.5.
    const double tail = prob < 0.5 ? prob : 1.0 - prob;
    const double nu = static_cast<double>(df);
    double magnitude;
    if (2.0 * tail < 0.5) {
        // Far tail: solve I_x(nu/2, 1/2) = 2 tail with x = nu / (nu + t^2).
        double x = inverse_incomplete_beta(0.5 * nu, 0.5, 2.0 * tail);
        magnitude = std::sqrt(nu * (1.0 - x) / x);
    } else {
        // Near the centre: z = t^2 / (nu + t^2) keeps precision.
        double z = inverse_incomplete_beta(0.5, 0.5 * nu, 1.0 - 2.0 * tail);
        magnitude = std::sqrt(nu * z / (1.0 - z));
    }
    return prob < 0.5 ? -magnitude : magnitude;
}

double multi_coord_critical_value(int clusters, int coords, double alpha) {
    require(coords >= 1, "at least one coordinate must be tested");
    require(clusters >= 4 * coords, "need K >= 4 l clusters");
    require(clusters % (2 * coords) == 0, "K must split into l equal groups of pairs");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    const int df = clusters / (2 * coords) - 1;
    const double level = coords == 1 ? alpha : 1.0 - std::pow(1.0 - alpha, 1.0 / coords);
    return t_quantile(df, 1.0 - level / 2.0);
}

TestResult policy_optimality_test(std::span<const double> v, double alpha, Sided sided, int coords) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(coords >= 1, "at least one coordinate must be tested");
    TestResult r;
    r.alpha = alpha;
    r.sided = sided;
    r.coords_tested = coords;
    if (coords == 1) {
        require(v.size() >= 2, "need at least two pair estimates");
        r.statistic = t_statistic(v);
        r.degrees_freedom = static_cast<int>(v.size()) - 1;
        switch (sided) {
            case Sided::two:
                r.critical_value = t_quantile(r.degrees_freedom, 1.0 - alpha / 2.0);
                r.reject = std::abs(r.statistic) > r.critical_value;
                break;
            case Sided::one_greater:
                r.critical_value = t_quantile(r.degrees_freedom, 1.0 - alpha);
                r.reject = r.statistic > r.critical_value;
                break;
            case Sided::one_less:
                r.critical_value = t_quantile(r.degrees_freedom, 1.0 - alpha);
                r.reject = r.statistic < -r.critical_value;
                break;
        }
        return r;
    }
    require(sided == Sided::two, "the multi-coordinate test is two-sided");
    require(v.size() % static_cast<std::size_t>(coords) == 0,
            "pair estimates must split into equal groups per coordinate");
    const std::size_t group = v.size() / static_cast<std::size_t>(coords);
    require(group >= 2, "each coordinate needs at least two pairs");
    double stat = 0.0;
    for (int j = 0; j < coords; ++j) {
        stat = std::max(stat, std::abs(t_statistic(v.subspan(static_cast<std::size_t>(j) * group, group))));
    }
    r.statistic = stat;
    r.degrees_freedom = static_cast<int>(group) - 1;
    r.critical_value = multi_coord_critical_value(static_cast<int>(2 * v.size()), coords, alpha);
    r.reject = stat > r.critical_value;
    r.level_warning = alpha > 0.08;
    return r;
}

}  // namespace netpolicy
