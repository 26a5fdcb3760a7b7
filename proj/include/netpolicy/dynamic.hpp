#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "netpolicy/field.hpp"
#include "netpolicy/outcomes.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

// Gamma(current, previous): expected outcome given this period's and last
// period's treatment probabilities.
using GammaFunction = std::function<double(double current, double previous)>;

// Triad r ran beta2 in the first period and beta1 in the second; g1 is the
// slope in the current (second-period) parameter, g2 in the previous one.
struct SurrogatePoint {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double gamma_tilde = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
};

struct DynamicSurrogate {
    std::vector<SurrogatePoint> grid;
    double eta = 0.0;
};

// ceil(sqrt(m)) x ceil(sqrt(m)) cell-centred grid on [0,1]^2, row-major,
// truncated to m points; first = beta1, second = beta2.
std::vector<std::array<double, 2>> triad_grid(std::size_t points);

// Clusters 3r, 3r+1, 3r+2 run (beta2, beta1), (beta2 + eta, beta1), (beta2, beta1 + eta).
DynamicSurrogate run_triad_experiment(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                                      double eta, const SamplingOptions& sampling = {});

double surrogate_gamma(const DynamicSurrogate& surrogate, double beta2, double beta1);
GammaFunction surrogate_function(const DynamicSurrogate& surrogate);

void write_surrogate_csv(const DynamicSurrogate& surrogate, std::ostream& out);

// beta_t = clamp(theta0 + theta1 beta_{t-1} + theta2 beta_{t-2}, 0, 1), beta_0 = beta_{-1} = 0.
struct TransitionFamily {
    std::array<double, 3> lower{-1.0, -1.0, -1.0};
    std::array<double, 3> upper{1.0, 1.0, 1.0};

    double next(const std::array<double, 3>& theta, double last, double before) const;
};

std::vector<double> policy_path(const TransitionFamily& family, const std::array<double, 3>& theta, int horizon);

// sum_{t=1}^{T*} q^t Gamma(beta_t, beta_{t-1})
double discounted_welfare(const GammaFunction& gamma, const TransitionFamily& family,
                          const std::array<double, 3>& theta, double q, int horizon);

struct DynamicPolicy {
    std::array<double, 3> theta{};
    int horizon = 0;
    double discount = 0.0;
    double surrogate_value = 0.0;
    std::optional<double> true_value;
    std::vector<double> path;
};

struct OptimizerOptions {
    int starts = 16;
    double gradient_step = 1e-4;
    int max_iterations = 400;
    std::uint64_t seed = 0;
};

DynamicPolicy optimize_dynamic_policy(const GammaFunction& objective, const TransitionFamily& family, double q,
                                      int horizon, const OptimizerOptions& options,
                                      const GammaFunction& truth = nullptr);
DynamicPolicy optimize_dynamic_policy(const DynamicSurrogate& surrogate, const TransitionFamily& family, double q,
                                      int horizon, const OptimizerOptions& options,
                                      const GammaFunction& truth = nullptr);

}  // namespace netpolicy
