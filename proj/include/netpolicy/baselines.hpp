#pragma once

#include <optional>
#include <span>
#include <vector>

#include "netpolicy/estimators.hpp"
#include "netpolicy/field.hpp"
#include "netpolicy/oracle.hpp"
#include "netpolicy/outcomes.hpp"
#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

// `count` equally spaced cell-centred points of the policy box; for p > 1 a
// ceil(count^(1/p))-per-axis lattice in row-major order, truncated.
std::vector<Beta> grid_points(const PolicyClass& policy, std::size_t count);

struct GridPointResult {
    Beta beta;
    double w_bar = 0.0;  // pooled (demeaned) outcome level of the pair
    Beta v_hat;          // one gradient coordinate per period
};

struct GridSearchRun {
    std::vector<GridPointResult> points;  // points[g] belongs to pair g
    Beta beta_hat_ow;                     // argmax of the gradient-augmented surrogate
    Beta beta_quadratic;                  // argmax of a least-squares quadratic through w_bar
    Beta beta_best_point;                 // grid point with the largest w_bar
    std::vector<std::vector<Beta>> path;  // path[k][t-1]
    Beta lower, upper;                    // the policy box
};

struct GridSearchOptions {
    SamplingOptions sampling;
    BaselineMode mode = BaselineMode::without_baseline;
};

// Runs p = dim(policy) periods; period t perturbs coordinate t.
GridSearchRun run_grid_search(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                              const PolicyClass& policy, double eta, const GridSearchOptions& options = {});

// W_bar at the nearest grid point plus the first-order correction.
double surrogate_welfare(const GridSearchRun& run, std::span<const double> beta);

// Dense lattice: 10^4 points for p = 1, 10^2 per axis for p = 2, 10 beyond.
std::vector<Beta> evaluation_lattice(std::span<const double> lower, std::span<const double> upper);

// W(beta*) - mean_k W(beta^k). beta* defaults to optimal_beta(oracle).
double grid_in_sample_regret(const GridSearchRun& run, const WelfareOracle& oracle,
                             std::optional<double> welfare_at_optimum = std::nullopt);

}  // namespace netpolicy
