#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "netpolicy/design.hpp"
#include "netpolicy/policy.hpp"

namespace netpolicy {

// Sampled units of one cluster in one period.
struct ClusterSample {
    std::vector<double> y;
    std::vector<std::uint8_t> d;
    std::vector<double> x;

    std::size_t size() const { return y.size(); }
    double mean() const;
    void validate() const;
};

struct PairPanel {
    PolicyClass policy;
    PairDesign design;
    std::array<std::optional<ClusterSample>, 2> baseline;  // period 0
    std::array<ClusterSample, 2> outcome;                  // perturbed period
};

enum class BaselineMode { with_baseline, without_baseline };

// (1/2eta)[Ybar1_k - Ybar0_k] - (1/2eta)[Ybar1_k+1 - Ybar0_k+1], signs taken
// from the design; without_baseline drops the period-0 means.
double marginal_effect_pair(const PairPanel& panel, BaselineMode mode = BaselineMode::with_baseline);

// Horvitz-Thompson difference of treated and control means, averaged over
// the two clusters with each cluster's own propensities.
double direct_effect_pair(const PairPanel& panel);

// arm 0: controls weighted by 1/(1-pi); arm 1: treated weighted by 1/pi.
double spillover_effect_pair(const PairPanel& panel, int arm, BaselineMode mode = BaselineMode::with_baseline);

// Marginal effect on units of covariate level x within arm d, reweighted by
// 1{X=x}/P(X=x). P(X=x) defaults to the pooled frequency in the perturbed period.
double conditional_marginal_effect_pair(const PairPanel& panel, double x_value, int arm,
                                        std::optional<double> p_x = std::nullopt,
                                        BaselineMode mode = BaselineMode::with_baseline);

// Conditional effect at x=1 minus x=0.
double interaction_effect_pair(const PairPanel& panel, int arm, BaselineMode mode = BaselineMode::with_baseline);

// Delta + S(0)(1 - beta) - (1 - beta) S(1); robust to non-separable
// cluster-period shocks when the treated arm does not depend on beta.
double nonseparable_marginal(const PairPanel& panel, double beta);

struct ConditionalEffects {
    double x0 = 0.0;
    double x1 = 0.0;
    double interaction = 0.0;
};

struct PairEstimates {
    double v_hat = 0.0;
    double delta_hat = 0.0;
    double s0_hat = 0.0;
    double s1_hat = 0.0;
    std::optional<ConditionalEffects> conditional;
};

struct EstimateOptions {
    BaselineMode mode = BaselineMode::with_baseline;
    bool conditional = false;  // constant policy with binary covariates
};

PairEstimates estimate_pair(const PairPanel& panel, const EstimateOptions& options = {});

struct PooledEstimates {
    double v_bar = 0.0;
    double delta_bar = 0.0;
    double s0_bar = 0.0;
    double s1_bar = 0.0;
    std::size_t pairs = 0;
};

PooledEstimates pool_pairs(std::span<const PairEstimates> per_pair);

}  // namespace netpolicy
