#include "netpolicy/estimators.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "netpolicy/errors.hpp"

namespace netpolicy {

namespace {

constexpr double kPropensityFloor = 1e-6;

void check_panel(const PairPanel& panel) {
    require(panel.design.eta > 0.0, "eta must be positive");
    require(panel.design.base_beta.size() == panel.policy.dim(), "design beta has the wrong dimension");
    for (const auto& s : panel.outcome) {
        s.validate();
        require(s.size() >= 1, "each cluster needs at least one sampled unit");
    }
}

double baseline_mean(const PairPanel& panel, int h, BaselineMode mode) {
    if (mode == BaselineMode::without_baseline) return 0.0;
    const auto& b = panel.baseline[static_cast<std::size_t>(h)];
    require(b.has_value(), "with-baseline estimation needs period-0 outcomes for both clusters");
    b->validate();
    require(b->size() >= 1, "baseline sample is empty");
    return b->mean();
}

double checked_propensity(const PairPanel& panel, int h, double x) {
    double p = panel.policy.propensity(x, panel.design.perturbed(h));
    if (!(p >= kPropensityFloor && p <= 1.0 - kPropensityFloor)) {
        std::ostringstream msg;
        msg << "propensity " << p << " at x=" << x << " is too close to 0 or 1 for inverse weighting";
        throw DegeneratePropensity(msg.str());
    }
    return p;
}

// mean_i of Y_i * weight_i over cluster h's perturbed-period sample.
template <typename Weight>
double weighted_mean(const PairPanel& panel, int h, Weight weight) {
    const auto& s = panel.outcome[static_cast<std::size_t>(h)];
    double total = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) total += s.y[i] * weight(s.d[i], s.x[i]);
    return total / static_cast<double>(s.size());
}

double arm_weight(const PairPanel& panel, int h, int arm, std::uint8_t d, double x) {
    double p = checked_propensity(panel, h, x);
    return arm == 1 ? d / p : (1 - d) / (1.0 - p);
}

}  // namespace

double ClusterSample::mean() const {
    require(!y.empty(), "mean of an empty sample");
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

void ClusterSample::validate() const {
    require(d.size() == y.size() && x.size() == y.size(), "sample columns y, d, x must have equal length");
    for (auto v : d) require(v == 0 || v == 1, "treatment indicators must be 0 or 1");
}

double marginal_effect_pair(const PairPanel& panel, BaselineMode mode) {
    check_panel(panel);
    const double eta = panel.design.eta;
    double v = 0.0;
    for (int h = 0; h < 2; ++h) {
        double diff = panel.outcome[static_cast<std::size_t>(h)].mean() - baseline_mean(panel, h, mode);
        v += panel.design.signs[static_cast<std::size_t>(h)] * diff / (2.0 * eta);
    }
    return v;
}

double direct_effect_pair(const PairPanel& panel) {
    check_panel(panel);
    double total = 0.0;
    for (int h = 0; h < 2; ++h) {
        total += weighted_mean(panel, h, [&](std::uint8_t d, double x) {
            double p = checked_propensity(panel, h, x);
            return d / p - (1 - d) / (1.0 - p);
        });
    }
    return total / 2.0;
}

double spillover_effect_pair(const PairPanel& panel, int arm, BaselineMode mode) {
    check_panel(panel);
    require(arm == 0 || arm == 1, "arm must be 0 or 1");
    double total = 0.0;
    for (int h = 0; h < 2; ++h) {
        double m = weighted_mean(panel, h, [&](std::uint8_t d, double x) { return arm_weight(panel, h, arm, d, x); });
        total += panel.design.signs[static_cast<std::size_t>(h)] * (m - baseline_mean(panel, h, mode));
    }
    return total / (2.0 * panel.design.eta);
}

double conditional_marginal_effect_pair(const PairPanel& panel, double x_value, int arm, std::optional<double> p_x,
                                        BaselineMode mode) {
    check_panel(panel);
    require(arm == 0 || arm == 1, "arm must be 0 or 1");
    require(panel.policy.variant == PolicyVariant::constant_prob,
            "conditional marginal effects assume a constant-probability policy");
    double prob;
    if (p_x) {
        prob = *p_x;
    } else {
        double hits = 0, count = 0;
        for (const auto& s : panel.outcome) {
            for (double x : s.x) hits += (x == x_value) ? 1.0 : 0.0;
            count += static_cast<double>(s.size());
        }
        prob = hits / count;
    }
    require(prob > 0.0 && prob <= 1.0, "P(X = x) must be positive");
    double total = 0.0;
    for (int h = 0; h < 2; ++h) {
        double m = weighted_mean(panel, h, [&](std::uint8_t d, double x) {
            if (x != x_value) return 0.0;
            return arm_weight(panel, h, arm, d, x) / prob;
        });
        total += panel.design.signs[static_cast<std::size_t>(h)] * (m - baseline_mean(panel, h, mode));
    }
    return total / (2.0 * panel.design.eta);
}

double interaction_effect_pair(const PairPanel& panel, int arm, BaselineMode mode) {
    return conditional_marginal_effect_pair(panel, 1.0, arm, std::nullopt, mode) -
           conditional_marginal_effect_pair(panel, 0.0, arm, std::nullopt, mode);
}

double nonseparable_marginal(const PairPanel& panel, double beta) {
    require(panel.policy.variant == PolicyVariant::constant_prob,
            "the non-separable combination assumes a constant-probability policy");
    BaselineMode mode = panel.baseline[0] && panel.baseline[1] ? BaselineMode::with_baseline
                                                               : BaselineMode::without_baseline;
    double delta = direct_effect_pair(panel);
    double s0 = spillover_effect_pair(panel, 0, mode);
    double s1 = spillover_effect_pair(panel, 1, mode);
    return delta + s0 * (1.0 - beta) - (1.0 - beta) * s1;
}

PairEstimates estimate_pair(const PairPanel& panel, const EstimateOptions& options) {
    PairEstimates e;
    e.v_hat = marginal_effect_pair(panel, options.mode);
    e.delta_hat = direct_effect_pair(panel);
    e.s0_hat = spillover_effect_pair(panel, 0, options.mode);
    e.s1_hat = spillover_effect_pair(panel, 1, options.mode);
    if (options.conditional) {
        ConditionalEffects c;
        c.x0 = conditional_marginal_effect_pair(panel, 0.0, 0, std::nullopt, options.mode);
        c.x1 = conditional_marginal_effect_pair(panel, 1.0, 0, std::nullopt, options.mode);
        c.interaction = c.x1 - c.x0;
        e.conditional = c;
    }
    return e;
}

PooledEstimates pool_pairs(std::span<const PairEstimates> per_pair) {
    require(!per_pair.empty(), "pooling needs at least one pair");
    PooledEstimates p;
    for (const auto& e : per_pair) {
        p.v_bar += e.v_hat;
        p.delta_bar += e.delta_hat;
        p.s0_bar += e.s0_hat;
        p.s1_bar += e.s1_hat;
    }
    const double g = static_cast<double>(per_pair.size());
    p.v_bar /= g;
    p.delta_bar /= g;
    p.s0_bar /= g;
    p.s1_bar /= g;
    p.pairs = per_pair.size();
    return p;
}

}  // namespace netpolicy
