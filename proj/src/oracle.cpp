#include "netpolicy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "netpolicy/errors.hpp"
#include "netpolicy/parallel.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

const LevelConstants& NetworkConstants::level(double x) const {
    auto it = by_level.find(static_cast<int>(std::lround(x)));
    if (it == by_level.end()) throw InvalidArgument("network constants have no entry for this covariate level");
    return it->second;
}

namespace {

struct Tally {
    double count = 0, connected = 0, inverse = 0;
};

}  // namespace

NetworkConstants network_constants_of(std::span<const ClusterPopulation> clusters) {
    require(!clusters.empty(), "need at least one cluster");
    Tally all;
    std::map<int, Tally> levels;
    bool integer_levels = true;
    NetworkConstants out;
    out.cluster_size = clusters.front().size();
    for (const auto& c : clusters) {
        out.max_degree = std::max(out.max_degree, c.adjacency.max_degree());
        for (std::size_t i = 0; i < c.size(); ++i) {
            double deg = static_cast<double>(c.adjacency.degree(i));
            double conn = deg >= 1 ? 1.0 : 0.0;
            double inv = deg >= 1 ? 1.0 / deg : 0.0;
            all.count += 1;
            all.connected += conn;
            all.inverse += inv;
            double x = c.covariates[i];
            if (std::round(x) != x) {
                integer_levels = false;
                continue;
            }
            auto& t = levels[static_cast<int>(x)];
            t.count += 1;
            t.connected += conn;
            t.inverse += inv;
        }
    }
    out.overall = {1.0, all.connected / all.count, all.inverse / all.count};
    if (integer_levels) {
        for (auto& [x, t] : levels) out.by_level[x] = {t.count / all.count, t.connected / t.count, t.inverse / t.count};
    }
    return out;
}

NetworkConstants estimate_network_constants(const ClusterFactory& factory, std::size_t clusters, std::uint64_t seed,
                                            std::size_t threads) {
    require(clusters >= 1, "need at least one cluster");
    std::vector<ClusterPopulation> pop(clusters);
    parallel_for(clusters, threads, [&](std::size_t r) {
        pop[r] = factory(derive_seed(seed, r), static_cast<int>(r));
    });
    return network_constants_of(pop);
}

bool WelfareOracle::has_closed_form() const {
    switch (model.variant) {
        case OutcomeVariant::reduced_form:
            return true;
        case OutcomeVariant::quadratic_exposure:
        case OutcomeVariant::heterogeneous_by_x:
        case OutcomeVariant::global_mean:
        case OutcomeVariant::dynamic_carryover:
            return policy.variant == PolicyVariant::constant_prob;
    }
    return false;
}

namespace {

struct Poly2 {
    double c0 = 0, c1 = 0, c2 = 0;
    double at(double b) const { return c0 + c1 * b + c2 * b * b; }
    double slope(double b) const { return c1 + 2.0 * c2 * b; }
};

// Mean outcome at one covariate level when neighbours are treated with
// probability b now and b_prev last period, as polynomials in each. The own
// treatment terms are included only when with_d_expectation is set.
struct LevelMean {
    Poly2 in_current;
    Poly2 in_previous;
};

LevelMean network_level_mean(const OutcomeModel& m, const ExposureCoefficients& c, const LevelConstants& k,
                             bool with_d_expectation) {
    LevelMean out;
    const double s = k.connected_share, kap = k.inverse_degree;
    out.in_current.c0 = m.phi0;
    out.in_current.c1 = c.linear * s + c.quadratic * kap;
    out.in_current.c2 = c.quadratic * (s - kap);
    if (with_d_expectation) {
        out.in_current.c1 += c.direct - m.cost;
        out.in_current.c2 += m.treated_x_exposure * s;
    }
    if (m.variant == OutcomeVariant::dynamic_carryover) {
        out.in_previous.c1 = m.carryover.linear * s + m.carryover.quadratic * kap;
        out.in_previous.c2 = m.carryover.quadratic * (s - kap);
    }
    return out;
}

const ExposureCoefficients& coefficients_at(const OutcomeModel& m, double x) {
    if (m.variant != OutcomeVariant::heterogeneous_by_x) return m.phi;
    auto it = m.phi_by_x.find(static_cast<int>(std::lround(x)));
    if (it == m.phi_by_x.end()) throw InvalidArgument("heterogeneous model lacks coefficients for a covariate level");
    return it->second;
}

// Levels to average over with their probabilities.
std::vector<std::pair<double, double>> level_weights(const WelfareOracle& o) {
    std::vector<std::pair<double, double>> w;
    bool needs_levels = o.model.variant == OutcomeVariant::heterogeneous_by_x ||
                        (o.model.variant == OutcomeVariant::reduced_form &&
                         o.policy.variant != PolicyVariant::constant_prob);
    if (!needs_levels) return {{1.0, 1.0}};
    require(!o.constants.by_level.empty(), "analytic welfare needs per-level network constants");
    for (auto& [x, k] : o.constants.by_level) w.emplace_back(static_cast<double>(x), k.probability);
    return w;
}

// E[Y] at (current, previous) parameter vectors plus its gradient in `current`
// coordinate j (if j < p) for the closed-form families.
struct Eval {
    double value = 0;
    double slope = 0;
};

Eval analytic_eval(const WelfareOracle& o, std::span<const double> cur, std::span<const double> prev, std::size_t j,
                   bool stationary) {
    const auto& m = o.model;
    Eval e;
    switch (m.variant) {
        case OutcomeVariant::reduced_form: {
            const auto& r = m.reduced;
            for (auto [x, px] : level_weights(o)) {
                double p = o.policy.propensity(x, cur);
                double q = o.policy.propensity(x, prev);
                double val = r.intercept + (r.own - m.cost + r.prop) * p + (r.prop_sq + r.own_x_prop) * p * p +
                             r.lag * q + r.lag_sq * q * q + r.cross * p * q;
                double dp = (r.own - m.cost + r.prop) + 2.0 * (r.prop_sq + r.own_x_prop) * p + r.cross * q;
                double dq = r.lag + 2.0 * r.lag_sq * q + r.cross * p;
                double dpdb = 0.0;
                if (j < o.policy.dim()) {
                    switch (o.policy.variant) {
                        case PolicyVariant::constant_prob: dpdb = 1.0; break;
                        case PolicyVariant::per_type_prob: dpdb = (static_cast<std::size_t>(x) == j) ? 1.0 : 0.0; break;
                        case PolicyVariant::budget_complement: dpdb = 2.0 * x - 1.0; break;
                    }
                }
                e.value += px * val;
                e.slope += px * (dp + (stationary ? dq : 0.0)) * dpdb;
            }
            return e;
        }
        case OutcomeVariant::global_mean: {
            const double n = static_cast<double>(o.constants.cluster_size);
            require(n >= 1, "global_mean analytic welfare needs the cluster size");
            const auto& c = m.phi;
            const double b = cur[0];
            // E[Dbar] = b, E[Dbar^2] = b/N + b^2 (1 - 1/N), E[D_i Dbar] = b/N + b^2 (1 - 1/N).
            Poly2 w;
            w.c0 = m.phi0;
            w.c1 = (c.direct - m.cost) + c.linear + c.quadratic / n + m.treated_x_exposure / n;
            w.c2 = (c.quadratic + m.treated_x_exposure) * (1.0 - 1.0 / n);
            e.value = w.at(b);
            e.slope = w.slope(b);
            return e;
        }
        case OutcomeVariant::quadratic_exposure:
        case OutcomeVariant::heterogeneous_by_x:
        case OutcomeVariant::dynamic_carryover: {
            const double b = cur[0], bp = prev[0];
            for (auto [x, px] : level_weights(o)) {
                const auto& k = m.variant == OutcomeVariant::heterogeneous_by_x ? o.constants.level(x)
                                                                                 : o.constants.overall;
                auto lm = network_level_mean(m, coefficients_at(m, x), k, true);
                e.value += px * (lm.in_current.at(b) + lm.in_previous.at(bp) - lm.in_previous.c0);
                e.slope += px * (lm.in_current.slope(b) + (stationary ? lm.in_previous.slope(bp) : 0.0));
            }
            return e;
        }
    }
    return e;
}

void check_beta(const WelfareOracle& o, std::span<const double> beta) {
    require(beta.size() == o.policy.dim(), "beta has the wrong dimension for the policy");
    require(o.policy.contains(beta), "beta lies outside the policy box");
}

WelfareValue monte_carlo_welfare(const WelfareOracle& o, std::span<const double> cur, std::span<const double> prev) {
    require(o.factory != nullptr, "monte_carlo oracle needs a cluster factory");
    require(o.mc_replications >= 2, "monte_carlo oracle needs at least two replications");
    std::vector<double> means(o.mc_replications);
    parallel_for(o.mc_replications, o.threads, [&](std::size_t r) {
        auto cluster = o.factory(derive_seed(o.seed, r), static_cast<int>(r));
        auto a = assign_treatments(cluster, o.policy, cur, derive_seed(cluster.stream_seed, stream::assignment, 1));
        Assignment before;
        const Assignment* pa = nullptr;
        if (o.model.is_dynamic()) {
            before = assign_treatments(cluster, o.policy, prev, derive_seed(cluster.stream_seed, stream::assignment, 0));
            pa = &before;
        }
        auto y = realize_outcomes(cluster, o.model, a, 1, pa, derive_seed(cluster.stream_seed, stream::noise, 1));
        // Exclude level shifts that average to zero in the population.
        double shift = o.model.time_effect(1) + cluster.cluster_effect;
        means[r] = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size()) - shift;
    });
    double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(means.size());
    double ss = 0;
    for (double v : means) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / static_cast<double>(means.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(means.size()))};
}

}  // namespace

WelfareValue welfare(const WelfareOracle& oracle, std::span<const double> beta) {
    check_beta(oracle, beta);
    if (oracle.mode == OracleMode::analytic) {
        require(oracle.has_closed_form(), "analytic welfare is unavailable for this model and policy");
        return {analytic_eval(oracle, beta, beta, oracle.policy.dim(), true).value, 0.0};
    }
    return monte_carlo_welfare(oracle, beta, beta);
}

double marginal_effect_oracle(const WelfareOracle& oracle, std::span<const double> beta, std::size_t coordinate,
                              double step) {
    check_beta(oracle, beta);
    require(coordinate < oracle.policy.dim(), "coordinate out of range");
    if (oracle.mode == OracleMode::analytic) {
        require(oracle.has_closed_form(), "analytic welfare is unavailable for this model and policy");
        return analytic_eval(oracle, beta, beta, coordinate, true).slope;
    }
    require(step > 0.0, "finite-difference step must be positive");
    Beta up(beta.begin(), beta.end()), down(beta.begin(), beta.end());
    up[coordinate] += step;
    down[coordinate] -= step;
    require(oracle.policy.contains(up) && oracle.policy.contains(down), "finite-difference step leaves the policy box");
    // Same replication seeds on both sides: common random numbers.
    return (welfare(oracle, up).value - welfare(oracle, down).value) / (2.0 * step);
}

double conditional_mean(const WelfareOracle& oracle, int d, double x, double beta) {
    require(oracle.policy.variant == PolicyVariant::constant_prob, "conditional means need a constant policy");
    require(d == 0 || d == 1, "d must be 0 or 1");
    const auto& m = oracle.model;
    if (m.variant == OutcomeVariant::reduced_form) {
        const auto& r = m.reduced;
        return r.intercept + (r.own - m.cost) * d + r.prop * beta + r.prop_sq * beta * beta + r.own_x_prop * d * beta;
    }
    require(m.variant == OutcomeVariant::quadratic_exposure || m.variant == OutcomeVariant::heterogeneous_by_x,
            "conditional means are available for static network models");
    const auto& c = coefficients_at(m, x);
    const auto& k = m.variant == OutcomeVariant::heterogeneous_by_x ? oracle.constants.level(x) : oracle.constants.overall;
    auto lm = network_level_mean(m, c, k, false);
    return lm.in_current.at(beta) + (c.direct - m.cost) * d + m.treated_x_exposure * d * k.connected_share * beta;
}

double conditional_mean_slope(const WelfareOracle& oracle, int d, double x, double beta) {
    require(oracle.policy.variant == PolicyVariant::constant_prob, "conditional means need a constant policy");
    const auto& m = oracle.model;
    if (m.variant == OutcomeVariant::reduced_form) {
        const auto& r = m.reduced;
        return r.prop + 2.0 * r.prop_sq * beta + r.own_x_prop * d;
    }
    require(m.variant == OutcomeVariant::quadratic_exposure || m.variant == OutcomeVariant::heterogeneous_by_x,
            "conditional means are available for static network models");
    const auto& c = coefficients_at(m, x);
    const auto& k = m.variant == OutcomeVariant::heterogeneous_by_x ? oracle.constants.level(x) : oracle.constants.overall;
    auto lm = network_level_mean(m, c, k, false);
    return lm.in_current.slope(beta) + m.treated_x_exposure * d * k.connected_share;
}

double dynamic_gamma(const WelfareOracle& oracle, double current, double previous) {
    require(oracle.policy.dim() == 1, "dynamic_gamma needs a scalar policy");
    require(oracle.has_closed_form(), "analytic Gamma is unavailable for this model and policy");
    double cur[1] = {current}, prev[1] = {previous};
    require(current >= 0.0 && current <= 1.0 && previous >= 0.0 && previous <= 1.0,
            "Gamma arguments must lie in [0,1]");
    return analytic_eval(oracle, cur, prev, 1, false).value;
}

double optimal_beta(const WelfareOracle& oracle) {
    require(oracle.policy.dim() == 1, "optimal_beta needs a scalar policy");
    const double lo = oracle.policy.lower[0], hi = oracle.policy.upper[0];
    auto w = [&](double b) {
        double v[1] = {b};
        return welfare(oracle, v).value;
    };
    if (oracle.mode == OracleMode::analytic && oracle.has_closed_form() &&
        oracle.policy.variant == PolicyVariant::constant_prob) {
        // Welfare is quadratic in beta; its slope is affine.
        auto slope = [&](double b) {
            double v[1] = {b};
            return analytic_eval(oracle, v, v, 0, true).slope;
        };
        if (lo == hi) return lo;
        const double s_lo = slope(lo), curv = (slope(hi) - s_lo) / (hi - lo);
        if (curv < 0.0) return std::clamp(lo - s_lo / curv, lo, hi);
        return w(lo) >= w(hi) ? lo : hi;
    }
    const int grid = 1000;
    double best = lo, best_val = w(lo);
    for (int i = 1; i <= grid; ++i) {
        double b = lo + (hi - lo) * i / grid;
        double v = w(b);
        if (v > best_val) {
            best = b;
            best_val = v;
        }
    }
    // Golden-section refinement inside the neighbouring cells.
    double a = std::max(lo, best - (hi - lo) / grid), c = std::min(hi, best + (hi - lo) / grid);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
        double x1 = c - g * (c - a), x2 = a + g * (c - a);
        if (w(x1) >= w(x2)) c = x2; else a = x1;
    }
    double refined = 0.5 * (a + c);
    return w(refined) > best_val ? refined : best;
}

}  // namespace netpolicy
