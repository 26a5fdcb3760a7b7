#include "netpolicy/harness/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netpolicy/adaptive.hpp"
#include "netpolicy/baselines.hpp"
#include "netpolicy/design.hpp"
#include "netpolicy/dynamic.hpp"
#include "netpolicy/errors.hpp"
#include "netpolicy/estimators.hpp"
#include "netpolicy/field.hpp"
#include "netpolicy/inference.hpp"
#include "netpolicy/parallel.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy::harness {

namespace {

double W(const StudyContext& ctx, std::span<const double> beta) { return welfare(ctx.oracle, beta).value; }

Beta clamp_to(const PolicyClass& policy, Beta b) {
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = std::clamp(b[j], policy.lower[j], policy.upper[j]);
    return b;
}

Beta midpoint(const PolicyClass& policy) {
    Beta b(policy.dim());
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = 0.5 * (policy.lower[j] + policy.upper[j]);
    return b;
}

// Second difference of W along coordinate 0, kept inside the box.
double curvature_at(const StudyContext& ctx, const PolicyClass& policy, const Beta& at) {
    const double lo = policy.lower[0], hi = policy.upper[0];
    const double h = std::min(0.01, 0.25 * (hi - lo));
    if (h <= 0.0) return 0.0;
    Beta mid = at;
    mid[0] = std::clamp(mid[0], lo + h, hi - h);
    Beta up = mid, down = mid;
    up[0] += h;
    down[0] -= h;
    return std::abs(W(ctx, up) - 2.0 * W(ctx, mid) + W(ctx, down)) / (h * h);
}

struct RowMaker {
    const Scenario& s;
    const StudyContext& ctx;
    std::size_t rep;
    std::string beta;
    std::vector<ResultRow>& out;

    void operator()(const std::string& metric, double value, int coord = -1) const {
        out.push_back({s.name, rep, metric, value, s.cluster_count(), s.sample_size(), s.design.periods, beta, coord});
    }
};

StudyOutput finish(const Scenario& s, std::vector<std::vector<ResultRow>>& per_rep, std::size_t degenerate) {
    StudyOutput out;
    out.replications = s.replications;
    out.degenerate = degenerate;
    for (auto& rows : per_rep) {
        for (auto& r : rows) out.rows.push_back(std::move(r));
    }
    out.summary = summarize(s.name, to_string(s.study), s.replications, out.rows);
    return out;
}

SamplingOptions sampling_of(const Scenario& s) { return {s.design.sample_size, false}; }

// Grid points must survive the +-eta perturbation, so the default grid box is
// the policy box shrunk by eta on every side.
PolicyClass grid_box(const Scenario& s, double eta) {
    PolicyClass box = s.policy;
    if (s.design.grid_lower) {
        box.lower = *s.design.grid_lower;
        box.upper = *s.design.grid_upper;
        return box;
    }
    for (std::size_t j = 0; j < box.dim(); ++j) {
        box.lower[j] += eta;
        box.upper[j] -= eta;
        if (box.lower[j] > box.upper[j]) throw ConfigError("design.eta", "eta leaves no room for a grid");
    }
    return box;
}

}  // namespace

std::uint64_t replication_seed(const Scenario& scenario, std::size_t rep) {
    return derive_seed(derive_seed(scenario.master_seed, "replication"), static_cast<std::uint64_t>(rep));
}

std::vector<ClusterPopulation> replication_clusters(const Scenario& scenario, std::size_t rep) {
    const auto factory = scenario.population.factory();
    const std::uint64_t root = derive_seed(replication_seed(scenario, rep), "clusters");
    std::vector<ClusterPopulation> clusters;
    const int K = scenario.cluster_count();
    clusters.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) clusters.push_back(factory(derive_seed(root, static_cast<std::uint64_t>(k)), k));
    return clusters;
}

StudyContext prepare_study(const Scenario& s, std::size_t threads) {
    StudyContext ctx;
    auto& o = ctx.oracle;
    o.model = s.model;
    o.policy = s.policy;
    o.mode = s.oracle.mode;
    o.mc_replications = s.oracle.replications;
    o.factory = s.population.factory();
    o.seed = derive_seed(s.master_seed, "oracle");
    o.threads = threads;
    if (o.mode == OracleMode::analytic) {
        if (!o.has_closed_form()) throw ConfigError("oracle.mode", "no closed form for this model and policy");
        o.constants = estimate_network_constants(o.factory, s.oracle.clusters, derive_seed(s.master_seed, "constants"),
                                                 threads);
    }

    if (s.policy.dim() == 1) {
        ctx.beta_star = {optimal_beta(o)};
    } else {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& b : evaluation_lattice(s.policy.lower, s.policy.upper)) {
            double w = W(ctx, b);
            if (w > best) {
                best = w;
                ctx.beta_star = b;
            }
        }
    }
    ctx.welfare_star = W(ctx, ctx.beta_star);
    ctx.curvature = s.design.eta_curvature.value_or(curvature_at(ctx, s.policy, ctx.beta_star));

    if (s.design.eta) {
        ctx.eta = *s.design.eta;
    } else {
        const double sigma = s.model.noise_sigma;
        const double var = s.model.noise_kind == NoiseKind::gaussian ? sigma * sigma : sigma * sigma / 3.0;
        try {
            ctx.eta = rule_of_thumb_eta(static_cast<double>(s.sample_size()), var, ctx.curvature, s.design.eta_gamma,
                                        s.design.eta_cap);
        } catch (const InvalidArgument& e) {
            throw ConfigError("design.eta", std::string("rule of thumb unavailable: ") + e.what());
        }
    }
    // Replications run in parallel themselves.
    o.threads = 1;
    return ctx;
}

StudyOutput run_single_wave_study(const Scenario& s, std::size_t threads) {
    require(s.study == StudyKind::single_wave, "scenario is not a single-wave study");
    const StudyContext ctx = prepare_study(s, threads);
    const Beta beta = s.design.beta.value_or(ctx.beta_star);
    const int l = s.design.coords;
    const int G = s.cluster_count() / 2;
    const int block = G / l;

    // Welfare change of a step along coordinate 0, in either direction.
    double gain_up = 0.0, gain_down = 0.0;
    if (l == 1) {
        Beta up = beta, down = beta;
        up[0] += s.design.welfare_step;
        down[0] -= s.design.welfare_step;
        const double w0 = W(ctx, beta);
        gain_up = W(ctx, clamp_to(s.policy, up)) - w0;
        gain_down = W(ctx, clamp_to(s.policy, down)) - w0;
    }

    std::vector<std::vector<ResultRow>> per_rep(s.replications);
    std::vector<char> degenerate(s.replications, 0);
    parallel_for(s.replications, threads, [&](std::size_t rep) {
        auto clusters = replication_clusters(s, rep);
        std::vector<ClusterPair> pairs;
        if (s.design.matching == MatchStrategy::mmd_greedy) {
            std::vector<std::vector<double>> cov;
            for (const auto& c : clusters) cov.push_back(c.covariates);
            pairs = match_clusters(clusters.size(), MatchStrategy::mmd_greedy, cov);
        } else {
            pairs = match_clusters(clusters.size(), MatchStrategy::index_order);
        }
        std::vector<double> values(static_cast<std::size_t>(G));
        std::vector<PairEstimates> est(static_cast<std::size_t>(G));
        for (int g = 0; g < G; ++g) {
            const auto [a, b] = pairs[static_cast<std::size_t>(g)];
            auto design = make_pair_design(g, {a, b}, beta, ctx.eta, static_cast<std::size_t>(g / block), s.policy);
            ClusterField fa(clusters[static_cast<std::size_t>(a)], s.model, s.policy, sampling_of(s));
            ClusterField fb(clusters[static_cast<std::size_t>(b)], s.model, s.policy, sampling_of(s));
            std::optional<Beta> base;
            if (s.design.mode == BaselineMode::with_baseline) base = beta;
            auto panel = observe_pair(fa, fb, s.policy, design, 1, base);
            est[static_cast<std::size_t>(g)] = estimate_pair(panel, {s.design.mode, false});
            values[static_cast<std::size_t>(g)] = est[static_cast<std::size_t>(g)].v_hat;
        }

        RowMaker row{s, ctx, rep, format_beta(beta), per_rep[rep]};
        for (int j = 0; j < l; ++j) {
            double m = 0.0;
            for (int g = j * block; g < (j + 1) * block; ++g) m += values[static_cast<std::size_t>(g)];
            row("v_bar", m / block, j);
        }
        auto pooled = pool_pairs(est);
        row("delta_bar", pooled.delta_bar);
        row("s0_bar", pooled.s0_bar);
        row("s1_bar", pooled.s1_bar);
        try {
            auto test = policy_optimality_test(values, s.design.alpha, s.design.sided, l);
            row("statistic", test.statistic);
            row("critical_value", test.critical_value);
            row("reject", test.reject ? 1.0 : 0.0);
            if (l == 1) {
                bool up = s.design.sided == Sided::one_greater ||
                          (s.design.sided == Sided::two && test.statistic > 0.0);
                row("welfare_gain", test.reject ? (up ? gain_up : gain_down) : 0.0);
            }
            row("degenerate", 0.0);
        } catch (const DegenerateStatistic&) {
            degenerate[rep] = 1;
            row("degenerate", 1.0);
        }
    });
    return finish(s, per_rep, static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1)));
}

StudyOutput run_adaptive_study(const Scenario& s, std::size_t threads) {
    require(s.study == StudyKind::adaptive || s.study == StudyKind::staggered, "scenario is not an adaptive study");
    const StudyContext ctx = prepare_study(s, threads);
    const Beta beta0 = s.design.beta0.value_or(midpoint(s.policy));
    const PolicyClass grid_policy = grid_box(s, ctx.eta);

    std::vector<std::vector<ResultRow>> per_rep(s.replications);
    parallel_for(s.replications, threads, [&](std::size_t rep) {
        auto clusters = replication_clusters(s, rep);
        AdaptiveOptions options;
        options.sampling = sampling_of(s);
        options.mode = s.design.mode;
        AdaptiveRun run;
        if (s.design.patient) {
            run = run_patient_gd(clusters, s.model, s.policy, beta0, s.design.periods, ctx.eta, s.design.schedule,
                                 options);
        } else if (s.study == StudyKind::staggered) {
            run = run_staggered(clusters, s.model, s.policy, beta0, s.design.periods, ctx.eta, s.design.schedule,
                                derive_seed(replication_seed(s, rep), "staggered"), options);
        } else {
            run = run_adaptive(clusters, s.model, s.policy, beta0, s.design.periods, ctx.eta, s.design.schedule,
                               options);
        }

        RowMaker row{s, ctx, rep, format_beta(beta0), per_rep[rep]};
        const double w_hat = W(ctx, run.beta_hat);
        row("out_of_sample_regret", ctx.welfare_star - w_hat);
        for (std::size_t j = 0; j < run.beta_hat.size(); ++j) row("beta_hat", run.beta_hat[j], static_cast<int>(j));

        double worst = -std::numeric_limits<double>::infinity(), total = 0.0;
        std::size_t used = 0;
        for (const auto& path : run.path) {
            double sum = 0.0;
            std::size_t t_count = 0;
            for (const auto& b : path) {
                if (b.empty()) continue;
                sum += ctx.welfare_star - W(ctx, b);
                ++t_count;
            }
            if (t_count == 0) continue;
            const double avg = sum / static_cast<double>(t_count);
            worst = std::max(worst, avg);
            total += avg;
            ++used;
        }
        if (used > 0) {
            row("in_sample_regret_worst", worst);
            row("in_sample_regret_mean", total / static_cast<double>(used));
        }

        if (s.design.compare_grid) {
            // Same cluster populations as the adaptive arm.
            auto grid = run_grid_search(clusters, s.model, grid_policy, ctx.eta, {sampling_of(s), s.design.mode});
            const double best = std::max({W(ctx, grid.beta_hat_ow), W(ctx, grid.beta_quadratic),
                                          W(ctx, grid.beta_best_point)});
            row("grid_out_of_sample_regret", ctx.welfare_star - best);
            row("grid_in_sample_regret", grid_in_sample_regret(grid, ctx.oracle, ctx.welfare_star));
            row("welfare_improvement", w_hat - best);
        }
    });
    return finish(s, per_rep, 0);
}

StudyOutput run_grid_study(const Scenario& s, std::size_t threads) {
    require(s.study == StudyKind::grid_search, "scenario is not a grid-search study");
    const StudyContext ctx = prepare_study(s, threads);
    const PolicyClass grid_policy = grid_box(s, ctx.eta);
    std::vector<std::vector<ResultRow>> per_rep(s.replications);
    parallel_for(s.replications, threads, [&](std::size_t rep) {
        auto clusters = replication_clusters(s, rep);
        auto run = run_grid_search(clusters, s.model, grid_policy, ctx.eta, {sampling_of(s), s.design.mode});
        RowMaker row{s, ctx, rep, "", per_rep[rep]};
        row("out_of_sample_regret", ctx.welfare_star - W(ctx, run.beta_hat_ow));
        row("quadratic_regret", ctx.welfare_star - W(ctx, run.beta_quadratic));
        row("best_point_regret", ctx.welfare_star - W(ctx, run.beta_best_point));
        row("in_sample_regret", grid_in_sample_regret(run, ctx.oracle, ctx.welfare_star));
        for (std::size_t j = 0; j < run.beta_hat_ow.size(); ++j) row("beta_hat", run.beta_hat_ow[j], static_cast<int>(j));
    });
    return finish(s, per_rep, 0);
}

StudyOutput run_dynamic_study(const Scenario& s, std::size_t threads) {
    require(s.study == StudyKind::dynamic, "scenario is not a dynamic study");
    const StudyContext ctx = prepare_study(s, threads);
    const bool truth = ctx.oracle.mode == OracleMode::analytic;
    const TransitionFamily family;
    GammaFunction gamma;
    std::optional<double> best_true;
    if (truth) {
        gamma = [&ctx](double current, double previous) { return dynamic_gamma(ctx.oracle, current, previous); };
        OptimizerOptions opt{s.design.starts, 1e-4, 400, derive_seed(s.master_seed, "dynamic_truth")};
        best_true = optimize_dynamic_policy(gamma, family, s.design.discount, s.design.horizon, opt).surrogate_value;
    }

    std::vector<std::vector<ResultRow>> per_rep(s.replications);
    parallel_for(s.replications, threads, [&](std::size_t rep) {
        auto clusters = replication_clusters(s, rep);
        auto surrogate = run_triad_experiment(clusters, s.model, ctx.eta, sampling_of(s));
        RowMaker row{s, ctx, rep, "", per_rep[rep]};
        OptimizerOptions opt{s.design.starts, 1e-4, 400, derive_seed(replication_seed(s, rep), "optimizer")};
        auto policy = optimize_dynamic_policy(surrogate, family, s.design.discount, s.design.horizon, opt, gamma);
        row("surrogate_value", policy.surrogate_value);
        for (int i = 0; i < 3; ++i) row("theta", policy.theta[static_cast<std::size_t>(i)], i);
        if (truth) {
            const std::size_t m = s.design.truth_grid;
            double sup = 0.0;
            for (std::size_t a = 0; a < m; ++a) {
                for (std::size_t b = 0; b < m; ++b) {
                    const double b1 = m == 1 ? 0.5 : static_cast<double>(a) / static_cast<double>(m - 1);
                    const double b2 = m == 1 ? 0.5 : static_cast<double>(b) / static_cast<double>(m - 1);
                    sup = std::max(sup, std::abs(surrogate_gamma(surrogate, b2, b1) - gamma(b1, b2)));
                }
            }
            row("sup_error", sup);
            row("true_value", *policy.true_value);
            row("dynamic_regret", *best_true - *policy.true_value);
        }
    });
    return finish(s, per_rep, 0);
}

StudyOutput run_study(const Scenario& s, std::size_t threads) {
    switch (s.study) {
        case StudyKind::single_wave: return run_single_wave_study(s, threads);
        case StudyKind::adaptive:
        case StudyKind::staggered: return run_adaptive_study(s, threads);
        case StudyKind::grid_search: return run_grid_study(s, threads);
        case StudyKind::dynamic: return run_dynamic_study(s, threads);
    }
    throw InvalidArgument("unknown study");
}

}  // namespace netpolicy::harness
