// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "helpers.hpp"
#include "netpolicy/adaptive.hpp"
#include "netpolicy/baselines.hpp"
#include "netpolicy/design.hpp"
#include "netpolicy/dynamic.hpp"
#include "netpolicy/errors.hpp"
#include "netpolicy/estimators.hpp"
#include "netpolicy/field.hpp"
#include "netpolicy/harness/config.hpp"
#include "netpolicy/harness/results.hpp"
#include "netpolicy/harness/scenario.hpp"
#include "netpolicy/harness/studies.hpp"
#include "netpolicy/inference.hpp"
#include "netpolicy/oracle.hpp"
#include "netpolicy/population.hpp"
#include "netpolicy/seeding.hpp"

using namespace netpolicy;
using namespace netpolicy::harness;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

harness::Scenario scenario_from(const std::string& text) { return parse_scenario(ConfigDocument::parse(text)); }

std::vector<double> metric(const StudyOutput& out, const std::string& name, int coord = -1) {
    std::vector<double> v;
    for (const auto& r : out.rows) {
        if (r.metric == name && r.coord == coord) v.push_back(r.value);
    }
    return v;
}

double max_over_min(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

std::string join(const std::vector<double>& v, const char* format = "{:.4g}") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format(fmt::runtime(format), v[i]);
    return s;
}

std::vector<ClusterPopulation> line_clusters(std::size_t count, std::size_t size = 40) {
    std::vector<ClusterPopulation> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(testing::small_cluster(size, {}, derive_seed(77, k)));
    return out;
}

std::vector<ClusterPopulation> fresh_geometric(std::size_t count, std::uint64_t seed) {
    return testing::geometric_clusters(count, seed, 600, 2.0);
}

// ---------------------------------------------------------------------------

Outcome size_control() {
    std::vector<double> rates;
    bool pass = true;
    for (int K : {10, 20, 40}) {
        const std::string text = fmt::format(R"(
name = "size_k{0}"
study = "single_wave"
replications = 200
seed = {1}
[population]
size = 600
rho = 2.0
[model]
phi = [1.0, 1.0, -1.5]
sigma = 1.0
[design]
K = {0}
n = 400
eta = 0.1
alpha = 0.05
beta = "optimum"
[oracle]
clusters = 400
)",
                                             K, 1000 + K);
        auto out = run_study(scenario_from(text));
        const auto reject = metric(out, "reject");
        const double rate = testing::mean_of(reject);
        rates.push_back(rate);
        pass = pass && out.degenerate == 0 && rate <= 0.15;
    }
    return {pass, "rejection at K=10,20,40: " + join(rates, "{:.3f}") + " (bound 0.15)"};
}

Outcome pairing_cancellation() {
    OutcomeModel m;
    m.variant = OutcomeVariant::reduced_form;
    m.reduced.intercept = 1.0;
    m.reduced.prop = 0.8;
    const auto policy = PolicyClass::constant();
    const double beta = 0.4, slope = 0.8, level = 1.0 + 0.8 * beta;
    auto clusters = line_clusters(2, 50);
    bool pass = true;
    double worst_paired = 0.0, smallest_ratio = std::numeric_limits<double>::infinity();
    for (double eta : {0.05, 0.1, 0.2}) {
        auto run = [&](std::array<int, 2> signs) {
            ClusterField a(clusters[0], m, policy), b(clusters[1], m, policy);
            auto design = make_pair_design(0, {0, 1}, {beta}, eta, 0, policy);
            design.signs = signs;
            return marginal_effect_pair(observe_pair(a, b, policy, design, 1, std::nullopt),
                                        BaselineMode::without_baseline);
        };
        const double paired = std::abs(run({+1, -1}) - slope);
        const double unpaired = std::abs(run({+1, +1}) - slope);
        worst_paired = std::max(worst_paired, paired);
        smallest_ratio = std::min(smallest_ratio, unpaired / (level / eta));
        pass = pass && paired < 1e-10 && unpaired >= 0.5 * level / eta;
    }
    return {pass, fmt::format("max paired error {:.2e}; unpaired error / (level/eta) >= {:.3f} (need 0.5)",
                              worst_paired, smallest_ratio)};
}

Outcome direct_effect_bias() {
    OutcomeModel m;
    m.phi = {1.0, 1.0, 0.0};
    m.cost = 0.0;
    m.treated_x_exposure = 1.0;
    m.noise_sigma = 1.0;
    const auto policy = PolicyClass::constant();
    const double beta = 0.4, eta = 0.1;
    const std::size_t K = 20, reps = 2000;
    const SamplingOptions sampling{400, false};

    std::vector<double> paired_err(reps), unpaired_err(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        auto clusters = fresh_geometric(K, derive_seed(3003, rep));
        // Delta(beta) = phi1 + t * s_k * beta for the realized networks.
        double truth = 0.0;
        for (const auto& c : clusters)
            truth += 1.0 + network_constants_of(std::span(&c, 1)).overall.connected_share * beta;
        truth /= static_cast<double>(K);
        auto pooled = [&](std::array<int, 2> signs) {
            double total = 0.0;
            for (std::size_t g = 0; g < K / 2; ++g) {
                ClusterField a(clusters[2 * g], m, policy, sampling), b(clusters[2 * g + 1], m, policy, sampling);
                auto design = make_pair_design(static_cast<int>(g), {static_cast<int>(2 * g), static_cast<int>(2 * g + 1)},
                                               {beta}, eta, 0, policy);
                design.signs = signs;
                total += direct_effect_pair(observe_pair(a, b, policy, design, 1, std::nullopt));
            }
            return total / static_cast<double>(K / 2);
        };
        paired_err[rep] = pooled({+1, -1}) - truth;
        unpaired_err[rep] = pooled({+1, +1}) - truth;
    }
    const double pb = testing::mean_of(paired_err), pse = testing::se_of(paired_err);
    const double ub = testing::mean_of(unpaired_err), use = testing::se_of(unpaired_err);
    const bool pass = std::abs(pb) < 3.0 * pse && std::abs(ub) > 3.0 * use;
    return {pass, fmt::format("paired bias {:.2e} (SE {:.2e}); unpaired bias {:.2e} (SE {:.2e})", pb, pse, ub, use)};
}

Outcome spillover_bias_rate() {
    OutcomeModel m;
    m.phi = {1.0, 1.0, -1.5};
    m.cost = 1.0;
    const auto policy = PolicyClass::constant();
    const double beta = 0.4;
    const std::size_t K = 20, reps = 2000;
    const SamplingOptions sampling{400, false};

    std::map<double, std::vector<double>> errors;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        auto clusters = fresh_geometric(K, derive_seed(4004, rep));
        // dm(0, beta)/dbeta = phi2 s + phi3 (kappa + 2 (s - kappa) beta), averaged over the realized networks.
        double truth = 0.0;
        for (const auto& c : clusters) {
            const auto lc = network_constants_of(std::span(&c, 1)).overall;
            const double s = lc.connected_share, kappa = lc.inverse_degree;
            truth += 1.0 * s - 1.5 * (kappa + 2.0 * (s - kappa) * beta);
        }
        truth /= static_cast<double>(K);
        for (double eta : {0.05, 0.2}) {
            double total = 0.0;
            for (std::size_t g = 0; g < K / 2; ++g) {
                ClusterField a(clusters[2 * g], m, policy, sampling), b(clusters[2 * g + 1], m, policy, sampling);
                auto design = make_pair_design(static_cast<int>(g), {static_cast<int>(2 * g), static_cast<int>(2 * g + 1)},
                                               {beta}, eta, 0, policy);
                total += spillover_effect_pair(observe_pair(a, b, policy, design, 1, std::nullopt), 0,
                                               BaselineMode::without_baseline);
            }
            errors[eta].push_back(total / static_cast<double>(K / 2) - truth);
        }
    }
    const double small = testing::mean_of(errors[0.05]), large = testing::mean_of(errors[0.2]);
    const double small_se = testing::se_of(errors[0.05]), large_se = testing::se_of(errors[0.2]);
    const double ratio = large / small;
    // A ratio of two undetectable biases carries no rate information.
    const bool detectable = std::abs(large) > 3.0 * large_se;
    const bool pass = detectable && ratio >= 2.5 && ratio <= 5.5;
    return {pass, fmt::format("bias eta=0.2: {:.2e} (SE {:.2e}); eta=0.05: {:.2e} (SE {:.2e}); ratio {:.2f}{}", large,
                              large_se, small, small_se, ratio,
                              detectable ? "" : "; bias at eta=0.2 not distinguishable from zero")};
}

struct AdaptiveSetup {
    int T = 20;
    std::string K = "\"2T+2\"";
    double sigma = 1.0;
    double phi2 = 1.0;
    std::string beta0 = "beta0 = [0.2]";  // empty: midpoint of the box
    std::string schedule = "variant = \"sim_default\"\nscale = 0.1";
    bool compare_grid = false;
    int reps = 200;
};

std::string adaptive_text(const std::string& name, const AdaptiveSetup& a) {
    return fmt::format(R"(
name = "{0}"
study = "adaptive"
replications = {1}
seed = {2}
[population]
size = 600
rho = 2.0
[model]
phi = [1.0, {7}, -1.5]
sigma = {3}
[design]
K = {4}
T = {2}
n = 600
eta = 0.1
{8}
compare_grid = {5}
[schedule]
{6}
[oracle]
clusters = 400
)",
                       name, a.reps, a.T, a.sigma, a.K, a.compare_grid ? "true" : "false", a.schedule, a.phi2,
                       a.beta0);
}

// T * E|beta_hat - beta*|^2 at T = 5, 10, 20 for a noiseless (sigma = 0) model,
// K = 2T + 2 and the inverse-wave rate with J = 1 / |W''|.
std::vector<double> convergence_constants(double phi2, const std::string& beta0) {
    AdaptiveSetup a;
    a.sigma = 0.0;
    a.phi2 = phi2;
    a.beta0 = beta0;
    a.T = 5;
    a.reps = 1;
    const auto ctx = prepare_study(scenario_from(adaptive_text("probe", a)));
    a.schedule = fmt::format("variant = \"inverse_wave\"\nJ = {:.17g}", 1.0 / ctx.curvature);
    a.reps = 200;
    std::vector<double> constants;
    for (int T : {5, 10, 20}) {
        a.T = T;
        auto out = run_study(scenario_from(adaptive_text("converge_t" + std::to_string(T), a)));
        std::vector<double> sq;
        for (double b : metric(out, "beta_hat", 0)) sq.push_back((b - ctx.beta_star[0]) * (b - ctx.beta_star[0]));
        constants.push_back(T * testing::mean_of(sq));
    }
    return constants;
}

Outcome adaptive_convergence() {
    // Optimum at 0.5, start 0.1 below it.
    const auto start = std::chrono::steady_clock::now();
    const auto constants = convergence_constants(1.5, "beta0 = [0.4]");
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double spread = max_over_min(constants);
    // Shipped coefficients for reference: their optimum sits 0.08 above the
    // projected box edge, where clipped iterates drift upward as T grows.
    const double shipped = max_over_min(convergence_constants(1.0, "beta0 = [0.2]"));
    return {spread <= 3.0 && seconds < 120.0,
            fmt::format("T*E|b-b*|^2 at T=5,10,20: {}; max/min {:.2f} (bound 3); {:.0f}s; "
                        "shipped coefficients (informational): max/min {:.2f}",
                        join(constants), spread, seconds, shipped)};
}

Outcome in_sample_regret() {
    AdaptiveSetup setup;
    setup.compare_grid = true;
    const auto s = scenario_from(adaptive_text("regret_t20", setup));
    const auto ctx = prepare_study(s);
    auto out = run_study(s);
    const auto adaptive = metric(out, "in_sample_regret_worst"), grid = metric(out, "grid_in_sample_regret");
    const double a = testing::mean_of(adaptive), g = testing::mean_of(grid), g_se = testing::se_of(grid);
    const double jensen = ctx.welfare_star - welfare(ctx.oracle, std::vector<double>{0.5}).value;
    const bool pass = a < g && g >= jensen - 3.0 * g_se;
    return {pass, fmt::format("adaptive worst {:.4g} < grid {:.4g} (SE {:.2g}); Jensen bound {:.4g}", a, g, g_se, jensen)};
}

Outcome out_of_sample_curve() {
    std::vector<double> means, ses;
    for (int T : {5, 10, 15, 20}) {
        // Starts at the box midpoint, away from the optimum near 0.18.
        AdaptiveSetup a;
        a.T = T;
        a.beta0 = "";
        auto out = run_study(scenario_from(adaptive_text("oos_t" + std::to_string(T), a)));
        const auto r = metric(out, "out_of_sample_regret");
        means.push_back(testing::mean_of(r));
        ses.push_back(testing::se_of(r));
    }
    bool pass = true;
    for (std::size_t i = 1; i < means.size(); ++i) pass = pass && means[i] <= means[i - 1] + std::max(ses[i], ses[i - 1]);
    return {pass, "mean regret at T=5,10,15,20: " + join(means) + " (SE " + join(ses, "{:.2g}") + ")"};
}

Outcome grid_rate() {
    // Noiseless reduced form W(b) = prop b + prop_sq b^2; the worst case over
    // optimum locations removes lucky alignments of b* with the grid.
    const double prop_sq = -2.0, eta = 0.01;
    std::vector<double> constants;
    for (std::size_t K : {10u, 20u, 40u}) {
        auto clusters = line_clusters(K);
        double worst = 0.0;
        for (int i = 0; i <= 40; ++i) {
            const double target = 0.3 + 0.01 * i;
            OutcomeModel m;
            m.variant = OutcomeVariant::reduced_form;
            m.reduced.prop = -2.0 * prop_sq * target;
            m.reduced.prop_sq = prop_sq;
            auto run = run_grid_search(clusters, m, PolicyClass::constant(eta, 1.0 - eta), eta);
            const double b = run.beta_hat_ow[0];
            worst = std::max(worst, -prop_sq * (b - target) * (b - target));
        }
        constants.push_back(static_cast<double>(K * K) * worst);
    }
    const double spread = max_over_min(constants);
    return {spread <= 3.0, fmt::format("K^2 * regret at K=10,20,40: {}; max/min {:.2f}", join(constants), spread)};
}

Outcome dynamic_rate() {
    OutcomeModel m;
    m.variant = OutcomeVariant::reduced_form;
    m.reduced.intercept = 0.2;
    m.reduced.prop = 1.0;
    m.reduced.prop_sq = -1.2;
    m.reduced.lag = 0.6;
    m.reduced.lag_sq = -0.8;
    m.reduced.cross = 0.5;
    const auto& r = m.reduced;
    auto gamma = [&r](double current, double previous) {
        return r.intercept + r.prop * current + r.prop_sq * current * current + r.lag * previous +
               r.lag_sq * previous * previous + r.cross * current * previous;
    };
    std::vector<double> constants;
    for (std::size_t K : {27u, 48u, 75u}) {
        auto surrogate = run_triad_experiment(line_clusters(K), m, 1e-4);
        double sup = 0.0;
        const int M = 101;
        for (int a = 0; a < M; ++a) {
            for (int b = 0; b < M; ++b) {
                const double b1 = a / double(M - 1), b2 = b / double(M - 1);
                sup = std::max(sup, std::abs(surrogate_gamma(surrogate, b2, b1) - gamma(b1, b2)));
            }
        }
        constants.push_back(static_cast<double>(K) * sup);
    }
    const double spread = max_over_min(constants);
    return {spread <= 3.0, fmt::format("K * sup error at K=27,48,75: {}; max/min {:.2f}", join(constants), spread)};
}

struct QuantileCase {
    int df;
    double p;
    double q;
};

// Frozen output of tests/oracles/t_quantile_reference.py (mpmath, 40 digits).
const QuantileCase kQuantiles[] = {
    {1, 0.975, 12.706204736174693314},  {1, 0.9, 3.0776835371752541331},    {2, 0.975, 4.3026527297494617894},
    {2, 0.995, 9.9248432009182886403},  {3, 0.95, 2.353363434801822899},    {4, 0.975, 2.7764451051977934898},
    {5, 0.99, 3.3649299989072177787},   {6, 0.9, 1.4397557472651485757},    {7, 0.975, 2.3646242515927847379},
    {9, 0.975, 2.2621571627982049992},  {9, 0.6, 0.26095533647391095206},   {10, 0.999, 4.1437004940465891091},
    {14, 0.975, 2.1447866879178033515}, {19, 0.95, 1.7291328115213690339},  {19, 0.9995, 3.8834058525921311436},
    {29, 0.975, 2.0452296421327038745}, {39, 0.99, 2.4258414097356303792},  {60, 0.975, 2.0002978220142601041},
    {120, 0.9, 1.288646233656378035},   {9, 0.0125, -2.6850108468164552724},
};

struct MultiCase {
    int clusters;
    int coords;
    double alpha;
    double critical;
};

const MultiCase kMulti[] = {
    {40, 2, 0.05, 2.6772336624794948434}, {40, 4, 0.05, 4.2904652335439948408}, {24, 3, 0.1, 3.690247475323307041},
    {60, 5, 0.05, 4.0115120721500578593}, {100, 2, 0.01, 3.0894667315459156917},
};

Outcome inference_kernel() {
    double worst_q = 0.0, worst_multi = 0.0;
    for (const auto& c : kQuantiles) worst_q = std::max(worst_q, std::abs(t_quantile(c.df, c.p) - c.q));
    bool reduces = true;
    for (int K = 4; K <= 80; K += 2) {
        for (double alpha : {0.01, 0.05, 0.1, 0.2})
            reduces = reduces && multi_coord_critical_value(K, 1, alpha) == t_quantile(K / 2 - 1, 1.0 - alpha / 2.0);
    }
    for (const auto& c : kMulti)
        worst_multi = std::max(worst_multi, std::abs(multi_coord_critical_value(c.clusters, c.coords, c.alpha) - c.critical));
    const bool pass = worst_q < 1e-6 && reduces && worst_multi < 1e-10;
    return {pass, fmt::format("max quantile error {:.1e}; l=1 reduction {}; max multi-coordinate error {:.1e}", worst_q,
                              reduces ? "exact" : "BROKEN", worst_multi)};
}

Outcome unconfoundedness_audit() {
    std::mt19937_64 rng(1101);
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    auto integer = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    int passed = 0, bug_caught = 0, bug_configs = 0;
    const int configs = 50;
    for (int c = 0; c < configs; ++c) {
        const int T = integer(1, 5);
        const int K = 2 * T + 2 + 2 * integer(0, 2);
        auto clusters = testing::geometric_clusters(static_cast<std::size_t>(K), rng(), static_cast<std::size_t>(integer(40, 120)),
                                                    uniform(1.0, 4.0));
        OutcomeModel m = OutcomeModel::synthetic_default();
        m.noise_sigma = uniform(0.0, 2.0);
        m.phi.linear = uniform(0.0, 2.0);
        m.phi.quadratic = -uniform(0.5, 2.0);
        const double eta = uniform(0.02, 0.15);
        const Beta beta0{uniform(eta, 1.0 - eta)};
        LearningSchedule schedule;
        switch (integer(0, 2)) {
            case 0: schedule.variant = ScheduleVariant::sim_default; schedule.scale = uniform(0.05, 0.3); break;
            case 1: schedule.variant = ScheduleVariant::inverse_wave; schedule.J = uniform(0.1, 1.0); break;
            default: schedule.variant = ScheduleVariant::constant_smooth; schedule.tau = uniform(2.0, 20.0); break;
        }
        const std::size_t sample = rng() % 2 == 0 ? 0 : static_cast<std::size_t>(integer(10, 40));
        auto runner = [&](GradientSource source) {
            return [&, source](const std::vector<ClusterPopulation>& cs) {
                AdaptiveOptions options;
                options.sampling = {sample, false};
                options.source = source;
                return run_adaptive(cs, m, PolicyClass::constant(), beta0, T, eta, schedule, options);
            };
        };
        auto valid = runner(nullptr);
        bool ok = verify_unconfoundedness(valid(clusters).history).ok;
        for (std::size_t k = 0; k < clusters.size(); ++k) ok = ok && perturbation_audit(valid, clusters, k, rng());
        passed += ok ? 1 : 0;

        if (T >= 2) {
            auto own = runner([](int g, int) { return g; });
            bool caught = false;
            for (std::size_t k = 0; k < clusters.size() && !caught; ++k) caught = !perturbation_audit(own, clusters, k, rng());
            bug_caught += caught ? 1 : 0;
            ++bug_configs;
        }
    }
    // The injected double: every pair feeds on its own gradient.
    auto clusters = testing::geometric_clusters(12, 21, 150);
    auto model = OutcomeModel::synthetic_default();
    auto own = [&](const std::vector<ClusterPopulation>& cs) {
        AdaptiveOptions options;
        options.source = [](int g, int) { return g; };
        return run_adaptive(cs, model, PolicyClass::constant(), {0.4}, 5, 0.1, LearningSchedule{}, options);
    };
    bool double_caught = false;
    for (std::size_t k = 0; k < clusters.size(); ++k) double_caught = double_caught || !perturbation_audit(own, clusters, k, 0xF00D + k);
    const bool pass = passed == configs && double_caught;
    return {pass, fmt::format("{}/{} valid configurations pass; injected bug caught: {} (and in {}/{} random configs)", passed,
                              configs, double_caught ? "yes" : "NO", bug_caught, bug_configs)};
}

Outcome mmd_properties() {
    std::mt19937_64 rng(1202);
    std::normal_distribution<double> normal;
    bool zero = true, symmetric = true;
    double worst_rel = 0.0;
    for (std::size_t n : {2u, 3u, 10u, 25u, 50u}) {
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> a(n), b(n);
            for (auto& v : a) v = normal(rng);
            for (auto& v : b) v = 0.5 + 1.3 * normal(rng);
            const double h = 0.3 + std::abs(normal(rng));
            zero = zero && mmd_squared(a, a) == 0.0 && mmd_squared(a, a, {h}) == 0.0;
            symmetric = symmetric && mmd_squared(a, b) == mmd_squared(b, a) && mmd_squared(a, b, {h}) == mmd_squared(b, a, {h});
            // Brute force: the four kernel sums taken separately.
            auto k = [h](double u, double v) { return std::exp(-(u - v) * (u - v) / (2.0 * h * h)); };
            double aa = 0, bb = 0, ab = 0, ba = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    aa += k(a[i], a[j]);
                    bb += k(b[i], b[j]);
                    ab += k(a[i], b[j]);
                    ba += k(a[j], b[i]);
                }
            }
            const double brute = (aa + bb - ab - ba) / static_cast<double>(n * (n - 1));
            const double got = mmd_squared(a, b, {h});
            worst_rel = std::max(worst_rel, std::abs(got - brute) / std::max(1.0, std::abs(brute)));
        }
    }
    const bool pass = zero && symmetric && worst_rel < 1e-12;
    return {pass, fmt::format("exact zero {}; symmetric {}; max deviation from brute force {:.1e}", zero ? "yes" : "NO",
                              symmetric ? "yes" : "NO", worst_rel)};
}

Outcome determinism() {
    const std::string common = "replications = 6\nseed = 13\n[population]\nsize = 200\n";
    const std::vector<std::string> texts{
        "name = \"sw\"\nstudy = \"single_wave\"\n" + common +
            "[design]\nK = 10\nn = 150\neta = 0.1\nbeta = \"optimum\"\n[oracle]\nclusters = 20\n",
        "name = \"ad\"\nstudy = \"adaptive\"\n" + common +
            "[design]\nK = \"2T+2\"\nT = 5\nn = 150\neta = 0.1\nbeta0 = [0.2]\ncompare_grid = true\n[oracle]\nclusters = 20\n",
        "name = \"st\"\nstudy = \"staggered\"\n" + common +
            "[design]\nK = 10\nT = 5\nn = 150\neta = 0.1\nbeta0 = [0.3]\n[oracle]\nclusters = 20\n",
        "name = \"gs\"\nstudy = \"grid_search\"\n" + common + "[design]\nK = 10\nn = 150\neta = 0.05\n[oracle]\nclusters = 20\n",
        "name = \"dy\"\nstudy = \"dynamic\"\n" + common +
            "[model]\nvariant = \"dynamic_carryover\"\ncarryover = [0.5, -0.5]\n"
            "[design]\nK = 12\neta = 0.05\n[dynamic]\nhorizon = 5\nstarts = 3\ntruth_grid = 11\n[oracle]\nclusters = 20\n",
        "name = \"pt\"\nstudy = \"adaptive\"\n" + common +
            "[model]\nvariant = \"dynamic_carryover\"\ncarryover = [0.5, -0.5]\n"
            "[design]\nK = \"2T+2\"\nT = 6\nn = 150\neta = 0.1\nbeta0 = [0.3]\npatient = true\n[oracle]\nclusters = 20\n",
    };
    int identical = 0;
    std::string broken;
    for (const auto& text : texts) {
        auto s = scenario_from(text);
        auto csv = [](const StudyOutput& out) {
            std::ostringstream o;
            write_rows_csv(out.rows, o);
            return o.str() + out.summary.dump();
        };
        if (csv(run_study(s, 1)) == csv(run_study(s, 8))) {
            ++identical;
        } else {
            broken += " " + s.name;
        }
    }
    return {identical == static_cast<int>(texts.size()),
            fmt::format("{}/{} studies bit-identical at 1 and 8 threads{}", identical, texts.size(),
                        broken.empty() ? "" : ";  differing:" + broken)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"size control", size_control},
        {"pairing bias cancellation", pairing_cancellation},
        {"direct-effect bias", direct_effect_bias},
        {"spillover bias O(eta)", spillover_bias_rate},
        {"adaptive convergence", adaptive_convergence},
        {"in-sample regret vs grid search", in_sample_regret},
        {"out-of-sample regret curve", out_of_sample_curve},
        {"grid-search rate 1/K^2", grid_rate},
        {"dynamic surrogate rate 1/K", dynamic_rate},
        {"inference kernel", inference_kernel},
        {"unconfoundedness audit", unconfoundedness_audit},
        {"MMD properties", mmd_properties},
        {"determinism across threads", determinism},
    };
    // Optional arguments select criteria by number.
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::stoi(argv[i]));

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int number = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        fmt::print("{} {:2d} {}: {} [{:.1f}s]\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first, o.detail, seconds);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
