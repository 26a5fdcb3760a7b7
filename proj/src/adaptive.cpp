#include "netpolicy/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

double norm_rescaling_epsilon(double gamma_n, double eta, double n) {
    require(gamma_n >= 0.0 && eta > 0.0 && n > 0.0, "epsilon needs gamma_N >= 0, eta > 0 and n > 0");
    return std::sqrt(gamma_n / (eta * eta * n)) + eta;
}

double learning_rate(const LearningSchedule& s, int wave, std::span<const double> v_hat) {
    require(wave >= 1, "wave index starts at 1");
    double sq = 0.0;
    for (double v : v_hat) sq += v * v;
    const double norm = std::sqrt(sq);
    switch (s.variant) {
        case ScheduleVariant::inverse_wave:
            return s.J / wave;
        case ScheduleVariant::norm_rescaled: {
            if (norm == 0.0) return 0.0;
            require(s.horizon_waves >= 1, "norm_rescaled needs the number of waves");
            const double h = s.horizon_waves;
            if (sq > s.c / std::pow(h, 1.0 - s.v) - s.epsilon) return s.J / (std::pow(h, 0.5 - s.v / 2.0) * norm);
            return 0.0;
        }
        case ScheduleVariant::constant_smooth:
            require(s.tau > 0.0, "tau must be positive");
            return 1.0 / s.tau;
        case ScheduleVariant::sim_default:
            if (norm == 0.0) return 0.0;
            return s.scale / (std::sqrt(static_cast<double>(wave)) * norm);
    }
    return 0.0;
}

int circular_index(int k, int clusters) {
    require(clusters >= 1 && k >= 1 && k <= 2 * clusters, "circular index needs 1 <= k <= 2K");
    return k <= clusters ? k : k - clusters;
}

Beta project_box(std::span<const double> beta, std::span<const double> lower, std::span<const double> upper) {
    require(beta.size() == lower.size() && beta.size() == upper.size(), "projection bounds have the wrong dimension");
    Beta out(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) {
        require(lower[j] <= upper[j], "projection lower bound exceeds upper bound");
        out[j] = std::clamp(beta[j], lower[j], upper[j]);
    }
    return out;
}

namespace {

std::uint64_t digest(const std::vector<double>& y) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (double v : y) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFF;
            h *= 0x100000001B3ULL;
        }
    }
    return h;
}

Beta axpy(const Beta& x, double a, const Beta& v) {
    Beta out = x;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += a * v[j];
    return out;
}

struct Box {
    Beta lower, upper;
    Beta operator()(const Beta& b) const { return project_box(b, lower, upper); }
};

Box shrunk_box(const PolicyClass& policy, double eta) {
    Box box{policy.lower, policy.upper};
    for (std::size_t j = 0; j < policy.dim(); ++j) {
        box.lower[j] += eta;
        box.upper[j] -= eta;
        require(box.lower[j] <= box.upper[j], "eta is too large for the policy box");
    }
    return box;
}

void check_common(const std::vector<ClusterPopulation>& clusters, const PolicyClass& policy, const Beta& beta0,
                  double eta) {
    policy.validate();
    require(!clusters.empty() && clusters.size() % 2 == 0, "the number of clusters must be even and positive");
    require(eta > 0.0, "eta must be positive");
    require(beta0.size() == policy.dim(), "beta0 has the wrong dimension for the policy");
    for (std::size_t j = 0; j < policy.dim(); ++j) {
        Beta up = beta0, down = beta0;
        up[j] += eta;
        down[j] -= eta;
        require(policy.valid_probabilities(up) && policy.valid_probabilities(down),
                "beta0 +/- eta must give treatment probabilities in [0,1]");
    }
}

std::vector<ClusterField> make_fields(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                                      const PolicyClass& policy, const SamplingOptions& sampling) {
    std::vector<ClusterField> fields;
    fields.reserve(clusters.size());
    for (const auto& c : clusters) fields.emplace_back(c, model, policy, sampling);
    return fields;
}

std::vector<std::optional<ClusterSample>> observe_baseline(std::vector<ClusterField>& fields, const Beta& beta0,
                                                           BaselineMode mode) {
    std::vector<std::optional<ClusterSample>> base(fields.size());
    if (mode == BaselineMode::with_baseline) {
        for (std::size_t k = 0; k < fields.size(); ++k) base[k] = fields[k].observe(beta0, 0);
    }
    return base;
}

// Observes one pair in one period and logs both clusters.
PairPanel observe_logged(std::vector<ClusterField>& fields, const std::vector<std::optional<ClusterSample>>& base,
                         const PolicyClass& policy, const PairDesign& design, int period, int wave,
                         int previous_pair, int source, AdaptiveRun& run) {
    PairPanel panel{policy, design, {}, {}};
    for (int h = 0; h < 2; ++h) {
        const int k = design.cluster_ids[h];
        Beta used = design.perturbed(h);
        panel.outcome[h] = fields[k].observe(used, period);
        panel.baseline[h] = base[k];
        run.path[k][period - 1] = used;
        AdaptiveEvent e;
        e.wave = wave;
        e.period = period;
        e.cluster = k;
        e.pair = design.pair_id;
        e.coordinate = static_cast<int>(design.coordinate);
        e.beta_used = std::move(used);
        e.beta_check = design.base_beta;
        e.previous_pair = previous_pair;
        e.gradient_source = source;
        e.outcome_mean = panel.outcome[h].mean();
        e.outcome_digest = digest(panel.outcome[h].y);
        run.history.push_back(std::move(e));
    }
    return panel;
}

// Shared engine of run_adaptive (hold = 1) and run_patient_gd (hold = 2).
AdaptiveRun run_waves(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                      const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                      LearningSchedule schedule, const AdaptiveOptions& options, int hold) {
    check_common(clusters, policy, beta0, eta);
    const int K = static_cast<int>(clusters.size());
    const int p = static_cast<int>(policy.dim());
    require(periods >= p * hold && periods % (p * hold) == 0,
            "the number of periods must be a positive multiple of the parameter dimension" +
                std::string(hold > 1 ? " times two" : ""));
    const int waves = periods / (p * hold);
    require(K >= 2 * (waves + 1), "need K >= 2(T/p + 1) clusters so that no pair's parameter depends on its own outcomes");
    const int G = K / 2;
    if (schedule.horizon_waves == 0) schedule.horizon_waves = waves;
    GradientSource source = options.source ? options.source : [](int g, int pairs) { return (g + 1) % pairs; };
    const Box box = shrunk_box(policy, eta);

    AdaptiveRun run;
    run.waves = waves;
    run.path.assign(K, std::vector<Beta>(periods));
    auto fields = make_fields(clusters, model, policy, options.sampling);
    auto base = observe_baseline(fields, beta0, options.mode);

    std::vector<Beta> check(G, box(beta0));
    std::vector<Beta> grad(G, Beta(p, 0.0));
    std::vector<int> src(G, -1);
    for (int w = 1; w <= waves; ++w) {
        if (w > 1) {
            std::vector<Beta> next(G);
            for (int g = 0; g < G; ++g) {
                src[g] = source(g, G);
                require(src[g] >= 0 && src[g] < G, "gradient source out of range");
                const Beta& v = grad[src[g]];
                next[g] = box(axpy(check[g], learning_rate(schedule, w, v), v));
            }
            check = std::move(next);
        }
        run.beta_check.push_back(check);
        std::vector<Beta> fresh(G, Beta(p, 0.0));
        for (int j = 0; j < p; ++j) {
            for (int r = 0; r < hold; ++r) {
                const int t = ((w - 1) * p + j) * hold + r + 1;
                for (int g = 0; g < G; ++g) {
                    auto design = make_pair_design(g, {2 * g, 2 * g + 1}, check[g], eta, j, policy);
                    auto panel = observe_logged(fields, base, policy, design, t, w, w > 1 ? g : -1, src[g], run);
                    if (r == hold - 1) fresh[g][j] = marginal_effect_pair(panel, options.mode);
                }
            }
        }
        grad = std::move(fresh);
        run.gradients.push_back(grad);
    }
    std::vector<Beta> last(G);
    for (int g = 0; g < G; ++g) {
        const Beta& v = grad[source(g, G)];
        last[g] = box(axpy(check[g], learning_rate(schedule, waves + 1, v), v));
    }
    run.beta_check.push_back(last);
    run.beta_hat.assign(p, 0.0);
    for (int g = 0; g < G; ++g) {
        for (int j = 0; j < p; ++j) run.beta_hat[j] += last[g][j] / G;
    }
    return run;
}

}  // namespace

AdaptiveRun run_adaptive(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                         const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                         LearningSchedule schedule, const AdaptiveOptions& options) {
    return run_waves(clusters, model, policy, beta0, periods, eta, schedule, options, 1);
}

AdaptiveRun run_patient_gd(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                           const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                           LearningSchedule schedule, const AdaptiveOptions& options) {
    require(model.variant == OutcomeVariant::dynamic_carryover || model.variant == OutcomeVariant::reduced_form,
            "patient gradient descent needs a dynamic outcome model");
    require(periods % 2 == 0, "patient gradient descent needs an even number of periods");
    return run_waves(clusters, model, policy, beta0, periods, eta, schedule, options, 2);
}

AdaptiveRun run_staggered(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                          const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                          LearningSchedule schedule, std::uint64_t seed, const AdaptiveOptions& options) {
    check_common(clusters, policy, beta0, eta);
    require(policy.dim() == 1, "staggered adoption is implemented for scalar policies");
    require(periods >= 1, "need at least one iteration");
    const int K = static_cast<int>(clusters.size());
    const int G = K / 2;
    require(G >= periods, "staggered adoption needs an unused pair for every iteration (K >= 2T)");
    if (schedule.horizon_waves == 0) schedule.horizon_waves = periods;
    const Box box = shrunk_box(policy, eta);

    std::vector<int> order(G);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "staggered_order"));
    for (int i = G - 1; i > 0; --i) {
        int j = static_cast<int>(uniform01(rng) * (i + 1));
        if (j > i) j = i;
        std::swap(order[i], order[j]);
    }

    AdaptiveRun run;
    run.waves = periods;
    run.path.assign(K, std::vector<Beta>(periods));
    auto fields = make_fields(clusters, model, policy, options.sampling);
    auto base = observe_baseline(fields, beta0, options.mode);

    Beta check = box(beta0);
    Beta grad(1, 0.0);
    for (int t = 1; t <= periods; ++t) {
        const int prev = t > 1 ? order[t - 2] : -1;
        if (t > 1) check = box(axpy(check, learning_rate(schedule, t, grad), grad));
        run.beta_check.emplace_back(G, check);
        const int g = order[t - 1];
        auto design = make_pair_design(g, {2 * g, 2 * g + 1}, check, eta, 0, policy);
        auto panel = observe_logged(fields, base, policy, design, t, t, prev, prev, run);
        grad = {marginal_effect_pair(panel, options.mode)};
        std::vector<Beta> row(G, Beta(1, 0.0));
        row[g] = grad;
        run.gradients.push_back(std::move(row));
    }
    check = box(axpy(check, learning_rate(schedule, periods + 1, grad), grad));
    run.beta_check.emplace_back(G, check);
    run.beta_hat = check;
    return run;
}

UnconfoundednessReport verify_unconfoundedness(const std::vector<AdaptiveEvent>& history) {
    UnconfoundednessReport report;
    auto fail = [&](const std::string& msg) {
        report.ok = false;
        report.violations.push_back(msg);
    };
    // First event per (wave, pair) carries the update edges.
    std::map<std::pair<int, int>, const AdaptiveEvent*> nodes;
    for (const auto& e : history) {
        auto [it, inserted] = nodes.emplace(std::make_pair(e.wave, e.pair), &e);
        if (!inserted) {
            const auto& first = *it->second;
            if (first.beta_check != e.beta_check) {
                fail("wave " + std::to_string(e.wave) + " pair " + std::to_string(e.pair) +
                     ": clusters of the pair hold different parameters");
            }
            if (first.previous_pair != e.previous_pair || first.gradient_source != e.gradient_source) {
                fail("wave " + std::to_string(e.wave) + " pair " + std::to_string(e.pair) +
                     ": inconsistent update edges within the pair");
            }
        }
    }
    std::map<std::pair<int, int>, std::set<int>> deps;
    for (auto& [key, e] : nodes) {
        auto [w, g] = key;
        std::set<int> d;
        auto inherit = [&](int other) {
            auto it = deps.find({w - 1, other});
            if (it == deps.end()) {
                fail("wave " + std::to_string(w) + " pair " + std::to_string(g) + ": history lacks wave " +
                     std::to_string(w - 1) + " of pair " + std::to_string(other));
                return;
            }
            d.insert(it->second.begin(), it->second.end());
        };
        if (e->previous_pair >= 0) inherit(e->previous_pair);
        if (e->gradient_source >= 0) {
            d.insert(e->gradient_source);
            inherit(e->gradient_source);
        }
        if (d.count(g)) {
            fail("wave " + std::to_string(w) + " pair " + std::to_string(g) +
                 ": parameter depends on the pair's own outcomes");
        }
        deps[key] = std::move(d);
    }
    return report;
}

bool perturbation_audit(const AdaptiveRunner& run, const std::vector<ClusterPopulation>& clusters, std::size_t cluster,
                        std::uint64_t replacement_stream) {
    require(cluster < clusters.size(), "cluster index out of range");
    auto changed = clusters;
    require(changed[cluster].stream_seed != replacement_stream, "replacement stream must differ from the original");
    changed[cluster].stream_seed = replacement_stream;
    auto a = run(clusters);
    auto b = run(changed);
    return a.path.at(cluster) == b.path.at(cluster);
}

void write_history_jsonl(const std::vector<AdaptiveEvent>& history, std::ostream& out) {
    for (const auto& e : history) {
        nlohmann::json j = {{"wave", e.wave},
                            {"period", e.period},
                            {"cluster", e.cluster},
                            {"pair", e.pair},
                            {"coordinate", e.coordinate},
                            {"beta_used", e.beta_used},
                            {"beta_check", e.beta_check},
                            {"previous_pair", e.previous_pair},
                            {"gradient_source", e.gradient_source},
                            {"outcome_mean", e.outcome_mean},
                            {"outcome_digest", e.outcome_digest}};
        out << j.dump() << '\n';
    }
}

std::vector<AdaptiveEvent> read_history_jsonl(std::istream& in) {
    std::vector<AdaptiveEvent> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        AdaptiveEvent e;
        e.wave = j.at("wave");
        e.period = j.at("period");
        e.cluster = j.at("cluster");
        e.pair = j.at("pair");
        e.coordinate = j.at("coordinate");
        e.beta_used = j.at("beta_used").get<Beta>();
        e.beta_check = j.at("beta_check").get<Beta>();
        e.previous_pair = j.at("previous_pair");
        e.gradient_source = j.at("gradient_source");
        e.outcome_mean = j.at("outcome_mean");
        e.outcome_digest = j.at("outcome_digest");
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace netpolicy
