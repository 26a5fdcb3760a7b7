#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "netpolicy/estimators.hpp"
#include "netpolicy/field.hpp"
#include "netpolicy/outcomes.hpp"
#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

enum class ScheduleVariant { inverse_wave, norm_rescaled, constant_smooth, sim_default };

struct LearningSchedule {
    ScheduleVariant variant = ScheduleVariant::sim_default;
    double J = 1.0;      // inverse_wave, norm_rescaled
    double scale = 0.1;  // sim_default: a / (sqrt(w) |V|)
    double tau = 1.0;    // constant_smooth: 1 / tau
    // norm_rescaled: step J / (H^(1/2 - v/2) |V|) while |V|^2 > c / H^(1 - v) - epsilon,
    // with H the number of waves (the runners fill it in when left at 0).
    double v = 0.0;
    double c = 1.0;
    double epsilon = 0.0;
    int horizon_waves = 0;
};

// sqrt(gamma_N / (eta^2 n)) + eta
double norm_rescaling_epsilon(double gamma_n, double eta, double n);

double learning_rate(const LearningSchedule& schedule, int wave, std::span<const double> v_hat);

// 1-based: k for k <= K, k - K for K < k <= 2K.
int circular_index(int k, int clusters);

Beta project_box(std::span<const double> beta, std::span<const double> lower, std::span<const double> upper);

// One cluster's observation in one period. `pair` and the source fields are
// 0-based pair indices; -1 when no gradient fed the parameter.
struct AdaptiveEvent {
    int wave = 0;
    int period = 0;
    int cluster = 0;
    int pair = 0;
    int coordinate = 0;
    Beta beta_used;
    Beta beta_check;
    int previous_pair = -1;    // whose wave-1 parameter this one continues
    int gradient_source = -1;  // whose wave-1 gradient was applied
    double outcome_mean = 0.0;
    std::uint64_t outcome_digest = 0;
};

struct AdaptiveRun {
    Beta beta_hat;
    // beta_check[w][g] for w = 0 .. waves (the last entry is the final update).
    std::vector<std::vector<Beta>> beta_check;
    std::vector<std::vector<Beta>> gradients;  // gradients[w][g], w = 0 .. waves-1
    // path[k][t-1]: parameter assigned to cluster k in period t (empty if unused).
    std::vector<std::vector<Beta>> path;
    std::vector<AdaptiveEvent> history;
    int waves = 0;
};

// Pair g's update reads the gradient of pair source(g, G). The default is the
// next pair on the circle; tests swap in miswired variants.
using GradientSource = std::function<int(int pair, int pairs)>;

struct AdaptiveOptions {
    SamplingOptions sampling;
    BaselineMode mode = BaselineMode::without_baseline;
    GradientSource source;
};

// Randomness comes from each cluster's stream_seed.
AdaptiveRun run_adaptive(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                         const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                         LearningSchedule schedule, const AdaptiveOptions& options = {});

// One fresh pair per iteration in an order drawn from `seed`; one shared parameter.
AdaptiveRun run_staggered(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                          const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                          LearningSchedule schedule, std::uint64_t seed, const AdaptiveOptions& options = {});

// Each wave holds its parameter for two periods and estimates from the second,
// so the gradient targets beta -> Gamma(beta, beta).
AdaptiveRun run_patient_gd(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                           const PolicyClass& policy, const Beta& beta0, int periods, double eta,
                           LearningSchedule schedule, const AdaptiveOptions& options = {});

struct UnconfoundednessReport {
    bool ok = true;
    std::vector<std::string> violations;
};

// Replays the update graph recorded in the history.
UnconfoundednessReport verify_unconfoundedness(const std::vector<AdaptiveEvent>& history);

// Reruns with cluster k's stream replaced and checks that its assigned
// parameters are bit-identical.
using AdaptiveRunner = std::function<AdaptiveRun(const std::vector<ClusterPopulation>&)>;
bool perturbation_audit(const AdaptiveRunner& run, const std::vector<ClusterPopulation>& clusters, std::size_t cluster,
                        std::uint64_t replacement_stream);

void write_history_jsonl(const std::vector<AdaptiveEvent>& history, std::ostream& out);
std::vector<AdaptiveEvent> read_history_jsonl(std::istream& in);

}  // namespace netpolicy
