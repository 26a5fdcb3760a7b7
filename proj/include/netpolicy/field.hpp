#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "netpolicy/estimators.hpp"
#include "netpolicy/outcomes.hpp"
#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

struct SamplingOptions {
    std::size_t sample_size = 0;  // 0 observes every unit
    bool reuse_units = false;     // panel: keep the first period's units
};

// One cluster's side of an experiment: assigns, realizes and samples period
// by period. All randomness comes from the cluster's stream_seed and the
// period index, so a cluster's draws never depend on other clusters.
class ClusterField {
public:
    ClusterField(const ClusterPopulation& population, const OutcomeModel& model, const PolicyClass& policy,
                 SamplingOptions sampling = {});

    ClusterSample observe(std::span<const double> beta, int period);

    const ClusterPopulation& population() const { return *population_; }

private:
    std::vector<std::size_t> draw_units(int period);

    const ClusterPopulation* population_;
    const OutcomeModel* model_;
    const PolicyClass* policy_;
    SamplingOptions sampling_;
    Assignment previous_;  // nobody treated before the first observed period
    std::optional<std::vector<std::size_t>> panel_units_;
};

// Builds the pair's panel: optional baseline at `baseline_beta` in period 0,
// then the perturbed parameters of `design` in `period`.
PairPanel observe_pair(ClusterField& first, ClusterField& second, const PolicyClass& policy,
                       const PairDesign& design, int period, const std::optional<Beta>& baseline_beta);

}  // namespace netpolicy
