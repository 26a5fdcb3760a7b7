#include "netpolicy/field.hpp"

#include <algorithm>
#include <numeric>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

ClusterField::ClusterField(const ClusterPopulation& population, const OutcomeModel& model, const PolicyClass& policy,
                           SamplingOptions sampling)
    : population_(&population), model_(&model), policy_(&policy), sampling_(sampling) {
    require(sampling.sample_size <= population.size(), "sample size exceeds cluster size");
    previous_.treated.assign(population.size(), 0);
    previous_.propensity.assign(population.size(), 0.0);
}

std::vector<std::size_t> ClusterField::draw_units(int period) {
    const std::size_t n_all = population_->size();
    const std::size_t n = sampling_.sample_size == 0 ? n_all : sampling_.sample_size;
    if (sampling_.reuse_units && panel_units_) return *panel_units_;
    std::vector<std::size_t> idx(n_all);
    std::iota(idx.begin(), idx.end(), 0);
    if (n < n_all) {
        // Partial Fisher-Yates, then restore unit order.
        Rng rng(derive_seed(population_->stream_seed, stream::sampling, static_cast<std::uint64_t>(period)));
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n_all - i));
            if (j >= n_all) j = n_all - 1;
            std::swap(idx[i], idx[j]);
        }
        idx.resize(n);
        std::sort(idx.begin(), idx.end());
    }
    if (sampling_.reuse_units) panel_units_ = idx;
    return idx;
}

ClusterSample ClusterField::observe(std::span<const double> beta, int period) {
    const auto p = static_cast<std::uint64_t>(period);
    const std::uint64_t root = population_->stream_seed;
    Assignment now = assign_treatments(*population_, *policy_, beta, derive_seed(root, stream::assignment, p));
    auto y = realize_outcomes(*population_, *model_, now, period, &previous_, derive_seed(root, stream::noise, p));
    ClusterSample s;
    for (std::size_t i : draw_units(period)) {
        s.y.push_back(y[i]);
        s.d.push_back(now.treated[i]);
        s.x.push_back(population_->covariates[i]);
    }
    previous_ = std::move(now);
    return s;
}

PairPanel observe_pair(ClusterField& first, ClusterField& second, const PolicyClass& policy,
                       const PairDesign& design, int period, const std::optional<Beta>& baseline_beta) {
    PairPanel panel{policy, design, {}, {}};
    ClusterField* fields[2] = {&first, &second};
    for (int h = 0; h < 2; ++h) {
        if (baseline_beta) panel.baseline[h] = fields[h]->observe(*baseline_beta, 0);
    }
    for (int h = 0; h < 2; ++h) panel.outcome[h] = fields[h]->observe(design.perturbed(h), period);
    return panel;
}

}  // namespace netpolicy
