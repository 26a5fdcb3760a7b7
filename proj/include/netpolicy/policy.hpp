#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netpolicy/population.hpp"

namespace netpolicy {

using Beta = std::vector<double>;

enum class PolicyVariant { constant_prob, per_type_prob, budget_complement };

struct PolicyClass {
    PolicyVariant variant = PolicyVariant::constant_prob;
    std::vector<double> lower{0.0};
    std::vector<double> upper{1.0};

    static PolicyClass constant(double lo = 0.0, double hi = 1.0);
    // pi(x; beta) = beta_x for x in {0, ..., types-1}.
    static PolicyClass per_type(std::size_t types, double lo = 0.0, double hi = 1.0);
    // pi(x; beta) = x beta + (1 - x)(1 - beta) for binary x.
    static PolicyClass budget_complement(double lo = 0.0, double hi = 1.0);

    std::size_t dim() const { return lower.size(); }
    void validate() const;
    bool contains(std::span<const double> beta) const;

    // No range check; see assign_treatments and make_pair_design.
    double propensity(double x, std::span<const double> beta) const;
    // Covariate values the policy is defined on; empty means any value.
    std::vector<double> covariate_levels() const;
    // True when propensity(x, beta) is in [0,1] for every supported x
    // (for constant_prob: beta itself).
    bool valid_probabilities(std::span<const double> beta) const;
};

struct Assignment {
    std::vector<std::uint8_t> treated;
    std::vector<double> propensity;
};

// Independent Bernoulli(pi(X_i; beta)) draws for every unit of the cluster.
Assignment assign_treatments(const ClusterPopulation& cluster, const PolicyClass& policy,
                             std::span<const double> beta, std::uint64_t seed);

// Deterministic assignment with given treatments; propensities from the policy.
Assignment fixed_assignment(const ClusterPopulation& cluster, const PolicyClass& policy,
                            std::span<const double> beta, std::vector<std::uint8_t> treated);

}  // namespace netpolicy
