#include "netpolicy/policy.hpp"

#include <cmath>
#include <sstream>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

PolicyClass PolicyClass::constant(double lo, double hi) {
    PolicyClass p{PolicyVariant::constant_prob, {lo}, {hi}};
    p.validate();
    return p;
}

PolicyClass PolicyClass::per_type(std::size_t types, double lo, double hi) {
    require(types >= 1, "per-type policy needs at least one type");
    PolicyClass p{PolicyVariant::per_type_prob, std::vector<double>(types, lo), std::vector<double>(types, hi)};
    p.validate();
    return p;
}

PolicyClass PolicyClass::budget_complement(double lo, double hi) {
    PolicyClass p{PolicyVariant::budget_complement, {lo}, {hi}};
    p.validate();
    return p;
}

void PolicyClass::validate() const {
    require(!lower.empty() && lower.size() == upper.size(), "policy box bounds must have equal, positive length");
    for (std::size_t j = 0; j < lower.size(); ++j) {
        require(lower[j] <= upper[j], "policy box lower bound exceeds upper bound");
        require(lower[j] >= 0.0 && upper[j] <= 1.0, "policy box must lie inside [0,1]");
    }
    if (variant != PolicyVariant::per_type_prob) require(lower.size() == 1, "this policy variant has dimension 1");
}

bool PolicyClass::contains(std::span<const double> beta) const {
    if (beta.size() != dim()) return false;
    for (std::size_t j = 0; j < dim(); ++j) {
        if (!(beta[j] >= lower[j] && beta[j] <= upper[j])) return false;
    }
    return true;
}

double PolicyClass::propensity(double x, std::span<const double> beta) const {
    switch (variant) {
        case PolicyVariant::constant_prob:
            return beta[0];
        case PolicyVariant::per_type_prob: {
            auto level = static_cast<long>(std::lround(x));
            if (level < 0 || static_cast<std::size_t>(level) >= beta.size() || static_cast<double>(level) != x) {
                std::ostringstream msg;
                msg << "per-type policy has no parameter for covariate value x=" << x;
                throw InvalidArgument(msg.str());
            }
            return beta[static_cast<std::size_t>(level)];
        }
        case PolicyVariant::budget_complement:
            return x * beta[0] + (1.0 - x) * (1.0 - beta[0]);
    }
    return 0.0;
}

std::vector<double> PolicyClass::covariate_levels() const {
    switch (variant) {
        case PolicyVariant::constant_prob:
            return {};
        case PolicyVariant::per_type_prob: {
            std::vector<double> v;
            for (std::size_t j = 0; j < dim(); ++j) v.push_back(static_cast<double>(j));
            return v;
        }
        case PolicyVariant::budget_complement:
            return {0.0, 1.0};
    }
    return {};
}

bool PolicyClass::valid_probabilities(std::span<const double> beta) const {
    if (beta.size() != dim()) return false;
    auto levels = covariate_levels();
    if (levels.empty()) levels.push_back(0.0);
    for (double x : levels) {
        double p = propensity(x, beta);
        if (!(p >= 0.0 && p <= 1.0)) return false;
    }
    return true;
}

namespace {

std::string describe(double x, std::span<const double> beta) {
    std::ostringstream msg;
    msg << "treatment probability outside [0,1] at x=" << x << ", beta=(";
    for (std::size_t j = 0; j < beta.size(); ++j) msg << (j ? ", " : "") << beta[j];
    msg << ")";
    return msg.str();
}

std::vector<double> unit_propensities(const ClusterPopulation& cluster, const PolicyClass& policy,
                                      std::span<const double> beta) {
    require(beta.size() == policy.dim(), "beta has the wrong dimension for the policy");
    std::vector<double> p(cluster.size());
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        double x = cluster.covariates[i];
        p[i] = policy.propensity(x, beta);
        if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw InvalidArgument(describe(x, beta));
    }
    return p;
}

}  // namespace

Assignment assign_treatments(const ClusterPopulation& cluster, const PolicyClass& policy,
                             std::span<const double> beta, std::uint64_t seed) {
    Assignment a;
    a.propensity = unit_propensities(cluster, policy, beta);
    a.treated.resize(cluster.size());
    Rng rng(seed);
    for (std::size_t i = 0; i < cluster.size(); ++i) {
        a.treated[i] = uniform01(rng) < a.propensity[i] ? 1 : 0;
    }
    return a;
}

Assignment fixed_assignment(const ClusterPopulation& cluster, const PolicyClass& policy,
                            std::span<const double> beta, std::vector<std::uint8_t> treated) {
    require(treated.size() == cluster.size(), "treatment vector length must equal cluster size");
    Assignment a;
    a.propensity = unit_propensities(cluster, policy, beta);
    a.treated = std::move(treated);
    return a;
}

}  // namespace netpolicy
