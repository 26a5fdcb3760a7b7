#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netpolicy/policy.hpp"

namespace netpolicy {

// min(gamma * sqrt(2 sigma^2 / c) * n^(-1/3), cap)
double rule_of_thumb_eta(double n, double sigma_sq, double curvature, std::optional<double> gamma, double cap);

struct PairDesign {
    int pair_id = 0;
    std::array<int, 2> cluster_ids{0, 1};
    Beta base_beta;
    double eta = 0.0;
    std::size_t coordinate = 0;
    // +1 for the first cluster, -1 for the second; other values only appear
    // in deliberately unpaired test variants.
    std::array<int, 2> signs{+1, -1};

    // beta + sign_h * eta * e_j
    Beta perturbed(int h) const;
};

// Validated construction: eta > 0 and both perturbed parameters give
// probabilities in [0,1] for every covariate value of the policy.
PairDesign make_pair_design(int pair_id, std::array<int, 2> cluster_ids, Beta base_beta, double eta,
                            std::size_t coordinate, const PolicyClass& policy);

struct GaussianKernel {
    // Bandwidth; nullopt selects the median pairwise distance of the pooled sample.
    std::optional<double> bandwidth;
};

double median_heuristic_bandwidth(std::span<const double> pooled);

// Unbiased U-statistic (1/(n(n-1))) sum_{i != j} h(x_i, y_i, x_j, y_j).
double mmd_squared(std::span<const double> a, std::span<const double> b, const GaussianKernel& kernel = {});

enum class MatchStrategy { index_order, mmd_greedy, by_type };

struct ClusterPair {
    int first = 0;
    int second = 0;
    bool operator==(const ClusterPair&) const = default;
};

// covariates[k] holds cluster k's covariate sample (mmd_greedy only);
// types[k] its type label (by_type only). Pairs use 0-based cluster indices.
std::vector<ClusterPair> match_clusters(std::size_t cluster_count, MatchStrategy strategy,
                                        const std::vector<std::vector<double>>& covariates = {},
                                        const std::vector<std::string>& types = {});

}  // namespace netpolicy
