#include "netpolicy/design.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "netpolicy/errors.hpp"

namespace netpolicy {

double rule_of_thumb_eta(double n, double sigma_sq, double curvature, std::optional<double> gamma, double cap) {
    require(n >= 1.0, "n must be at least 1");
    require(sigma_sq > 0.0, "sigma^2 must be positive");
    require(curvature > 0.0, "curvature must be positive");
    require(cap > 0.0, "cap must be positive");
    double g = gamma.value_or(1.0);
    require(g > 0.0, "gamma must be positive");
    return std::min(g * std::sqrt(2.0 * sigma_sq / curvature) * std::cbrt(1.0 / n), cap);
}

Beta PairDesign::perturbed(int h) const {
    Beta b = base_beta;
    b.at(coordinate) += signs.at(static_cast<std::size_t>(h)) * eta;
    return b;
}

PairDesign make_pair_design(int pair_id, std::array<int, 2> cluster_ids, Beta base_beta, double eta,
                            std::size_t coordinate, const PolicyClass& policy) {
    require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
    require(base_beta.size() == policy.dim(), "base beta has the wrong dimension for the policy");
    require(coordinate < policy.dim(), "perturbed coordinate out of range");
    PairDesign d{pair_id, cluster_ids, std::move(base_beta), eta, coordinate, {+1, -1}};
    for (int h = 0; h < 2; ++h) {
        if (!policy.valid_probabilities(d.perturbed(h))) {
            std::ostringstream msg;
            msg << "perturbation beta " << (h == 0 ? "+" : "-") << " eta on coordinate " << coordinate
                << " gives a treatment probability outside [0,1]";
            throw InvalidArgument(msg.str());
        }
    }
    return d;
}

double median_heuristic_bandwidth(std::span<const double> pooled) {
    std::vector<double> dist;
    dist.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        for (std::size_t j = i + 1; j < pooled.size(); ++j) dist.push_back(std::abs(pooled[i] - pooled[j]));
    }
    if (dist.empty()) return 1.0;
    auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    if (*mid > 0.0) return *mid;
    // Mostly tied samples (discrete covariates): fall back to the smallest
    // positive distance, or 1 when every value is identical.
    double smallest = 0.0;
    for (double d : dist) {
        if (d > 0.0 && (smallest == 0.0 || d < smallest)) smallest = d;
    }
    return smallest > 0.0 ? smallest : 1.0;
}

double mmd_squared(std::span<const double> a, std::span<const double> b, const GaussianKernel& kernel) {
    require(a.size() == b.size(), "MMD samples must have equal size");
    const std::size_t n = a.size();
    require(n >= 2, "MMD needs at least two observations per sample");
    double h;
    if (kernel.bandwidth) {
        h = *kernel.bandwidth;
        require(h > 0.0, "kernel bandwidth must be positive");
    } else {
        std::vector<double> pooled(a.begin(), a.end());
        pooled.insert(pooled.end(), b.begin(), b.end());
        h = median_heuristic_bandwidth(pooled);
    }
    const double scale = 1.0 / (2.0 * h * h);
    auto k = [scale](double u, double v) { return std::exp(-(u - v) * (u - v) * scale); };
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            // Grouped so that swapping a and b leaves every term bit-identical.
            total += (k(a[i], a[j]) + k(b[i], b[j])) - (k(a[i], b[j]) + k(a[j], b[i]));
        }
    }
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<ClusterPair> match_clusters(std::size_t cluster_count, MatchStrategy strategy,
                                        const std::vector<std::vector<double>>& covariates,
                                        const std::vector<std::string>& types) {
    require(cluster_count % 2 == 0, "pairing needs an even number of clusters");
    std::vector<ClusterPair> pairs;
    switch (strategy) {
        case MatchStrategy::index_order:
            for (std::size_t k = 0; k < cluster_count; k += 2) {
                pairs.push_back({static_cast<int>(k), static_cast<int>(k + 1)});
            }
            break;
        case MatchStrategy::mmd_greedy: {
            require(covariates.size() == cluster_count, "mmd_greedy needs one covariate sample per cluster");
            std::vector<std::tuple<double, int, int>> scored;
            for (std::size_t i = 0; i < cluster_count; ++i) {
                for (std::size_t j = i + 1; j < cluster_count; ++j) {
                    scored.emplace_back(mmd_squared(covariates[i], covariates[j]), static_cast<int>(i),
                                        static_cast<int>(j));
                }
            }
            std::sort(scored.begin(), scored.end());
            std::vector<bool> used(cluster_count, false);
            for (auto& [d, i, j] : scored) {
                if (used[i] || used[j]) continue;
                used[i] = used[j] = true;
                pairs.push_back({i, j});
            }
            std::sort(pairs.begin(), pairs.end(), [](auto& x, auto& y) { return x.first < y.first; });
            break;
        }
        case MatchStrategy::by_type: {
            require(types.size() == cluster_count, "by_type needs one type label per cluster");
            std::map<std::string, std::vector<int>> groups;
            for (std::size_t k = 0; k < cluster_count; ++k) groups[types[k]].push_back(static_cast<int>(k));
            for (auto& [type, members] : groups) {
                if (members.size() % 2 != 0) throw InvalidArgument("type '" + type + "' has an odd number of clusters");
            }
            for (auto& [type, members] : groups) {
                for (std::size_t m = 0; m < members.size(); m += 2) pairs.push_back({members[m], members[m + 1]});
            }
            std::sort(pairs.begin(), pairs.end(), [](auto& x, auto& y) { return x.first < y.first; });
            break;
        }
    }
    return pairs;
}

}  // namespace netpolicy
