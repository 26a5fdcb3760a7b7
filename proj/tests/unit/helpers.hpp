#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "netpolicy/population.hpp"
#include "netpolicy/seeding.hpp"

namespace testing {

inline double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Standard error of the mean, divisor n - 1.
inline double se_of(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Cluster with the given edges and latent points on a line.
inline netpolicy::ClusterPopulation small_cluster(std::size_t n, std::vector<std::pair<int, int>> edges,
                                                  std::uint64_t stream = 1, std::vector<double> x = {}) {
    netpolicy::ClusterPopulation c;
    for (std::size_t i = 0; i < n; ++i) c.latent.push_back({static_cast<double>(i), 0.0});
    c.covariates = x.empty() ? std::vector<double>(n, 1.0) : std::move(x);
    c.adjacency = netpolicy::Adjacency::from_edges(n, std::move(edges));
    c.stream_seed = stream;
    return c;
}

inline std::vector<netpolicy::ClusterPopulation> geometric_clusters(std::size_t count, std::uint64_t seed,
                                                                    std::size_t size = 600, double rho = 2.0) {
    std::vector<netpolicy::ClusterPopulation> out;
    netpolicy::GeometricSpec spec;
    spec.size = size;
    spec.rho = rho;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(netpolicy::generate_geometric_cluster(spec, netpolicy::derive_seed(seed, k), static_cast<int>(k)));
    return out;
}

}  // namespace testing
