#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace netpolicy {

using LatentPoint = std::array<double, 2>;

// Symmetric 0/1 adjacency in compressed-row form, zero diagonal.
class Adjacency {
public:
    Adjacency() = default;
    explicit Adjacency(std::size_t n);
    static Adjacency from_edges(std::size_t n, std::vector<std::pair<int, int>> edges);

    std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
    std::span<const int> neighbors(std::size_t i) const {
        return {neighbors_.data() + offsets_[i], degree(i)};
    }
    std::size_t edge_count() const { return neighbors_.size() / 2; }
    std::size_t max_degree() const;
    bool has_edge(std::size_t i, std::size_t j) const;
    // Each undirected edge once, i < j, sorted.
    std::vector<std::pair<int, int>> edges() const;

    bool operator==(const Adjacency&) const = default;

private:
    std::vector<std::size_t> offsets_;
    std::vector<int> neighbors_;  // sorted within each row
};

struct CovariateRule {
    enum class Kind { constant, sign_first_latent, bernoulli };
    Kind kind = Kind::constant;
    double q = 0.5;  // Bernoulli success probability

    static CovariateRule constant_one() { return {}; }
    static CovariateRule sign_first_latent() { return {Kind::sign_first_latent, 0.5}; }
    static CovariateRule bernoulli(double q) { return {Kind::bernoulli, q}; }
};

struct ClusterPopulation {
    int cluster_id = 0;
    std::vector<LatentPoint> latent;
    std::vector<double> covariates;
    Adjacency adjacency;
    double cluster_effect = 0.0;
    std::optional<int> degree_cap;
    // Root of the cluster's assignment, sampling and noise streams.
    std::uint64_t stream_seed = 0;

    std::size_t size() const { return latent.size(); }
    bool operator==(const ClusterPopulation&) const = default;
};

struct GeometricSpec {
    std::size_t size = 600;
    double rho = 2.0;
    CovariateRule covariates;
    double sigma_tau = 0.0;
};

// Edge iff the L1 distance of standard-normal latent positions is <= 2 rho / sqrt(N).
ClusterPopulation generate_geometric_cluster(const GeometricSpec& spec, std::uint64_t seed, int cluster_id = 0);

// Same rule with caller-supplied latent positions.
ClusterPopulation geometric_cluster_from_latent(std::vector<LatentPoint> latent, double rho,
                                                const CovariateRule& covariates, std::uint64_t seed,
                                                int cluster_id = 0);

struct LinkInputs {
    double x_i, x_j;
    const LatentPoint& u_i;
    const LatentPoint& u_j;
    double omega;  // iid U(0,1) pair shock; 0 unless shocks are enabled
};
using LinkFunction = std::function<bool(const LinkInputs&)>;

LinkFunction link_always();
LinkFunction link_never();
LinkFunction link_homophily();
// Edge iff omega <= (same covariate ? p_same : p_diff).
LinkFunction link_shock(double p_same, double p_diff);

struct LatentSpaceSpec {
    std::size_t size = 600;
    int degree_cap = 14;
    LinkFunction link = link_always();
    bool pair_shocks = false;
    CovariateRule covariates = CovariateRule::sign_first_latent();
    double sigma_tau = 0.0;
};

// Possible connections form an exactly degree_cap-regular graph built from the
// nearest latent neighbours (L1, ties to lower index); the link rule thins it.
ClusterPopulation generate_latent_space_cluster(const LatentSpaceSpec& spec, std::uint64_t seed, int cluster_id = 0);

// The regular possible-connection graph alone.
Adjacency nearest_neighbor_regular_graph(const std::vector<LatentPoint>& latent, int cap);

void write_edge_list(const ClusterPopulation& cluster, std::ostream& out);
void write_covariates_csv(const ClusterPopulation& cluster, std::ostream& out);

}  // namespace netpolicy
