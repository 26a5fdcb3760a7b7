#include "netpolicy/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <tuple>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

Adjacency::Adjacency(std::size_t n) : offsets_(n + 1, 0) {}

Adjacency Adjacency::from_edges(std::size_t n, std::vector<std::pair<int, int>> edges) {
    Adjacency a(n);
    std::vector<std::size_t> degree(n, 0);
    for (auto& [i, j] : edges) {
        require(i >= 0 && j >= 0 && static_cast<std::size_t>(i) < n && static_cast<std::size_t>(j) < n,
                "edge endpoint out of range");
        require(i != j, "self loops are not allowed");
        if (i > j) std::swap(i, j);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [i, j] : edges) {
        ++degree[i];
        ++degree[j];
    }
    for (std::size_t i = 0; i < n; ++i) a.offsets_[i + 1] = a.offsets_[i] + degree[i];
    a.neighbors_.resize(a.offsets_[n]);
    std::vector<std::size_t> fill(a.offsets_.begin(), a.offsets_.end() - 1);
    for (auto [i, j] : edges) {
        a.neighbors_[fill[i]++] = j;
        a.neighbors_[fill[j]++] = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(a.neighbors_.begin() + a.offsets_[i], a.neighbors_.begin() + a.offsets_[i + 1]);
    }
    return a;
}

std::size_t Adjacency::max_degree() const {
    std::size_t m = 0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, degree(i));
    return m;
}

bool Adjacency::has_edge(std::size_t i, std::size_t j) const {
    auto row = neighbors(i);
    return std::binary_search(row.begin(), row.end(), static_cast<int>(j));
}

std::vector<std::pair<int, int>> Adjacency::edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(edge_count());
    for (std::size_t i = 0; i < size(); ++i) {
        for (int j : neighbors(i)) {
            if (static_cast<std::size_t>(j) > i) out.emplace_back(static_cast<int>(i), j);
        }
    }
    return out;
}

namespace {

double l1(const LatentPoint& a, const LatentPoint& b) {
    return std::abs(a[0] - b[0]) + std::abs(a[1] - b[1]);
}

std::vector<LatentPoint> draw_latent(std::size_t n, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "latent"));
    std::vector<LatentPoint> u(n);
    for (auto& p : u) {
        p[0] = standard_normal(rng);
        p[1] = standard_normal(rng);
    }
    return u;
}

std::vector<double> draw_covariates(const std::vector<LatentPoint>& latent, const CovariateRule& rule,
                                    std::uint64_t seed) {
    std::vector<double> x(latent.size(), 1.0);
    switch (rule.kind) {
        case CovariateRule::Kind::constant:
            break;
        case CovariateRule::Kind::sign_first_latent:
            for (std::size_t i = 0; i < latent.size(); ++i) x[i] = latent[i][0] > 0.0 ? 1.0 : 0.0;
            break;
        case CovariateRule::Kind::bernoulli: {
            require(rule.q >= 0.0 && rule.q <= 1.0, "covariate Bernoulli probability must lie in [0,1]");
            Rng rng(derive_seed(seed, "covariates"));
            for (auto& v : x) v = uniform01(rng) < rule.q ? 1.0 : 0.0;
            break;
        }
    }
    return x;
}

void finish_cluster(ClusterPopulation& c, double sigma_tau, std::uint64_t seed) {
    require(sigma_tau >= 0.0, "sigma_tau must be non-negative");
    if (sigma_tau > 0.0) {
        Rng rng(derive_seed(seed, "tau"));
        c.cluster_effect = sigma_tau * standard_normal(rng);
    }
    c.stream_seed = derive_seed(seed, "streams");
}

}  // namespace

ClusterPopulation geometric_cluster_from_latent(std::vector<LatentPoint> latent, double rho,
                                                const CovariateRule& covariates, std::uint64_t seed,
                                                int cluster_id) {
    const std::size_t n = latent.size();
    require(n >= 1, "cluster size must be positive");
    require(rho >= 0.0 && std::isfinite(rho), "rho must be a finite non-negative number");
    ClusterPopulation c;
    c.cluster_id = cluster_id;

    std::vector<std::pair<int, int>> edges;
    if (rho > 0.0) {
        const double r = 2.0 * rho / std::sqrt(static_cast<double>(n));
        // Sweep along the first coordinate; L1 <= r implies |dx| <= r.
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::tie(latent[a][0], a) < std::tie(latent[b][0], b);
        });
        for (std::size_t a = 0; a < n; ++a) {
            const auto& ui = latent[order[a]];
            for (std::size_t b = a + 1; b < n; ++b) {
                const auto& uj = latent[order[b]];
                if (uj[0] - ui[0] > r) break;
                if (l1(ui, uj) <= r) edges.emplace_back(order[a], order[b]);
            }
        }
    }
    c.adjacency = Adjacency::from_edges(n, std::move(edges));
    c.covariates = draw_covariates(latent, covariates, seed);
    c.latent = std::move(latent);
    return c;
}

ClusterPopulation generate_geometric_cluster(const GeometricSpec& spec, std::uint64_t seed, int cluster_id) {
    require(spec.size >= 1, "cluster size must be positive");
    auto c = geometric_cluster_from_latent(draw_latent(spec.size, seed), spec.rho, spec.covariates, seed, cluster_id);
    finish_cluster(c, spec.sigma_tau, seed);
    return c;
}

LinkFunction link_always() {
    return [](const LinkInputs&) { return true; };
}

LinkFunction link_never() {
    return [](const LinkInputs&) { return false; };
}

LinkFunction link_homophily() {
    return [](const LinkInputs& in) { return in.x_i == in.x_j; };
}

LinkFunction link_shock(double p_same, double p_diff) {
    require(p_same >= 0.0 && p_same <= 1.0 && p_diff >= 0.0 && p_diff <= 1.0,
            "shock link probabilities must lie in [0,1]");
    return [=](const LinkInputs& in) { return in.omega <= (in.x_i == in.x_j ? p_same : p_diff); };
}

Adjacency nearest_neighbor_regular_graph(const std::vector<LatentPoint>& latent, int cap) {
    const std::size_t n = latent.size();
    require(cap >= 0, "degree_cap must be non-negative");
    require(static_cast<std::size_t>(cap) <= n, "degree_cap exceeds cluster size");
    require(cap == 0 || static_cast<std::size_t>(cap) <= n - 1,
            "degree_cap must be at most N-1 (no self connections)");
    require((n * static_cast<std::size_t>(cap)) % 2 == 0,
            "N * degree_cap must be even for an exactly regular possible-connection graph");
    if (cap == 0) return Adjacency(n);

    // Candidate pairs: each unit's nearest neighbours, generously over-provisioned.
    const std::size_t m = std::min(n - 1, static_cast<std::size_t>(4 * cap + 8));
    std::vector<std::tuple<double, int, int>> candidates;
    candidates.reserve(n * m);
    std::vector<std::pair<double, int>> row;
    for (std::size_t i = 0; i < n; ++i) {
        row.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) row.emplace_back(l1(latent[i], latent[j]), static_cast<int>(j));
        }
        std::partial_sort(row.begin(), row.begin() + m, row.end());
        for (std::size_t r = 0; r < m; ++r) {
            int a = static_cast<int>(i), b = row[r].second;
            candidates.emplace_back(row[r].first, std::min(a, b), std::max(a, b));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::vector<int>> nb(n);
    auto linked = [&](int a, int b) { return std::find(nb[a].begin(), nb[a].end(), b) != nb[a].end(); };
    auto link = [&](int a, int b) {
        nb[a].push_back(b);
        nb[b].push_back(a);
    };
    auto unlink = [&](int a, int b) {
        nb[a].erase(std::find(nb[a].begin(), nb[a].end(), b));
        nb[b].erase(std::find(nb[b].begin(), nb[b].end(), a));
    };
    const auto full = static_cast<std::size_t>(cap);
    for (auto& [d, a, b] : candidates) {
        if (nb[a].size() < full && nb[b].size() < full) link(a, b);
    }

    // Repair: join two deficient units directly, or splice them into an existing
    // edge (x,y) -> (u,x),(v,y), choosing the cheapest change in total distance.
    for (std::size_t guard = 0;; ++guard) {
        std::vector<int> deficient;
        for (std::size_t i = 0; i < n; ++i) {
            if (nb[i].size() < full) deficient.push_back(static_cast<int>(i));
        }
        if (deficient.empty()) break;
        if (guard > 4 * n * full) throw InvalidArgument("could not complete a regular possible-connection graph");

        const int u = deficient.front();
        int v = -1;
        for (int cand : deficient) {
            if (cand != u && !linked(u, cand)) {
                if (v < 0 || l1(latent[u], latent[cand]) < l1(latent[u], latent[v])) v = cand;
            }
        }
        if (v >= 0) {
            link(u, v);
            continue;
        }
        // u pairs with a deficient partner it already touches, or with itself.
        v = u;
        for (int cand : deficient) {
            if (cand != u) {
                v = cand;
                break;
            }
        }
        if (v == u && full - nb[u].size() < 2) {
            throw InvalidArgument("could not complete a regular possible-connection graph");
        }
        double best = std::numeric_limits<double>::infinity();
        int bx = -1, by = -1;
        for (std::size_t x = 0; x < n; ++x) {
            for (int y : nb[x]) {
                const int xi = static_cast<int>(x);
                if (xi == u || xi == v || y == u || y == v) continue;
                if (linked(u, xi) || linked(v, y)) continue;
                double cost = l1(latent[u], latent[xi]) + l1(latent[v], latent[y]) - l1(latent[xi], latent[y]);
                if (cost < best) {
                    best = cost;
                    bx = xi;
                    by = y;
                }
            }
        }
        if (bx < 0) throw InvalidArgument("could not complete a regular possible-connection graph");
        unlink(bx, by);
        link(u, bx);
        link(v, by);
    }

    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        for (int j : nb[i]) {
            if (static_cast<std::size_t>(j) > i) edges.emplace_back(static_cast<int>(i), j);
        }
    }
    return Adjacency::from_edges(n, std::move(edges));
}

ClusterPopulation generate_latent_space_cluster(const LatentSpaceSpec& spec, std::uint64_t seed, int cluster_id) {
    require(spec.size >= 1, "cluster size must be positive");
    require(spec.link != nullptr, "link function is required");
    ClusterPopulation c;
    c.cluster_id = cluster_id;
    c.latent = draw_latent(spec.size, seed);
    c.covariates = draw_covariates(c.latent, spec.covariates, seed);
    c.degree_cap = spec.degree_cap;

    Adjacency possible = nearest_neighbor_regular_graph(c.latent, spec.degree_cap);
    Rng shocks(derive_seed(seed, "pair_shocks"));
    std::vector<std::pair<int, int>> edges;
    for (auto [i, j] : possible.edges()) {
        double omega = spec.pair_shocks ? uniform01(shocks) : 0.0;
        LinkInputs in{c.covariates[i], c.covariates[j], c.latent[i], c.latent[j], omega};
        if (spec.link(in)) edges.emplace_back(i, j);
    }
    c.adjacency = Adjacency::from_edges(spec.size, std::move(edges));
    finish_cluster(c, spec.sigma_tau, seed);
    return c;
}

void write_edge_list(const ClusterPopulation& cluster, std::ostream& out) {
    for (auto [i, j] : cluster.adjacency.edges()) out << i << ' ' << j << '\n';
}

void write_covariates_csv(const ClusterPopulation& cluster, std::ostream& out) {
    out << "unit,x\n";
    for (std::size_t i = 0; i < cluster.size(); ++i) out << i << ',' << cluster.covariates[i] << '\n';
}

}  // namespace netpolicy
