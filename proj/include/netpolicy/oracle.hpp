#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>

#include "netpolicy/outcomes.hpp"
#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

// Degree statistics of units with a given covariate level.
struct LevelConstants {
    double probability = 0.0;      // P(X = x)
    double connected_share = 0.0;  // s = P(deg >= 1 | X = x)
    double inverse_degree = 0.0;   // kappa = E[1{deg >= 1} / deg | X = x]
};

// Exposure moments under iid Bernoulli(b) treatment of neighbours:
//   E[S] = s b,   E[S^2] = kappa b + (s - kappa) b^2.
// Isolated units have S = 0, so they contribute to neither s nor kappa.
struct NetworkConstants {
    LevelConstants overall;
    std::map<int, LevelConstants> by_level;  // integer-valued covariates only
    std::size_t cluster_size = 0;
    std::size_t max_degree = 0;

    const LevelConstants& level(double x) const;
};

using ClusterFactory = std::function<ClusterPopulation(std::uint64_t seed, int cluster_id)>;

NetworkConstants network_constants_of(std::span<const ClusterPopulation> clusters);
NetworkConstants estimate_network_constants(const ClusterFactory& factory, std::size_t clusters, std::uint64_t seed,
                                            std::size_t threads = 1);

enum class OracleMode { analytic, monte_carlo };

struct WelfareOracle {
    OutcomeModel model;
    PolicyClass policy;
    OracleMode mode = OracleMode::analytic;
    std::size_t mc_replications = 200;
    NetworkConstants constants;  // analytic mode
    ClusterFactory factory;      // monte_carlo mode
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    bool has_closed_form() const;
};

struct WelfareValue {
    double value = 0.0;
    double std_error = 0.0;
};

// W(beta); for dynamic models the stationary value Gamma(beta, beta).
WelfareValue welfare(const WelfareOracle& oracle, std::span<const double> beta);
// dW/dbeta_j, analytic when available, else a paired central difference.
double marginal_effect_oracle(const WelfareOracle& oracle, std::span<const double> beta, std::size_t coordinate,
                              double step = 1e-3);

// Closed-form m(d, x, beta) and its beta-derivative; constant-probability policy.
double conditional_mean(const WelfareOracle& oracle, int d, double x, double beta);
double conditional_mean_slope(const WelfareOracle& oracle, int d, double x, double beta);

// Gamma(current, previous): expected outcome when this period's parameter is
// `current` and last period's was `previous`. Analytic, scalar policies.
double dynamic_gamma(const WelfareOracle& oracle, double current, double previous);

// argmax of W over the box for scalar policies; closed form for quadratic
// welfare, otherwise a dense scan with refinement.
double optimal_beta(const WelfareOracle& oracle);

}  // namespace netpolicy
