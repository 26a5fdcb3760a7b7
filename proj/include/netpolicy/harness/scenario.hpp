#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "netpolicy/adaptive.hpp"
#include "netpolicy/design.hpp"
#include "netpolicy/estimators.hpp"
#include "netpolicy/harness/config.hpp"
#include "netpolicy/inference.hpp"
#include "netpolicy/oracle.hpp"
#include "netpolicy/outcomes.hpp"
#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy::harness {

enum class StudyKind { single_wave, adaptive, staggered, dynamic, grid_search };

std::string to_string(StudyKind kind);

struct PopulationConfig {
    enum class Generator { geometric, latent_space };
    Generator generator = Generator::geometric;
    std::size_t size = 600;
    double rho = 2.0;
    int degree_cap = 14;
    std::string link = "always";  // always | never | homophily | shock
    double p_same = 1.0;
    double p_diff = 0.0;
    bool pair_shocks = false;
    CovariateRule covariates;
    double sigma_tau = 0.0;

    ClusterFactory factory() const;
};

struct DesignConfig {
    // Number of clusters; with clusters_from_periods it is 2T + 2 instead.
    int clusters = 20;
    bool clusters_from_periods = false;
    std::size_t sample_size = 0;  // 0 = every unit
    int periods = 1;

    std::optional<double> eta;  // nullopt = rule of thumb
    std::optional<double> eta_gamma;
    double eta_cap = 0.5;
    std::optional<double> eta_curvature;  // defaults to |W''| at the optimum

    double alpha = 0.05;
    Sided sided = Sided::two;
    std::optional<Beta> beta;  // tested parameter; nullopt = optimum
    int coords = 1;
    BaselineMode mode = BaselineMode::without_baseline;
    MatchStrategy matching = MatchStrategy::index_order;
    double welfare_step = 0.05;

    std::optional<Beta> beta0;  // adaptive start; nullopt = box midpoint
    LearningSchedule schedule;
    bool patient = false;  // hold each wave for two periods
    bool compare_grid = true;
    std::optional<Beta> grid_lower, grid_upper;

    double discount = 0.9;
    int horizon = 10;
    int starts = 16;
    std::size_t truth_grid = 101;  // per-axis points for the surrogate sup error
};

struct OracleConfig {
    OracleMode mode = OracleMode::analytic;
    std::size_t clusters = 200;  // clusters behind the network constants
    std::size_t replications = 200;
};

struct Scenario {
    std::string name = "scenario";
    StudyKind study = StudyKind::single_wave;
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    PopulationConfig population;
    OutcomeModel model = OutcomeModel::synthetic_default();
    PolicyClass policy;
    DesignConfig design;
    OracleConfig oracle;

    int cluster_count() const;
    std::size_t sample_size() const;  // resolved n
    // Throws ConfigError with the offending field.
    void validate() const;
};

Scenario parse_scenario(const ConfigDocument& doc);
Scenario load_scenario(const std::string& path);

}  // namespace netpolicy::harness
