#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "netpolicy/harness/results.hpp"
#include "netpolicy/harness/scenario.hpp"
#include "netpolicy/oracle.hpp"

namespace netpolicy::harness {

// Quantities fixed for the whole scenario: the welfare oracle, its optimum and
// the resolved perturbation size.
struct StudyContext {
    WelfareOracle oracle;
    Beta beta_star;
    double welfare_star = 0.0;
    double eta = 0.0;
    double curvature = 0.0;
};

StudyContext prepare_study(const Scenario& scenario, std::size_t threads = 1);

// Clusters of replication `rep`; every arm of a replication draws from here.
std::vector<ClusterPopulation> replication_clusters(const Scenario& scenario, std::size_t rep);
std::uint64_t replication_seed(const Scenario& scenario, std::size_t rep);

struct StudyOutput {
    std::vector<ResultRow> rows;
    nlohmann::json summary;
    std::size_t degenerate = 0;  // replications whose statistic was degenerate
    std::size_t replications = 0;

    bool degenerate_only() const { return replications > 0 && degenerate == replications; }
};

// Rows are merged in replication order, so the output does not depend on `threads`.
StudyOutput run_single_wave_study(const Scenario& scenario, std::size_t threads = 1);
StudyOutput run_adaptive_study(const Scenario& scenario, std::size_t threads = 1);
StudyOutput run_grid_study(const Scenario& scenario, std::size_t threads = 1);
StudyOutput run_dynamic_study(const Scenario& scenario, std::size_t threads = 1);
StudyOutput run_study(const Scenario& scenario, std::size_t threads = 1);

}  // namespace netpolicy::harness
