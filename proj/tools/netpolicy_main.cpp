// Command-line front end: simulations, panel estimation, cluster matching and
// the perturbation-size rule.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "netpolicy/design.hpp"
#include "netpolicy/errors.hpp"
#include "netpolicy/estimators.hpp"
#include "netpolicy/harness/panel_io.hpp"
#include "netpolicy/harness/scenario.hpp"
#include "netpolicy/harness/studies.hpp"
#include "netpolicy/inference.hpp"

namespace {

using namespace netpolicy;
using namespace netpolicy::harness;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_degenerate = 3;

struct SimulateArgs {
    std::string kind;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::string out = ".";
    std::size_t threads = 1;
};

bool kind_matches(const std::string& kind, StudyKind study) {
    if (kind == "single-wave") return study == StudyKind::single_wave;
    if (kind == "adaptive") return study == StudyKind::adaptive || study == StudyKind::staggered;
    if (kind == "dynamic") return study == StudyKind::dynamic;
    if (kind == "grid") return study == StudyKind::grid_search;
    return false;
}

int simulate(const SimulateArgs& a) {
    Scenario s = load_scenario(a.config);
    if (!kind_matches(a.kind, s.study))
        throw ConfigError("study", "configuration describes a " + to_string(s.study) + " study, not " + a.kind);
    if (a.seed) s.master_seed = *a.seed;
    if (a.reps) {
        s.replications = *a.reps;
        s.validate();
    }
    auto result = run_study(s, a.threads);
    std::filesystem::create_directories(a.out);
    const auto base = std::filesystem::path(a.out) / s.name;
    std::ofstream csv(base.string() + ".csv");
    write_rows_csv(result.rows, csv);
    std::ofstream json(base.string() + ".summary.json");
    json << result.summary.dump(2) << '\n';
    if (!csv || !json) throw std::runtime_error("failed to write results under " + a.out);
    std::cout << result.summary.dump(2) << '\n';
    return result.degenerate_only() ? exit_degenerate : exit_ok;
}

int estimate(const std::string& panel_path, const std::string& design_path, double alpha, const std::string& sided,
             bool with_baseline) {
    auto panels = ingest_panel(panel_path, design_path);
    std::map<std::string, Sided> sides{{"two", Sided::two}, {"greater", Sided::one_greater}, {"less", Sided::one_less}};
    if (!sides.count(sided)) throw ConfigError("--sided", "expected two, greater or less");
    const auto mode = with_baseline && panels.front().baseline[0] ? BaselineMode::with_baseline
                                                                  : BaselineMode::without_baseline;
    std::vector<PairEstimates> est;
    std::vector<double> v;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : panels) {
        est.push_back(estimate_pair(p, {mode, false}));
        v.push_back(est.back().v_hat);
        pairs.push_back({{"pair", p.design.pair_id},
                         {"clusters", p.design.cluster_ids},
                         {"v_hat", est.back().v_hat},
                         {"delta_hat", est.back().delta_hat},
                         {"s0_hat", est.back().s0_hat},
                         {"s1_hat", est.back().s1_hat}});
    }
    auto pooled = pool_pairs(est);
    nlohmann::json out{{"pairs", pairs},
                       {"v_bar", pooled.v_bar},
                       {"delta_bar", pooled.delta_bar},
                       {"s0_bar", pooled.s0_bar},
                       {"s1_bar", pooled.s1_bar}};
    int code = exit_ok;
    try {
        auto t = policy_optimality_test(v, alpha, sides[sided]);
        out["test"] = {{"statistic", t.statistic},       {"degrees_freedom", t.degrees_freedom},
                       {"alpha", t.alpha},               {"critical_value", t.critical_value},
                       {"reject", t.reject},             {"sided", sided},
                       {"coords_tested", t.coords_tested}, {"level_warning", t.level_warning}};
    } catch (const DegenerateStatistic& e) {
        out["test"] = {{"degenerate", true}, {"message", e.what()}};
        code = exit_degenerate;
    }
    std::cout << out.dump(2) << '\n';
    return code;
}

// Long-format CSV with columns cluster,x (one row per unit).
int match(const std::string& path, const std::string& strategy) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open covariate file " + path);
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("covariate file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "cluster,x") throw InvalidArgument("covariate file needs the header 'cluster,x'");
    std::map<std::string, std::vector<double>> by_cluster;
    std::vector<std::string> order;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidArgument("covariate row " + std::to_string(row) + ": expected 2 fields");
        std::string id = line.substr(0, comma);
        double x = 0.0;
        try {
            x = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw InvalidArgument("covariate row " + std::to_string(row) + ": x is not a number");
        }
        if (!by_cluster.count(id)) order.push_back(id);
        by_cluster[id].push_back(x);
    }
    std::vector<std::vector<double>> cov;
    for (const auto& id : order) cov.push_back(by_cluster[id]);
    const auto kind = strategy == "index" ? MatchStrategy::index_order : MatchStrategy::mmd_greedy;
    if (strategy != "index" && strategy != "mmd") throw ConfigError("--strategy", "expected mmd or index");
    auto pairs = match_clusters(cov.size(), kind, cov);
    std::cout << "first,second\n";
    for (const auto& p : pairs) {
        std::cout << order[static_cast<std::size_t>(p.first)] << ',' << order[static_cast<std::size_t>(p.second)]
                  << '\n';
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Experimental design and inference for treatment policies under network interference"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a Monte Carlo study from a scenario file");
    simulate_cmd->add_option("kind", sim.kind, "single-wave, adaptive, dynamic or grid")
        ->required()
        ->check(CLI::IsMember({"single-wave", "adaptive", "dynamic", "grid"}));
    simulate_cmd->add_option("config", sim.config, "Scenario file")->required();
    simulate_cmd->add_option("--seed", sim.seed, "Override the master seed");
    simulate_cmd->add_option("--reps", sim.reps, "Override the number of replications");
    simulate_cmd->add_option("--out", sim.out, "Output directory");
    simulate_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

    std::string panel, design, sided = "two";
    double alpha = 0.05;
    bool with_baseline = true;
    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate and test from an external panel");
    estimate_cmd->add_option("--panel", panel, "Panel CSV")->required();
    estimate_cmd->add_option("--design", design, "Design TOML")->required();
    estimate_cmd->add_option("--alpha", alpha, "Test level");
    estimate_cmd->add_option("--sided", sided, "two, greater or less");
    estimate_cmd->add_flag("!--no-baseline", with_baseline, "Ignore baseline rows");

    std::string covariates, strategy = "mmd";
    auto* match_cmd = app.add_subcommand("match-clusters", "Pair clusters by covariate similarity");
    match_cmd->add_option("--covariates", covariates, "CSV with columns cluster,x")->required();
    match_cmd->add_option("--strategy", strategy, "mmd or index");

    double n = 0.0, sigma2 = 0.0, curvature = 0.0, cap = 0.5;
    std::optional<double> gamma;
    auto* eta_cmd = app.add_subcommand("eta-rule", "Rule-of-thumb perturbation size");
    eta_cmd->add_option("--n", n, "Units sampled per cluster")->required();
    eta_cmd->add_option("--sigma2", sigma2, "Outcome variance")->required();
    eta_cmd->add_option("--curvature", curvature, "|W''| near the optimum")->required();
    eta_cmd->add_option("--cap", cap, "Upper bound on eta");
    eta_cmd->add_option("--gamma", gamma, "Scale constant");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*simulate_cmd) return simulate(sim);
        if (*estimate_cmd) return estimate(panel, design, alpha, sided, with_baseline);
        if (*match_cmd) return match(covariates, strategy);
        if (*eta_cmd) {
            std::cout.precision(17);
            std::cout << rule_of_thumb_eta(n, sigma2, curvature, gamma, cap) << '\n';
            return exit_ok;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const DegenerateStatistic& e) {
        std::cerr << "degenerate statistic: " << e.what() << '\n';
        return exit_degenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
