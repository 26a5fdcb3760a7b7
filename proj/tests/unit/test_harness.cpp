#include <doctest.h>

#include <sstream>
#include <string>

#include "helpers.hpp"
#include "netpolicy/errors.hpp"
#include "netpolicy/field.hpp"
#include "netpolicy/harness/config.hpp"
#include "netpolicy/harness/panel_io.hpp"
#include "netpolicy/harness/results.hpp"
#include "netpolicy/harness/scenario.hpp"
#include "netpolicy/harness/studies.hpp"

using namespace netpolicy;
using namespace netpolicy::harness;

namespace {

const char* kSingleWave = R"(
name = "tiny"
study = "single_wave"
replications = 3
seed = 5

[population]
size = 150
rho = 2.0

[design]
K = 8
n = 100
eta = 0.1
beta = "optimum"

[oracle]
clusters = 20
)";

Scenario scenario_from(const std::string& text) { return parse_scenario(ConfigDocument::parse(text)); }

std::string with_study(const std::string& study, const std::string& design) {
    return "name = \"t\"\nstudy = \"" + study + "\"\nreplications = 2\nseed = 3\n[population]\nsize = 120\n" + design +
           "\n[oracle]\nclusters = 10\n";
}

std::string csv_of(const StudyOutput& out) {
    std::ostringstream s;
    write_rows_csv(out.rows, s);
    return s.str();
}

}  // namespace

TEST_CASE("config: values, tables, arrays and comments") {
    auto doc = ConfigDocument::parse(R"(
# leading comment
a = 1_000        # trailing comment
b = "text"
flag = true
[t]
list = [1, 2.5,
        -3e-1]
nested = [[0, 1], [2, 3]]
)");
    CHECK(doc.integer("a") == 1000);
    CHECK(doc.string("b") == "text");
    CHECK(doc.boolean_or("flag", false));
    CHECK(doc.numbers("t.list") == std::vector<double>{1.0, 2.5, -0.3});
    CHECK(doc.has("t.nested"));
    CHECK(doc.number_or("missing", 4.0) == 4.0);
    CHECK(doc.is_string("b"));
}

TEST_CASE("config: errors carry the field path") {
    auto doc = ConfigDocument::parse("[design]\nK = 8\nbogus = 1\n");
    doc.integer("design.K");
    try {
        doc.check_all_used();
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.path == "design.bogus");
        CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
    CHECK_THROWS_AS(ConfigDocument::parse("a = 1\na = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("a = [1, 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("a = \"x\"\n").number("a"), ConfigError);
    CHECK_THROWS_AS(scenario_from(std::string(kSingleWave) + "[model]\nphi = [1, 2]\n"), ConfigError);
}

TEST_CASE("scenario validation names the offending field") {
    try {
        scenario_from(with_study("single_wave", "[design]\nK = 7\nn = 50\neta = 0.1\nbeta = [0.3]\n"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.path == "design.K");
    }
    try {
        scenario_from(with_study("single_wave", "[design]\nK = 8\nn = 500\neta = 0.1\nbeta = [0.3]\n"));
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(e.path == "design.n");
    }
    CHECK_THROWS_AS(scenario_from(with_study("adaptive", "[design]\nK = 8\nT = 5\nn = 50\neta = 0.1\n")), ConfigError);
    auto s = scenario_from(with_study("adaptive", "[design]\nK = \"2T+2\"\nT = 5\nn = 50\neta = 0.1\n"));
    CHECK(s.cluster_count() == 12);
}

TEST_CASE("results CSV: header, round trip and summary") {
    std::vector<ResultRow> rows{{"s", 0, "reject", 1.0, 8, 100, 0, "0.25", -1},
                                {"s", 1, "reject", 0.0, 8, 100, 0, "0.25", -1},
                                {"s", 0, "v_bar", 0.1, 8, 100, 0, "0.25", 0},
                                {"s", 1, "v_bar", 0.30000000000000004, 8, 100, 0, "0.25", 0}};
    std::stringstream csv;
    write_rows_csv(rows, csv);
    std::string header;
    std::getline(std::stringstream(csv.str()), header);
    CHECK(header == "scenario,rep,metric,value,K,n,T,beta,coord");
    CHECK(read_rows_csv(csv) == rows);
    auto summary = summarize("s", "single_wave", 2, rows);
    CHECK(summary["rejection_rate"].get<double>() == 0.5);
    CHECK(summary["metrics"]["v_bar[0]"]["mean"].get<double>() == doctest::Approx(0.2));
    CHECK(summary["metrics"]["v_bar[0]"]["count"].get<int>() == 2);
}

TEST_CASE("single-wave study emits the expected metrics") {
    auto s = scenario_from(kSingleWave);
    auto out = run_study(s);
    CHECK(out.replications == 3);
    CHECK(out.summary.contains("rejection_rate"));
    for (const char* m : {"v_bar[0]", "delta_bar", "statistic", "critical_value", "reject"})
        CHECK(out.summary["metrics"].contains(m));
    for (const auto& r : out.rows) {
        CHECK(r.K == 8);
        CHECK(r.n == 100);
    }
}

TEST_CASE("studies are bit-identical across runs and thread counts") {
    const std::string adaptive = with_study(
        "adaptive", "[design]\nK = \"2T+2\"\nT = 4\nn = 60\neta = 0.1\nbeta0 = [0.3]\n[schedule]\nvariant = \"sim_default\"\n");
    const std::string grid = with_study("grid_search", "[design]\nK = 8\nn = 60\neta = 0.05\n");
    const std::string staggered =
        with_study("staggered", "[design]\nK = 8\nT = 4\nn = 60\neta = 0.1\nbeta0 = [0.3]\n");
    const std::string dynamic =
        "name = \"d\"\nstudy = \"dynamic\"\nreplications = 2\nseed = 4\n[population]\nsize = 90\n"
        "[model]\nvariant = \"dynamic_carryover\"\ncarryover = [0.5, -0.5]\n"
        "[design]\nK = 9\neta = 0.05\n[dynamic]\nhorizon = 4\nstarts = 2\ntruth_grid = 11\n[oracle]\nclusters = 10\n";
    for (const auto& text : {std::string(kSingleWave), adaptive, grid, staggered, dynamic}) {
        auto s = scenario_from(text);
        CAPTURE(s.name);
        auto first = run_study(s, 1);
        auto again = run_study(s, 1);
        auto wide = run_study(s, 8);
        CHECK(csv_of(first) == csv_of(again));
        CHECK(csv_of(first) == csv_of(wide));
        CHECK(first.summary.dump() == wide.summary.dump());
    }
}

TEST_CASE("replication seeds separate replications") {
    auto s = scenario_from(kSingleWave);
    CHECK(replication_seed(s, 0) != replication_seed(s, 1));
    auto a = replication_clusters(s, 0), b = replication_clusters(s, 0), c = replication_clusters(s, 1);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(a.size() == 8);
}

TEST_CASE("panel export and ingest round trip") {
    auto clusters = testing::geometric_clusters(4, 12, 100);
    auto model = OutcomeModel::synthetic_default();
    auto policy = PolicyClass::constant();
    std::vector<PairPanel> panels;
    for (int g = 0; g < 2; ++g) {
        ClusterField a(clusters[2 * g], model, policy), b(clusters[2 * g + 1], model, policy);
        auto design = make_pair_design(g, {2 * g, 2 * g + 1}, {0.3}, 0.1, 0, policy);
        panels.push_back(observe_pair(a, b, policy, design, 1, Beta{0.3}));
    }
    std::stringstream csv, design;
    export_panels(panels, csv, design);
    auto back = ingest_panels(csv, design);
    REQUIRE(back.size() == panels.size());
    for (std::size_t g = 0; g < panels.size(); ++g) {
        auto e0 = estimate_pair(panels[g]), e1 = estimate_pair(back[g]);
        CHECK(e0.v_hat == e1.v_hat);
        CHECK(e0.delta_hat == e1.delta_hat);
        CHECK(e0.s0_hat == e1.s0_hat);
        CHECK(e0.s1_hat == e1.s1_hat);
    }
}

TEST_CASE("panel ingest errors") {
    const std::string design = "beta = [0.3]\neta = 0.1\npairs = [[0, 1]]\nbaseline = false\n";
    auto ingest = [&](const std::string& csv_text) {
        std::stringstream csv(csv_text), d(design);
        return ingest_panels(csv, d);
    };
    CHECK_THROWS_AS(ingest(""), InvalidArgument);
    try {
        ingest("cluster,period,unit,d,y,x\n0,1,0,1,0.5,1\n1,1,0,2,0.5,1\n");
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    try {
        ingest("cluster,period,unit,y,x\n0,1,0,0.5,1\n");
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("'d'") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest("cluster,period,unit,d,y,x\n0,1,0,1,0.5,1\n"), InvalidArgument);
    CHECK_THROWS_AS(ingest("cluster,period,unit,d,y,x\n0,0,0,1,0.5,1\n0,1,0,1,0.5,1\n1,1,0,1,0.5,1\n"),
                    InvalidArgument);
    CHECK(ingest("cluster,period,unit,d,y,x\n0,1,0,1,0.5,1\n1,1,0,0,0.25,1\n").size() == 1);
}
