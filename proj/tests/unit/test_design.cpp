#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "helpers.hpp"
#include "netpolicy/design.hpp"
#include "netpolicy/errors.hpp"
#include "netpolicy/policy.hpp"

using namespace netpolicy;

namespace {

std::vector<double> normal_sample(std::size_t n, double mean, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = mean + standard_normal(rng);
    return v;
}

// Four separate double sums over i != j.
double brute_force_mmd(const std::vector<double>& a, const std::vector<double>& b, double h) {
    auto k = [h](double u, double v) { return std::exp(-(u - v) * (u - v) / (2.0 * h * h)); };
    const std::size_t n = a.size();
    double aa = 0, bb = 0, ab = 0, ba = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            aa += k(a[i], a[j]);
            bb += k(b[i], b[j]);
            ab += k(a[i], b[j]);
            ba += k(a[j], b[i]);
        }
    }
    return (aa + bb - ab - ba) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace

TEST_CASE("constant policy: probability 1 treats everyone, 0 treats nobody") {
    auto c = testing::small_cluster(500, {});
    auto all = assign_treatments(c, PolicyClass::constant(), std::vector<double>{1.0}, 3);
    auto none = assign_treatments(c, PolicyClass::constant(), std::vector<double>{0.0}, 3);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(all.treated[i] == 1);
        CHECK(none.treated[i] == 0);
    }
}

TEST_CASE("Bernoulli assignment frequency is within 3 SD of beta") {
    auto c = testing::small_cluster(100000, {});
    auto a = assign_treatments(c, PolicyClass::constant(), std::vector<double>{0.3}, 12);
    double treated = 0;
    for (auto d : a.treated) treated += d;
    CHECK(std::abs(treated / 1e5 - 0.3) < 3.0 * std::sqrt(0.3 * 0.7 / 1e5));
    for (double p : a.propensity) CHECK(p == 0.3);
}

TEST_CASE("invalid probabilities name x and beta") {
    auto c = testing::small_cluster(3, {});
    try {
        assign_treatments(c, PolicyClass::constant(), std::vector<double>{1.2}, 1);
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        std::string msg = e.what();
        CHECK(msg.find("x=1") != std::string::npos);
        CHECK(msg.find("1.2") != std::string::npos);
    }
}

TEST_CASE("per-type and budget-complement propensities") {
    auto per = PolicyClass::per_type(2);
    std::vector<double> beta{0.2, 0.7};
    CHECK(per.propensity(0.0, beta) == 0.2);
    CHECK(per.propensity(1.0, beta) == 0.7);
    auto budget = PolicyClass::budget_complement();
    std::vector<double> b{0.8};
    CHECK(budget.propensity(1.0, b) == doctest::Approx(0.8));
    CHECK(budget.propensity(0.0, b) == doctest::Approx(0.2));

    // With P(X = 1) = 1/2 the expected propensity is 1/2 for every beta.
    for (double beta1 : {0.0, 0.3, 0.9}) {
        std::vector<double> bb{beta1};
        CHECK(0.5 * budget.propensity(1.0, bb) + 0.5 * budget.propensity(0.0, bb) == doctest::Approx(0.5));
    }
    GeometricSpec spec;
    spec.size = 20000;
    spec.covariates = CovariateRule::bernoulli(0.5);
    auto c = generate_geometric_cluster(spec, 4);
    auto a = assign_treatments(c, budget, std::vector<double>{0.9}, 5);
    double treated = 0;
    for (auto d : a.treated) treated += d;
    CHECK(std::abs(treated / 20000.0 - 0.5) < 0.02);
}

TEST_CASE("rule-of-thumb eta") {
    CHECK(rule_of_thumb_eta(1000, 1.0, 2.0, std::nullopt, 0.5) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(rule_of_thumb_eta(1000, 1.0, 2.0, std::nullopt, 0.05) == 0.05);
    CHECK(rule_of_thumb_eta(1000, 1.0, 2.0, 2.0, 0.5) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(rule_of_thumb_eta(400, 1.0, 2.0, std::nullopt, 0.5) == doctest::Approx(std::pow(400.0, -1.0 / 3.0)));
    CHECK_THROWS_AS(rule_of_thumb_eta(1000, 0.0, 2.0, std::nullopt, 0.5), InvalidArgument);
    CHECK_THROWS_AS(rule_of_thumb_eta(1000, 1.0, -1.0, std::nullopt, 0.5), InvalidArgument);
    CHECK_THROWS_AS(rule_of_thumb_eta(0.5, 1.0, 2.0, std::nullopt, 0.5), InvalidArgument);
}

TEST_CASE("pair designs perturb in opposite directions and reject infeasible eta") {
    auto d = make_pair_design(0, {4, 5}, {0.3}, 0.1, 0, PolicyClass::constant());
    CHECK(d.perturbed(0)[0] == doctest::Approx(0.4));
    CHECK(d.perturbed(1)[0] == doctest::Approx(0.2));
    CHECK(d.signs[0] == -d.signs[1]);
    CHECK_THROWS_AS(make_pair_design(0, {0, 1}, {0.05}, 0.1, 0, PolicyClass::constant()), InvalidArgument);
    CHECK_THROWS_AS(make_pair_design(0, {0, 1}, {0.3}, 0.0, 0, PolicyClass::constant()), InvalidArgument);
    CHECK_THROWS_AS(make_pair_design(0, {0, 1}, {0.3}, 0.1, 1, PolicyClass::constant()), InvalidArgument);
    // budget_complement maps beta + eta > 1 to a negative probability for x = 0.
    CHECK_THROWS_AS(make_pair_design(0, {0, 1}, {0.95}, 0.1, 0, PolicyClass::budget_complement()), InvalidArgument);
    auto two = make_pair_design(1, {2, 3}, {0.3, 0.6}, 0.1, 1, PolicyClass::per_type(2));
    CHECK(two.perturbed(0) == std::vector<double>{0.3, 0.7});
}

TEST_CASE("MMD: identical samples give exactly zero") {
    auto a = normal_sample(40, 0.0, 1);
    CHECK(mmd_squared(a, a) == 0.0);
    CHECK(mmd_squared(a, a, GaussianKernel{0.3}) == 0.0);
}

TEST_CASE("MMD: symmetric in its arguments") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto a = normal_sample(30, 0.0, 2 * s), b = normal_sample(30, 0.5, 2 * s + 1);
        CHECK(mmd_squared(a, b) == mmd_squared(b, a));
    }
}

TEST_CASE("MMD: equals the brute-force double sum") {
    for (std::size_t n : {2u, 5u, 17u, 50u}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            auto a = normal_sample(n, 0.0, 100 + s), b = normal_sample(n, 1.0, 200 + s);
            for (double h : {0.5, 1.0, 3.0}) {
                CHECK(mmd_squared(a, b, GaussianKernel{h}) == doctest::Approx(brute_force_mmd(a, b, h)).epsilon(1e-12));
            }
            std::vector<double> pooled(a);
            pooled.insert(pooled.end(), b.begin(), b.end());
            const double h = median_heuristic_bandwidth(pooled);
            CHECK(mmd_squared(a, b) == doctest::Approx(brute_force_mmd(a, b, h)).epsilon(1e-12));
        }
    }
}

TEST_CASE("MMD: separated distributions are detected") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        auto a = normal_sample(30, 0.0, 300 + s), b = normal_sample(30, 5.0, 500 + s);
        CHECK(mmd_squared(a, b) > 0.0);
    }
}

TEST_CASE("MMD: argument errors") {
    std::vector<double> one{1.0}, two{1.0, 2.0}, three{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(mmd_squared(one, one), InvalidArgument);
    CHECK_THROWS_AS(mmd_squared(two, three), InvalidArgument);
    CHECK_THROWS_AS(mmd_squared(two, two, GaussianKernel{0.0}), InvalidArgument);
}

TEST_CASE("matching: index order and type blocks") {
    CHECK(match_clusters(4, MatchStrategy::index_order) == std::vector<ClusterPair>{{0, 1}, {2, 3}});
    CHECK_THROWS_AS(match_clusters(5, MatchStrategy::index_order), InvalidArgument);

    auto pairs = match_clusters(6, MatchStrategy::by_type, {}, {"a", "b", "a", "b", "c", "c"});
    CHECK(pairs == std::vector<ClusterPair>{{0, 2}, {1, 3}, {4, 5}});
    try {
        match_clusters(4, MatchStrategy::by_type, {}, {"a", "b", "a", "a"});
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }
}

TEST_CASE("matching: greedy MMD pairs clusters with the same covariate law") {
    int correct = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        // Clusters 0 and 2 share one law, 1 and 3 another.
        std::vector<std::vector<double>> cov{normal_sample(40, 0.0, 4 * s), normal_sample(40, 3.0, 4 * s + 1),
                                             normal_sample(40, 0.0, 4 * s + 2), normal_sample(40, 3.0, 4 * s + 3)};
        auto pairs = match_clusters(4, MatchStrategy::mmd_greedy, cov);
        REQUIRE(pairs.size() == 2);
        correct += pairs == std::vector<ClusterPair>{{0, 2}, {1, 3}};
    }
    CHECK(correct >= 95);
}
