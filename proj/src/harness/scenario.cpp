#include "netpolicy/harness/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace netpolicy::harness {

std::string to_string(StudyKind kind) {
    switch (kind) {
        case StudyKind::single_wave: return "single_wave";
        case StudyKind::adaptive: return "adaptive";
        case StudyKind::staggered: return "staggered";
        case StudyKind::dynamic: return "dynamic";
        case StudyKind::grid_search: return "grid_search";
    }
    return "unknown";
}

ClusterFactory PopulationConfig::factory() const {
    if (generator == Generator::geometric) {
        GeometricSpec spec{size, rho, covariates, sigma_tau};
        return [spec](std::uint64_t seed, int id) { return generate_geometric_cluster(spec, seed, id); };
    }
    LatentSpaceSpec spec;
    spec.size = size;
    spec.degree_cap = degree_cap;
    spec.pair_shocks = pair_shocks;
    spec.covariates = covariates;
    spec.sigma_tau = sigma_tau;
    if (link == "always") {
        spec.link = link_always();
    } else if (link == "never") {
        spec.link = link_never();
    } else if (link == "homophily") {
        spec.link = link_homophily();
    } else {
        spec.link = link_shock(p_same, p_diff);
        spec.pair_shocks = true;
    }
    return [spec](std::uint64_t seed, int id) { return generate_latent_space_cluster(spec, seed, id); };
}

int Scenario::cluster_count() const {
    return design.clusters_from_periods ? 2 * design.periods + 2 : design.clusters;
}

std::size_t Scenario::sample_size() const {
    return design.sample_size == 0 ? population.size : design.sample_size;
}

void Scenario::validate() const {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError(field, msg); };
    if (replications < 1) fail("replications", "must be at least 1");
    if (population.size < 2) fail("population.size", "must be at least 2");
    if (population.rho < 0.0) fail("population.rho", "must be non-negative");
    if (population.generator == PopulationConfig::Generator::latent_space) {
        const auto n = static_cast<long long>(population.size);
        if (population.degree_cap < 1 || population.degree_cap > n - 1)
            fail("population.degree_cap", "must lie in [1, size - 1]");
        if ((n * population.degree_cap) % 2 != 0) fail("population.degree_cap", "size * degree_cap must be even");
    }
    if (design.sample_size > population.size) fail("design.n", "sample size exceeds the cluster size");
    try {
        model.validate();
    } catch (const std::exception& e) {
        fail("model", e.what());
    }
    try {
        policy.validate();
    } catch (const std::exception& e) {
        fail("policy", e.what());
    }
    const int K = cluster_count();
    if (design.periods < 1) fail("design.T", "must be at least 1");
    if (K < 2) fail("design.K", "needs at least two clusters");
    const std::size_t p = policy.dim();
    if (design.beta && design.beta->size() != p) fail("design.beta", "dimension differs from the policy");
    if (design.beta0 && design.beta0->size() != p) fail("design.beta0", "dimension differs from the policy");
    if (design.beta && !policy.contains(*design.beta)) fail("design.beta", "lies outside the policy box");
    if (design.beta0 && !policy.contains(*design.beta0)) fail("design.beta0", "lies outside the policy box");
    if (design.eta && *design.eta <= 0.0) fail("design.eta", "must be positive");
    if (!(design.alpha > 0.0 && design.alpha < 1.0)) fail("design.alpha", "must lie in (0,1)");
    if (design.coords < 1 || static_cast<std::size_t>(design.coords) > p)
        fail("design.coords", "must lie in [1, policy dimension]");
    if (design.grid_lower.has_value() != design.grid_upper.has_value())
        fail("design.grid_lower", "grid_lower and grid_upper go together");
    if (design.grid_lower) {
        if (design.grid_lower->size() != p || design.grid_upper->size() != p)
            fail("design.grid_lower", "dimension differs from the policy");
        PolicyClass box = policy;
        box.lower = *design.grid_lower;
        box.upper = *design.grid_upper;
        try {
            box.validate();
        } catch (const std::exception& e) {
            fail("design.grid_lower", e.what());
        }
    }
    switch (study) {
        case StudyKind::single_wave:
            if (K % (2 * design.coords) != 0) fail("design.K", "must be divisible by 2 * coords");
            if (K / (2 * design.coords) < 2) fail("design.K", "needs at least two pairs per tested coordinate");
            break;
        case StudyKind::adaptive:
        case StudyKind::staggered: {
            if (K % 2 != 0) fail("design.K", "must be even");
            const int waves = design.patient ? design.periods / 2 : design.periods;
            if (design.patient && design.periods % 2 != 0) fail("design.T", "patient updates need an even T");
            if (study == StudyKind::adaptive && K < 2 * (waves + 1))
                fail("design.K", "adaptive designs need K >= 2(T + 1)");
            if (study == StudyKind::staggered && K < 2 * waves) fail("design.K", "staggered designs need K >= 2T");
            break;
        }
        case StudyKind::grid_search:
            if (K % 2 != 0) fail("design.K", "must be even");
            break;
        case StudyKind::dynamic:
            if (K % 3 != 0) fail("design.K", "must be a multiple of 3");
            if (!model.is_dynamic()) fail("model.variant", "the dynamic study needs a dynamic outcome model");
            if (p != 1 || policy.variant != PolicyVariant::constant_prob)
                fail("policy.variant", "the dynamic study uses a scalar constant-probability policy");
            if (!(design.discount > 0.0 && design.discount < 1.0)) fail("dynamic.discount", "must lie in (0,1)");
            if (design.horizon < 1) fail("dynamic.horizon", "must be at least 1");
            if (design.starts < 1) fail("dynamic.starts", "must be at least 1");
            if (!design.eta) fail("design.eta", "the dynamic study needs an explicit eta");
            break;
    }
    if (oracle.clusters < 1) fail("oracle.clusters", "must be at least 1");
    if (oracle.replications < 1) fail("oracle.replications", "must be at least 1");
}

namespace {

template <typename Enum>
Enum pick(const std::string& key, const std::string& value, std::initializer_list<std::pair<const char*, Enum>> options) {
    std::string allowed;
    for (const auto& [name, e] : options) {
        if (value == name) return e;
        allowed += allowed.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(key, "unknown value '" + value + "' (expected one of: " + allowed + ")");
}

ExposureCoefficients coefficients(const ConfigDocument& doc, const std::string& key) {
    auto v = doc.numbers(key);
    if (v.size() != 3) throw ConfigError(key, "expected [direct, linear, quadratic]");
    return {v[0], v[1], v[2]};
}

std::size_t count(const ConfigDocument& doc, const std::string& key, std::size_t fallback) {
    auto v = doc.integer_or(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError(key, "must be non-negative");
    return static_cast<std::size_t>(v);
}

}  // namespace

Scenario parse_scenario(const ConfigDocument& doc) {
    Scenario s;
    s.name = doc.string_or("name", s.name);
    s.study = pick<StudyKind>("study", doc.string("study"),
                              {{"single_wave", StudyKind::single_wave},
                               {"adaptive", StudyKind::adaptive},
                               {"staggered", StudyKind::staggered},
                               {"dynamic", StudyKind::dynamic},
                               {"grid_search", StudyKind::grid_search}});
    s.replications = count(doc, "replications", 1);
    s.master_seed = static_cast<std::uint64_t>(doc.integer_or("seed", 0));

    auto& pop = s.population;
    pop.generator = pick<PopulationConfig::Generator>(
        "population.generator", doc.string_or("population.generator", "geometric"),
        {{"geometric", PopulationConfig::Generator::geometric},
         {"latent_space", PopulationConfig::Generator::latent_space}});
    pop.size = count(doc, "population.size", pop.size);
    pop.rho = doc.number_or("population.rho", pop.rho);
    pop.degree_cap = static_cast<int>(doc.integer_or("population.degree_cap", pop.degree_cap));
    pop.link = doc.string_or("population.link", pop.link);
    pick<int>("population.link", pop.link, {{"always", 0}, {"never", 1}, {"homophily", 2}, {"shock", 3}});
    pop.p_same = doc.number_or("population.p_same", pop.p_same);
    pop.p_diff = doc.number_or("population.p_diff", pop.p_diff);
    pop.pair_shocks = doc.boolean_or("population.pair_shocks", pop.pair_shocks);
    const std::string cov = doc.string_or(
        "population.covariates",
        pop.generator == PopulationConfig::Generator::latent_space ? "sign_first_latent" : "constant");
    const double q = doc.number_or("population.covariate_q", 0.5);
    pop.covariates = pick<CovariateRule>("population.covariates", cov,
                                         {{"constant", CovariateRule::constant_one()},
                                          {"sign_first_latent", CovariateRule::sign_first_latent()},
                                          {"bernoulli", CovariateRule::bernoulli(q)}});
    pop.sigma_tau = doc.number_or("population.sigma_tau", pop.sigma_tau);

    auto& m = s.model;
    m.variant = pick<OutcomeVariant>("model.variant", doc.string_or("model.variant", "quadratic_exposure"),
                                     {{"quadratic_exposure", OutcomeVariant::quadratic_exposure},
                                      {"heterogeneous_by_x", OutcomeVariant::heterogeneous_by_x},
                                      {"global_mean", OutcomeVariant::global_mean},
                                      {"dynamic_carryover", OutcomeVariant::dynamic_carryover},
                                      {"reduced_form", OutcomeVariant::reduced_form}});
    m.phi0 = doc.number_or("model.phi0", m.phi0);
    if (doc.has("model.phi")) m.phi = coefficients(doc, "model.phi");
    if (doc.has("model.phi_x0")) m.phi_by_x[0] = coefficients(doc, "model.phi_x0");
    if (doc.has("model.phi_x1")) m.phi_by_x[1] = coefficients(doc, "model.phi_x1");
    m.treated_x_exposure = doc.number_or("model.treated_x_exposure", m.treated_x_exposure);
    m.cost = doc.number_or("model.cost", m.phi.direct);
    m.noise_sigma = doc.number_or("model.sigma", m.noise_sigma);
    m.noise_kind = pick<NoiseKind>("model.noise", doc.string_or("model.noise", "gaussian"),
                                   {{"gaussian", NoiseKind::gaussian}, {"bounded_uniform", NoiseKind::bounded_uniform}});
    m.time_effects = doc.numbers_or("model.time_effects", {});
    m.cluster_period_sigma = doc.number_or("model.cluster_period_sigma", 0.0);
    if (doc.has("model.carryover")) {
        auto c = doc.numbers("model.carryover");
        if (c.size() != 2) throw ConfigError("model.carryover", "expected [linear, quadratic]");
        m.carryover = {c[0], c[1]};
    }
    if (doc.has("model.reduced")) {
        auto r = doc.numbers("model.reduced");
        if (r.size() != 8)
            throw ConfigError("model.reduced",
                              "expected [intercept, own, prop, prop_sq, own_x_prop, lag, lag_sq, cross]");
        m.reduced = {r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]};
    }

    const std::string pv = doc.string_or("policy.variant", "constant_prob");
    const auto types = count(doc, "policy.types", 2);
    s.policy = pick<PolicyClass>("policy.variant", pv,
                                 {{"constant_prob", PolicyClass::constant()},
                                  {"per_type_prob", PolicyClass::per_type(types)},
                                  {"budget_complement", PolicyClass::budget_complement()}});
    if (doc.has("policy.lower")) s.policy.lower = doc.numbers("policy.lower");
    if (doc.has("policy.upper")) s.policy.upper = doc.numbers("policy.upper");
    if (s.policy.lower.size() != s.policy.upper.size())
        throw ConfigError("policy.upper", "lower and upper differ in dimension");

    auto& d = s.design;
    if (doc.is_string("design.K")) {
        auto mode = doc.string("design.K");
        if (mode != "2T+2") throw ConfigError("design.K", "expected an integer or \"2T+2\"");
        d.clusters_from_periods = true;
    } else {
        d.clusters = static_cast<int>(doc.integer_or("design.K", d.clusters));
    }
    d.sample_size = count(doc, "design.n", 0);
    d.periods = static_cast<int>(doc.integer_or("design.T", d.periods));
    if (doc.is_string("design.eta")) {
        if (doc.string("design.eta") != "rule_of_thumb")
            throw ConfigError("design.eta", "expected a number or \"rule_of_thumb\"");
    } else if (doc.has("design.eta")) {
        d.eta = doc.number("design.eta");
    }
    if (doc.has("design.eta_gamma")) d.eta_gamma = doc.number("design.eta_gamma");
    d.eta_cap = doc.number_or("design.eta_cap", d.eta_cap);
    if (doc.has("design.eta_curvature")) d.eta_curvature = doc.number("design.eta_curvature");
    d.alpha = doc.number_or("design.alpha", d.alpha);
    d.sided = pick<Sided>("design.sided", doc.string_or("design.sided", "two"),
                          {{"two", Sided::two}, {"greater", Sided::one_greater}, {"less", Sided::one_less}});
    if (doc.is_string("design.beta")) {
        if (doc.string("design.beta") != "optimum") throw ConfigError("design.beta", "expected numbers or \"optimum\"");
    } else if (doc.has("design.beta")) {
        d.beta = doc.numbers("design.beta");
    }
    d.coords = static_cast<int>(doc.integer_or("design.coords", d.coords));
    d.mode = doc.boolean_or("design.baseline", false) ? BaselineMode::with_baseline : BaselineMode::without_baseline;
    d.matching = pick<MatchStrategy>("design.matching", doc.string_or("design.matching", "index_order"),
                                     {{"index_order", MatchStrategy::index_order},
                                      {"mmd_greedy", MatchStrategy::mmd_greedy}});
    d.welfare_step = doc.number_or("design.welfare_step", d.welfare_step);
    if (doc.has("design.beta0")) d.beta0 = doc.numbers("design.beta0");
    d.patient = doc.boolean_or("design.patient", d.patient);
    d.compare_grid = doc.boolean_or("design.compare_grid", d.compare_grid);
    if (doc.has("design.grid_lower")) d.grid_lower = doc.numbers("design.grid_lower");
    if (doc.has("design.grid_upper")) d.grid_upper = doc.numbers("design.grid_upper");

    auto& sch = d.schedule;
    sch.variant = pick<ScheduleVariant>("schedule.variant", doc.string_or("schedule.variant", "sim_default"),
                                        {{"sim_default", ScheduleVariant::sim_default},
                                         {"inverse_wave", ScheduleVariant::inverse_wave},
                                         {"norm_rescaled", ScheduleVariant::norm_rescaled},
                                         {"constant_smooth", ScheduleVariant::constant_smooth}});
    sch.J = doc.number_or("schedule.J", sch.J);
    sch.scale = doc.number_or("schedule.scale", sch.scale);
    sch.tau = doc.number_or("schedule.tau", sch.tau);
    sch.v = doc.number_or("schedule.v", sch.v);
    sch.c = doc.number_or("schedule.c", sch.c);
    sch.epsilon = doc.number_or("schedule.epsilon", sch.epsilon);

    d.discount = doc.number_or("dynamic.discount", d.discount);
    d.horizon = static_cast<int>(doc.integer_or("dynamic.horizon", d.horizon));
    d.starts = static_cast<int>(doc.integer_or("dynamic.starts", d.starts));
    d.truth_grid = count(doc, "dynamic.truth_grid", d.truth_grid);

    s.oracle.mode = pick<OracleMode>("oracle.mode", doc.string_or("oracle.mode", "analytic"),
                                     {{"analytic", OracleMode::analytic}, {"monte_carlo", OracleMode::monte_carlo}});
    s.oracle.clusters = count(doc, "oracle.clusters", s.oracle.clusters);
    s.oracle.replications = count(doc, "oracle.replications", s.oracle.replications);

    doc.check_all_used();
    s.validate();
    return s;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(ConfigDocument::load(path)); }

}  // namespace netpolicy::harness
