#include "netpolicy/dynamic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

std::vector<std::array<double, 2>> triad_grid(std::size_t points) {
    require(points >= 1, "the grid needs at least one point");
    const auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(points)) - 1e-12));
    std::vector<std::array<double, 2>> grid;
    for (std::size_t r = 0; r < points; ++r) {
        const double md = static_cast<double>(m);
        grid.push_back({(static_cast<double>(r % m) + 0.5) / md, (static_cast<double>(r / m) + 0.5) / md});
    }
    return grid;
}

DynamicSurrogate run_triad_experiment(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                                      double eta, const SamplingOptions& sampling) {
    require(!clusters.empty() && clusters.size() % 3 == 0, "the number of clusters must be a positive multiple of 3");
    require(model.variant == OutcomeVariant::dynamic_carryover || model.variant == OutcomeVariant::reduced_form,
            "the triad experiment needs a dynamic outcome model");
    require(eta > 0.0, "eta must be positive");
    const PolicyClass policy = PolicyClass::constant();
    DynamicSurrogate s;
    s.eta = eta;
    for (const auto& [b1, b2] : triad_grid(clusters.size() / 3)) {
        require(b1 + eta <= 1.0 && b2 + eta <= 1.0, "eta pushes a triad parameter above 1");
        // (first period, second period) per triad member.
        const double plan[3][2] = {{b2, b1}, {b2 + eta, b1}, {b2, b1 + eta}};
        double ybar[3];
        const std::size_t r = s.grid.size();
        for (int h = 0; h < 3; ++h) {
            ClusterField field(clusters[3 * r + h], model, policy, sampling);
            double first[1] = {plan[h][0]}, second[1] = {plan[h][1]};
            field.observe(first, 1);
            ybar[h] = field.observe(second, 2).mean();
        }
        SurrogatePoint pt;
        pt.beta1 = b1;
        pt.beta2 = b2;
        pt.g1 = (ybar[2] - ybar[0]) / eta;
        pt.g2 = (ybar[1] - ybar[0]) / eta;
        // The triad mean sits eta/3 up each axis; recentre on the grid point.
        pt.gamma_tilde = (ybar[0] + ybar[1] + ybar[2]) / 3.0 - eta * (pt.g1 + pt.g2) / 3.0;
        s.grid.push_back(pt);
    }
    return s;
}

double surrogate_gamma(const DynamicSurrogate& s, double beta2, double beta1) {
    require(beta1 >= 0.0 && beta1 <= 1.0 && beta2 >= 0.0 && beta2 <= 1.0, "query lies outside the unit square");
    require(!s.grid.empty(), "empty surrogate");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < s.grid.size(); ++r) {
        const auto& p = s.grid[r];
        double d = (beta1 - p.beta1) * (beta1 - p.beta1) + (beta2 - p.beta2) * (beta2 - p.beta2);
        if (d < best_d) {
            best_d = d;
            best = r;
        }
    }
    const auto& p = s.grid[best];
    return p.gamma_tilde + p.g2 * (beta2 - p.beta2) + p.g1 * (beta1 - p.beta1);
}

GammaFunction surrogate_function(const DynamicSurrogate& surrogate) {
    return [&surrogate](double current, double previous) { return surrogate_gamma(surrogate, previous, current); };
}

void write_surrogate_csv(const DynamicSurrogate& s, std::ostream& out) {
    out << "beta1,beta2,gamma_tilde,g1,g2\n";
    out.precision(17);
    for (const auto& p : s.grid) {
        out << p.beta1 << ',' << p.beta2 << ',' << p.gamma_tilde << ',' << p.g1 << ',' << p.g2 << '\n';
    }
}

double TransitionFamily::next(const std::array<double, 3>& theta, double last, double before) const {
    return std::clamp(theta[0] + theta[1] * last + theta[2] * before, 0.0, 1.0);
}

std::vector<double> policy_path(const TransitionFamily& family, const std::array<double, 3>& theta, int horizon) {
    std::vector<double> path;
    double last = 0.0, before = 0.0;
    for (int t = 1; t <= horizon; ++t) {
        double b = family.next(theta, last, before);
        path.push_back(b);
        before = last;
        last = b;
    }
    return path;
}

double discounted_welfare(const GammaFunction& gamma, const TransitionFamily& family,
                          const std::array<double, 3>& theta, double q, int horizon) {
    double total = 0.0, weight = 1.0, last = 0.0, before = 0.0;
    for (int t = 1; t <= horizon; ++t) {
        double b = family.next(theta, last, before);
        weight *= q;
        total += weight * gamma(b, last);
        before = last;
        last = b;
    }
    return total;
}

namespace {

std::array<double, 3> clamp_theta(const TransitionFamily& f, std::array<double, 3> t) {
    for (int i = 0; i < 3; ++i) t[i] = std::clamp(t[i], f.lower[i], f.upper[i]);
    return t;
}

}  // namespace

DynamicPolicy optimize_dynamic_policy(const GammaFunction& objective, const TransitionFamily& family, double q,
                                      int horizon, const OptimizerOptions& options, const GammaFunction& truth) {
    require(horizon >= 1, "horizon must be at least 1");
    require(q > 0.0 && q < 1.0, "discount must lie in (0,1)");
    require(options.starts >= 1, "need at least one start");
    require(options.gradient_step > 0.0, "gradient step must be positive");
    for (int i = 0; i < 3; ++i) require(family.lower[i] <= family.upper[i], "invalid transition parameter box");
    auto value = [&](const std::array<double, 3>& th) { return discounted_welfare(objective, family, th, q, horizon); };

    DynamicPolicy best;
    best.surrogate_value = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < options.starts; ++s) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(s)));
        std::array<double, 3> th;
        for (int i = 0; i < 3; ++i) th[i] = family.lower[i] + (family.upper[i] - family.lower[i]) * uniform01(rng);
        double f = value(th);
        double step = 0.25;
        for (int it = 0; it < options.max_iterations && step > 1e-9; ++it) {
            std::array<double, 3> g{};
            double norm = 0.0;
            for (int i = 0; i < 3; ++i) {
                auto up = th, down = th;
                up[i] += options.gradient_step;
                down[i] -= options.gradient_step;
                g[i] = (value(clamp_theta(family, up)) - value(clamp_theta(family, down))) / (2.0 * options.gradient_step);
                norm += g[i] * g[i];
            }
            norm = std::sqrt(norm);
            if (norm == 0.0) break;
            std::array<double, 3> cand;
            for (int i = 0; i < 3; ++i) cand[i] = th[i] + step * g[i] / norm;
            cand = clamp_theta(family, cand);
            double fc = value(cand);
            if (fc > f) {
                th = cand;
                f = fc;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        if (f > best.surrogate_value) {
            best.theta = th;
            best.surrogate_value = f;
        }
    }
    best.horizon = horizon;
    best.discount = q;
    best.path = policy_path(family, best.theta, horizon);
    if (truth) best.true_value = discounted_welfare(truth, family, best.theta, q, horizon);
    return best;
}

DynamicPolicy optimize_dynamic_policy(const DynamicSurrogate& surrogate, const TransitionFamily& family, double q,
                                      int horizon, const OptimizerOptions& options, const GammaFunction& truth) {
    return optimize_dynamic_policy(surrogate_function(surrogate), family, q, horizon, options, truth);
}

}  // namespace netpolicy
