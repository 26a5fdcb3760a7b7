#include "netpolicy/outcomes.hpp"

#include <cmath>
#include <sstream>

#include "netpolicy/errors.hpp"
#include "netpolicy/seeding.hpp"

namespace netpolicy {

void OutcomeModel::validate() const {
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be a finite non-negative number");
    require(cluster_period_sigma >= 0.0, "cluster_period_sigma must be non-negative");
    if (variant == OutcomeVariant::heterogeneous_by_x) {
        require(!phi_by_x.empty(), "heterogeneous_by_x needs one (phi1, phi2, phi3) triple per covariate level");
    }
}

bool OutcomeModel::is_dynamic() const {
    return variant == OutcomeVariant::dynamic_carryover ||
           (variant == OutcomeVariant::reduced_form && reduced.has_lags());
}

double OutcomeModel::time_effect(int period) const {
    if (period < 0 || static_cast<std::size_t>(period) >= time_effects.size()) return 0.0;
    return time_effects[static_cast<std::size_t>(period)];
}

OutcomeModel OutcomeModel::synthetic_default() {
    OutcomeModel m;
    m.phi = {0.0, 1.0, -1.5};
    m.cost = m.phi.direct;
    m.noise_sigma = 1.0;
    return m;
}

std::vector<double> exposure(const Adjacency& adjacency, std::span<const std::uint8_t> treatments) {
    require(treatments.size() == adjacency.size(), "treatment vector length must equal cluster size");
    std::vector<double> s(adjacency.size(), 0.0);
    for (std::size_t i = 0; i < adjacency.size(); ++i) {
        auto row = adjacency.neighbors(i);
        if (row.empty()) continue;
        std::size_t treated = 0;
        for (int j : row) treated += treatments[j];
        s[i] = static_cast<double>(treated) / static_cast<double>(row.size());
    }
    return s;
}

namespace {

const ExposureCoefficients& coefficients_for(const OutcomeModel& model, double x) {
    if (model.variant != OutcomeVariant::heterogeneous_by_x) return model.phi;
    auto level = static_cast<int>(std::lround(x));
    auto it = model.phi_by_x.find(level);
    if (it == model.phi_by_x.end() || static_cast<double>(level) != x) {
        std::ostringstream msg;
        msg << "heterogeneous model has no coefficients for covariate level " << x;
        throw InvalidArgument(msg.str());
    }
    return it->second;
}

double draw_noise(const OutcomeModel& model, Rng& rng) {
    if (model.noise_sigma == 0.0) return 0.0;
    if (model.noise_kind == NoiseKind::bounded_uniform) {
        // Uniform with the configured standard deviation.
        return model.noise_sigma * std::sqrt(3.0) * (2.0 * uniform01(rng) - 1.0);
    }
    return model.noise_sigma * standard_normal(rng);
}

}  // namespace

std::vector<double> realize_outcomes(const ClusterPopulation& cluster, const OutcomeModel& model,
                                     const Assignment& current, int period, const Assignment* previous,
                                     std::uint64_t seed) {
    model.validate();
    const std::size_t n = cluster.size();
    require(current.treated.size() == n && current.propensity.size() == n,
            "assignment length must equal cluster size");
    if (model.is_dynamic()) {
        require(previous != nullptr, "dynamic outcome model requires previous-period treatments");
    }
    if (previous != nullptr) {
        require(previous->treated.size() == n && previous->propensity.size() == n,
                "previous assignment length must equal cluster size");
    }

    const auto& d = current.treated;
    std::vector<double> y(n);
    switch (model.variant) {
        case OutcomeVariant::quadratic_exposure:
        case OutcomeVariant::heterogeneous_by_x:
        case OutcomeVariant::dynamic_carryover: {
            auto s = exposure(cluster.adjacency, d);
            std::vector<double> s_prev;
            if (model.variant == OutcomeVariant::dynamic_carryover) s_prev = exposure(cluster.adjacency, previous->treated);
            for (std::size_t i = 0; i < n; ++i) {
                const auto& c = coefficients_for(model, cluster.covariates[i]);
                double di = d[i];
                y[i] = model.phi0 + (c.direct - model.cost) * di + c.linear * s[i] + c.quadratic * s[i] * s[i] +
                       model.treated_x_exposure * di * s[i];
                if (!s_prev.empty()) {
                    y[i] += model.carryover.linear * s_prev[i] + model.carryover.quadratic * s_prev[i] * s_prev[i];
                }
            }
            break;
        }
        case OutcomeVariant::global_mean: {
            std::size_t treated = 0;
            for (auto v : d) treated += v;
            const double mean = static_cast<double>(treated) / static_cast<double>(n);
            const auto& c = model.phi;
            for (std::size_t i = 0; i < n; ++i) {
                double di = d[i];
                y[i] = model.phi0 + (c.direct - model.cost) * di + c.linear * mean + c.quadratic * mean * mean +
                       model.treated_x_exposure * di * mean;
            }
            break;
        }
        case OutcomeVariant::reduced_form: {
            const auto& r = model.reduced;
            for (std::size_t i = 0; i < n; ++i) {
                double di = d[i];
                double p = current.propensity[i];
                double q = previous ? previous->propensity[i] : 0.0;
                y[i] = r.intercept + (r.own - model.cost) * di + r.prop * p + r.prop_sq * p * p +
                       r.own_x_prop * di * p + r.lag * q + r.lag_sq * q * q + r.cross * p * q;
            }
            break;
        }
    }

    double common = model.time_effect(period) + cluster.cluster_effect;
    if (model.cluster_period_sigma > 0.0) {
        Rng shock(derive_seed(seed, stream::shock));
        common += model.cluster_period_sigma * standard_normal(shock);
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) y[i] += common + draw_noise(model, rng);
    return y;
}

}  // namespace netpolicy
