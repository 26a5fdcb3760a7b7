#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "netpolicy/policy.hpp"
#include "netpolicy/population.hpp"

namespace netpolicy {

enum class OutcomeVariant {
    quadratic_exposure,
    heterogeneous_by_x,
    global_mean,
    dynamic_carryover,
    // Outcome driven by the unit's own treatment and own propensity; no
    // network. With no treatment terms and sigma = 0 it is deterministic.
    reduced_form,
};

enum class NoiseKind { gaussian, bounded_uniform };

struct ExposureCoefficients {
    double direct = 0.0;     // phi1
    double linear = 0.0;     // phi2
    double quadratic = 0.0;  // phi3, signed
};

// m(d, p, p_prev) = intercept + own*d + prop*p + prop_sq*p^2 + own_x_prop*d*p
//                 + lag*p_prev + lag_sq*p_prev^2 + cross*p*p_prev
struct ReducedForm {
    double intercept = 0.0;
    double own = 0.0;
    double prop = 0.0;
    double prop_sq = 0.0;
    double own_x_prop = 0.0;
    double lag = 0.0;
    double lag_sq = 0.0;
    double cross = 0.0;

    bool has_lags() const { return lag != 0.0 || lag_sq != 0.0 || cross != 0.0; }
};

// Previous-period exposure terms of the dynamic variant.
struct Carryover {
    double linear = 0.0;
    double quadratic = 0.0;
};

struct OutcomeModel {
    OutcomeVariant variant = OutcomeVariant::quadratic_exposure;
    double phi0 = 0.0;
    ExposureCoefficients phi;
    std::map<int, ExposureCoefficients> phi_by_x;  // heterogeneous_by_x
    double treated_x_exposure = 0.0;               // coefficient on D * S
    double cost = 0.0;
    double noise_sigma = 0.0;
    NoiseKind noise_kind = NoiseKind::gaussian;
    std::vector<double> time_effects;  // alpha_t; missing periods contribute 0
    // sd of an additive shock drawn per (cluster, period); 0 disables.
    double cluster_period_sigma = 0.0;
    Carryover carryover;
    ReducedForm reduced;

    void validate() const;
    bool is_dynamic() const;
    double time_effect(int period) const;

    // phi = (0, 0, 1, -1.5), c = phi1, sigma = 1.
    static OutcomeModel synthetic_default();
};

// S_i = sum_j A_ij D_j / max(sum_j A_ij, 1).
std::vector<double> exposure(const Adjacency& adjacency, std::span<const std::uint8_t> treatments);

// Outcomes of every unit. `previous` is required by dynamic models.
std::vector<double> realize_outcomes(const ClusterPopulation& cluster, const OutcomeModel& model,
                                     const Assignment& current, int period, const Assignment* previous,
                                     std::uint64_t seed);

}  // namespace netpolicy
