#include "netpolicy/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "netpolicy/errors.hpp"

namespace netpolicy {

namespace {

std::size_t per_axis(std::size_t count, std::size_t p) {
    auto m = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(count), 1.0 / static_cast<double>(p)) - 1e-9));
    while (static_cast<double>(std::pow(static_cast<double>(m), static_cast<double>(p))) < static_cast<double>(count)) ++m;
    return std::max<std::size_t>(m, 1);
}

// Row-major lattice of `m` points per axis (cell-centred or inclusive).
std::vector<Beta> lattice(std::span<const double> lower, std::span<const double> upper, std::size_t m,
                          std::size_t limit, bool centred) {
    const std::size_t p = lower.size();
    std::vector<Beta> out;
    std::vector<std::size_t> idx(p, 0);
    while (out.size() < limit) {
        Beta b(p);
        for (std::size_t j = 0; j < p; ++j) {
            // Last axis varies fastest.
            const std::size_t i = idx[j];
            const double span = upper[j] - lower[j];
            if (centred) {
                b[j] = lower[j] + span * (static_cast<double>(i) + 0.5) / static_cast<double>(m);
            } else {
                b[j] = m == 1 ? lower[j] + 0.5 * span : lower[j] + span * static_cast<double>(i) / static_cast<double>(m - 1);
            }
        }
        out.push_back(std::move(b));
        std::size_t j = p;
        while (j > 0) {
            --j;
            if (++idx[j] < m) break;
            idx[j] = 0;
            if (j == 0) return out;
        }
    }
    return out;
}

std::size_t nearest(const std::vector<GridPointResult>& pts, std::span<const double> beta) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < pts.size(); ++g) {
        double d = 0.0;
        for (std::size_t j = 0; j < beta.size(); ++j) d += (beta[j] - pts[g].beta[j]) * (beta[j] - pts[g].beta[j]);
        if (d < best_d) {
            best_d = d;
            best = g;
        }
    }
    return best;
}

// Quadratic features 1, b_j, b_j b_l (j <= l).
std::vector<double> features(std::span<const double> b) {
    std::vector<double> f{1.0};
    for (double v : b) f.push_back(v);
    for (std::size_t j = 0; j < b.size(); ++j) {
        for (std::size_t l = j; l < b.size(); ++l) f.push_back(b[j] * b[l]);
    }
    return f;
}

}  // namespace

std::vector<Beta> grid_points(const PolicyClass& policy, std::size_t count) {
    policy.validate();
    require(count >= 1, "the grid needs at least one point");
    return lattice(policy.lower, policy.upper, per_axis(count, policy.dim()), count, true);
}

std::vector<Beta> evaluation_lattice(std::span<const double> lower, std::span<const double> upper) {
    const std::size_t p = lower.size();
    const std::size_t m = p == 1 ? 10000 : p == 2 ? 100 : 10;
    return lattice(lower, upper, m, std::numeric_limits<std::size_t>::max(), false);
}

double surrogate_welfare(const GridSearchRun& run, std::span<const double> beta) {
    require(!run.points.empty(), "empty grid search run");
    const auto& pt = run.points[nearest(run.points, beta)];
    double w = pt.w_bar;
    for (std::size_t j = 0; j < beta.size(); ++j) w += pt.v_hat[j] * (beta[j] - pt.beta[j]);
    return w;
}

GridSearchRun run_grid_search(const std::vector<ClusterPopulation>& clusters, const OutcomeModel& model,
                              const PolicyClass& policy, double eta, const GridSearchOptions& options) {
    policy.validate();
    require(!clusters.empty() && clusters.size() % 2 == 0, "the number of clusters must be even and positive");
    require(eta > 0.0, "eta must be positive");
    const std::size_t G = clusters.size() / 2;
    const std::size_t p = policy.dim();
    GridSearchRun run;
    run.lower = policy.lower;
    run.upper = policy.upper;
    run.path.assign(clusters.size(), std::vector<Beta>(p));

    const auto grid = grid_points(policy, G);
    for (std::size_t g = 0; g < G; ++g) {
        ClusterField fields[2] = {ClusterField(clusters[2 * g], model, policy, options.sampling),
                                  ClusterField(clusters[2 * g + 1], model, policy, options.sampling)};
        std::optional<ClusterSample> base[2];
        if (options.mode == BaselineMode::with_baseline) {
            for (int h = 0; h < 2; ++h) base[h] = fields[h].observe(grid[g], 0);
        }
        GridPointResult pt{grid[g], 0.0, Beta(p, 0.0)};
        for (std::size_t t = 1; t <= p; ++t) {
            auto design = make_pair_design(static_cast<int>(g), {static_cast<int>(2 * g), static_cast<int>(2 * g + 1)},
                                           grid[g], eta, t - 1, policy);
            PairPanel panel{policy, design, {base[0], base[1]}, {}};
            for (int h = 0; h < 2; ++h) {
                Beta used = design.perturbed(h);
                panel.outcome[h] = fields[h].observe(used, static_cast<int>(t));
                run.path[2 * g + h][t - 1] = std::move(used);
                double level = panel.outcome[h].mean() - (base[h] ? base[h]->mean() : 0.0);
                pt.w_bar += level / (2.0 * static_cast<double>(p));
            }
            pt.v_hat[t - 1] = marginal_effect_pair(panel, options.mode);
        }
        run.points.push_back(std::move(pt));
    }

    // Gradient-augmented surrogate.
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& b : evaluation_lattice(run.lower, run.upper)) {
        double w = surrogate_welfare(run, b);
        if (w > best) {
            best = w;
            run.beta_hat_ow = b;
        }
    }

    // Best observed grid point.
    std::size_t top = 0;
    for (std::size_t g = 1; g < G; ++g) {
        if (run.points[g].w_bar > run.points[top].w_bar) top = g;
    }
    run.beta_best_point = run.points[top].beta;

    // Least-squares quadratic through the grid levels; falls back to the best
    // point when the grid cannot identify the quadratic.
    const std::size_t nf = features(run.points[0].beta).size();
    run.beta_quadratic = run.beta_best_point;
    if (G >= nf) {
        Eigen::MatrixXd X(G, nf);
        Eigen::VectorXd y(G);
        for (std::size_t g = 0; g < G; ++g) {
            auto f = features(run.points[g].beta);
            for (std::size_t c = 0; c < nf; ++c) X(g, c) = f[c];
            y(g) = run.points[g].w_bar;
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() == static_cast<Eigen::Index>(nf)) {
            Eigen::VectorXd coef = qr.solve(y);
            double top_fit = -std::numeric_limits<double>::infinity();
            for (const auto& b : evaluation_lattice(run.lower, run.upper)) {
                auto f = features(b);
                double v = 0.0;
                for (std::size_t c = 0; c < nf; ++c) v += coef(c) * f[c];
                if (v > top_fit) {
                    top_fit = v;
                    run.beta_quadratic = b;
                }
            }
        }
    }
    return run;
}

double grid_in_sample_regret(const GridSearchRun& run, const WelfareOracle& oracle,
                             std::optional<double> welfare_at_optimum) {
    require(!run.points.empty(), "empty grid search run");
    double w_star;
    if (welfare_at_optimum) {
        w_star = *welfare_at_optimum;
    } else {
        double b[1] = {optimal_beta(oracle)};
        w_star = welfare(oracle, b).value;
    }
    double mean = 0.0;
    for (const auto& pt : run.points) mean += welfare(oracle, pt.beta).value;
    return w_star - mean / static_cast<double>(run.points.size());
}

}  // namespace netpolicy
