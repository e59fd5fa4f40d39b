#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gp.hpp"
#include "normal.hpp"
#include "random.hpp"

namespace mesbo {

/// Where a set of max-value samples came from.
enum class SamplerKind { gumbel, feature };

inline const char* to_string(SamplerKind s) { return s == SamplerKind::gumbel ? "gumbel" : "feature"; }

/// K samples of the function maximum y*, optionally tagged with an additive component.
struct MaxValueSamples {
    std::vector<double> values;
    SamplerKind source = SamplerKind::gumbel;
    std::optional<std::size_t> component;

    std::size_t size() const noexcept { return values.size(); }
};

/// Posterior mean/std over a finite representative set of inputs.
struct GridStats {
    MatrixXd grid;   ///< one full-dimensional point per row
    VectorXd means;
    VectorXd stds;   ///< floored at std_floor

    std::size_t size() const noexcept { return static_cast<std::size_t>(means.size()); }
};

/// Gumbel location a and scale b: G(z) = exp(-exp(-(z - a) / b)).
struct GumbelParams {
    double a = 0.0;
    double b = 1.0;
};

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kGumbelLowerQuantile = 0.25;
inline constexpr double kGumbelUpperQuantile = 0.75;

inline double gumbel_cdf(const GumbelParams& g, double z) { return std::exp(-std::exp(-(z - g.a) / g.b)); }

inline double gumbel_quantile(const GumbelParams& g, double r) { return g.a - g.b * std::log(-std::log(r)); }

inline double gumbel_mean(const GumbelParams& g) { return g.a + kEulerGamma * g.b; }

/// Default grid size: min(10000, 500 d).
inline std::size_t default_grid_size(std::size_t dim) { return std::min<std::size_t>(10000, 500 * dim); }

namespace detail {

inline GridStats make_grid_stats(MatrixXd grid, const std::function<PointPrediction(const VectorXd&)>& predict_fn,
                                 double std_floor) {
    GridStats stats;
    const Index n = grid.rows();
    stats.means.resize(n);
    stats.stds.resize(n);
    VectorXd x(grid.cols());
    for (Index i = 0; i < n; ++i) {
        x = grid.row(i).transpose();
        const auto p = predict_fn(x);
        stats.means[i] = p.mean;
        stats.stds[i] = std::max(p.std, std_floor);
    }
    stats.grid = std::move(grid);
    return stats;
}

}  // namespace detail

/// Posterior statistics on a shifted-Halton grid over the domain.
inline GridStats build_grid_stats(const GpPosterior& post, const Domain& domain, std::size_t n, Rng& rng) {
    if (n < 2) throw ArgumentError("build_grid_stats: grid size must be >= 2");
    if (domain.dim() != post.dim()) throw ArgumentError("build_grid_stats: domain dimension mismatch");
    MatrixXd grid = domain.from_unit(shifted_halton(n, domain.dim(), rng));
    const double floor = 1e-9 * std::sqrt(post.params().scale);
    return detail::make_grid_stats(std::move(grid), [&](const VectorXd& x) { return post.predict(x); }, floor);
}

/// Component-m statistics: the grid varies only the coordinates in A_m; the other
/// coordinates sit at the domain centre (the component kernel ignores them).
inline GridStats build_grid_stats(const AddGpPosterior& post, std::size_t m, const Domain& domain, std::size_t n,
                                  Rng& rng) {
    if (n < 2) throw ArgumentError("build_grid_stats: grid size must be >= 2");
    if (m >= post.components()) throw ArgumentError("build_grid_stats: invalid group index");
    const auto& dims = post.partition().groups[m];
    const MatrixXd unit = shifted_halton(n, dims.size(), rng);
    MatrixXd grid = domain.center().transpose().replicate(static_cast<Index>(n), 1);
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const Index j = static_cast<Index>(dims[k]);
        grid.col(j) = (domain.lower[j] + (domain.upper[j] - domain.lower[j]) * unit.col(static_cast<Index>(k)).array()).matrix();
    }
    const double floor = 1e-9 * std::sqrt(post.component_params()[m].scale);
    return detail::make_grid_stats(std::move(grid), [&](const VectorXd& x) { return post.predict_component(x, m); },
                                   floor);
}

/// log Pr[max over the grid < z] treating grid values as independent Gaussians.
inline double log_cdf_max(const GridStats& stats, double z) {
    double acc = 0.0;
    const Index n = stats.means.size();
    for (Index i = 0; i < n; ++i) acc += log_normal_cdf((z - stats.means[i]) / stats.stds[i]);
    return std::max(acc, -std::numeric_limits<double>::max());
}

/// Bisection for z with log_cdf_max(z) = log r. Stops once the log-CDF is within
/// `tol` of log r, or when the bracket can no longer shrink in double precision.
inline double invert_cdf_max(const GridStats& stats, double r, double tol = 1e-6) {
    if (!(r > 0.0 && r < 1.0)) throw ArgumentError("invert_cdf_max: r must lie in (0, 1)");
    if (!(tol > 0.0)) throw ArgumentError("invert_cdf_max: tol must be > 0");
    if (stats.size() == 0) throw ArgumentError("invert_cdf_max: empty grid");
    const double target = std::log(r);
    const double mu_max = stats.means.maxCoeff();
    const double sd_max = stats.stds.maxCoeff();
    double half = 5.0 * sd_max;
    double lo = mu_max - half, hi = mu_max + half;
    int doublings = 0;
    while (log_cdf_max(stats, lo) > target || log_cdf_max(stats, hi) < target) {
        if (++doublings > 60) throw NumericalError("invert_cdf_max: bracket expansion exceeded 60 doublings");
        half *= 2.0;
        lo = mu_max - half;
        hi = mu_max + half;
    }
    for (;;) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) return mid;
        const double v = log_cdf_max(stats, mid);
        if (std::abs(v - target) <= tol) return mid;
        (v < target ? lo : hi) = mid;
    }
}

/// Percentile matching at r1 = 0.25 and r2 = 0.75.
inline GumbelParams fit_gumbel(const GridStats& stats, double tol = 1e-6) {
    const double y1 = invert_cdf_max(stats, kGumbelLowerQuantile, tol);
    const double y2 = invert_cdf_max(stats, kGumbelUpperQuantile, tol);
    if (!(y2 > y1)) throw NumericalError("fit_gumbel: degenerate max-value CDF (upper quartile <= lower quartile)");
    const double l1 = std::log(-std::log(kGumbelLowerQuantile));
    const double l2 = std::log(-std::log(kGumbelUpperQuantile));
    GumbelParams g;
    g.b = (y2 - y1) / (l1 - l2);
    g.a = y1 + g.b * l1;
    return g;
}

inline MaxValueSamples sample_max_gumbel(const GumbelParams& params, Rng& rng, std::size_t k) {
    if (k == 0) throw ArgumentError("sample_max_gumbel: K must be >= 1");
    MaxValueSamples out;
    out.source = SamplerKind::gumbel;
    out.values.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.values.push_back(gumbel_quantile(params, rng.uniform_open()));
    return out;
}

}  // namespace mesbo
