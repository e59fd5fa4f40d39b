#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "gp.hpp"
#include "random.hpp"

namespace mesbo {

using ScoreFunction = std::function<double(const VectorXd&)>;

struct OptimizeResult {
    VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
};

inline std::size_t default_acquisition_budget(std::size_t dim) { return 2000 * dim; }

namespace detail {

// Golden-section maximization of a 1-d slice on [lo, hi]; returns the best point seen.
inline std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                                    double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    double best_x = fc >= fd ? c : d, best_f = std::max(fc, fd);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
            if (fc > best_f) best_f = fc, best_x = c;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
            if (fd > best_f) best_f = fd, best_x = d;
        }
    }
    return {best_x, best_f};
}

}  // namespace detail

/// Maximize `alpha` over the box: score a shifted-Halton probe set of size `budget`,
/// then refine the best 5 probes with coordinate-wise golden-section sweeps.
/// The returned value is never below the best probe.
inline OptimizeResult optimize_acquisition(const ScoreFunction& alpha, const Domain& domain, std::size_t budget, Rng& rng) {
    if (budget == 0) throw ArgumentError("optimize_acquisition: budget must be >= 1");
    const std::size_t dim = domain.dim();
    const MatrixXd probes = domain.from_unit(shifted_halton(budget, dim, rng));
    std::vector<double> vals(budget);
    VectorXd x(static_cast<Index>(dim));
    for (std::size_t i = 0; i < budget; ++i) {
        x = probes.row(static_cast<Index>(i)).transpose();
        vals[i] = alpha(x);
    }
    std::vector<std::size_t> order(budget);
    for (std::size_t i = 0; i < budget; ++i) order[i] = i;
    const std::size_t n_refine = std::min<std::size_t>(5, budget);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_refine), order.end(),
                      [&](std::size_t a, std::size_t b) { return vals[a] > vals[b] || (vals[a] == vals[b] && a < b); });

    OptimizeResult best;
    best.x = probes.row(static_cast<Index>(order[0])).transpose();
    best.value = vals[order[0]];
    if (!std::isfinite(best.value)) return best;

    const VectorXd width = domain.width();
    const double spacing = 1.0 / std::pow(static_cast<double>(budget), 1.0 / static_cast<double>(dim));
    for (std::size_t r = 0; r < n_refine; ++r) {
        VectorXd cur = probes.row(static_cast<Index>(order[r])).transpose();
        double fcur = vals[order[r]];
        double radius = 2.0 * spacing;
        for (int sweep = 0; sweep < 3; ++sweep, radius *= 0.5) {
            for (Index j = 0; j < static_cast<Index>(dim); ++j) {
                const double lo = std::max(domain.lower[j], cur[j] - radius * width[j]);
                const double hi = std::min(domain.upper[j], cur[j] + radius * width[j]);
                if (!(hi > lo)) continue;
                VectorXd probe = cur;
                auto slice = [&](double v) {
                    probe[j] = v;
                    return alpha(probe);
                };
                const auto [xj, fj] = detail::golden_section_max(slice, lo, hi, 1e-5 * (hi - lo));
                if (fj > fcur) {
                    cur[j] = xj;
                    fcur = fj;
                }
            }
        }
        if (fcur > best.value) {
            best.value = fcur;
            best.x = cur;
        }
    }
    return best;
}

/// Exhaustive argmax over candidate rows; the first maximizer wins ties.
inline OptimizeResult optimize_acquisition_discrete(const ScoreFunction& alpha, const MatrixXd& candidates) {
    if (candidates.rows() == 0) throw ArgumentError("optimize_acquisition_discrete: no candidates");
    OptimizeResult best;
    VectorXd x(candidates.cols());
    for (Index i = 0; i < candidates.rows(); ++i) {
        x = candidates.row(i).transpose();
        const double v = alpha(x);
        if (i == 0 || v > best.value) {
            best.value = v;
            best.x = x;
        }
    }
    return best;
}

inline Index argmax_discrete(const ScoreFunction& alpha, const MatrixXd& candidates) {
    Index arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    VectorXd x(candidates.cols());
    for (Index i = 0; i < candidates.rows(); ++i) {
        x = candidates.row(i).transpose();
        const double v = alpha(x);
        if (i == 0 || v > best) best = v, arg = i;
    }
    return arg;
}

/// Sub-box of `domain` on the dimensions `dims`.
inline Domain subdomain(const Domain& domain, const std::vector<std::size_t>& dims) {
    VectorXd lo(static_cast<Index>(dims.size())), hi(static_cast<Index>(dims.size()));
    for (std::size_t k = 0; k < dims.size(); ++k) {
        lo[static_cast<Index>(k)] = domain.lower[static_cast<Index>(dims[k])];
        hi[static_cast<Index>(k)] = domain.upper[static_cast<Index>(dims[k])];
    }
    return {lo, hi};
}

/// Optimize each component score over its own sub-box and concatenate the
/// per-group maximizers. Component scores receive full-length inputs whose
/// coordinates outside A_m sit at the domain centre. `budget_per_dim` probes per
/// active dimension (0 = default).
inline VectorXd optimize_acquisition_per_component(const std::vector<ScoreFunction>& alphas, const Partition& partition,
                                                   const Domain& domain, std::size_t budget_per_dim, Rng& rng,
                                                   std::vector<double>* values = nullptr) {
    if (alphas.size() != partition.size())
        throw ArgumentError("optimize_acquisition_per_component: one score function per group required");
    partition.validate(domain.dim());
    VectorXd result = domain.center();
    if (values) values->assign(partition.size(), 0.0);
    for (std::size_t m = 0; m < partition.size(); ++m) {
        const auto& dims = partition.groups[m];
        const Domain sub = subdomain(domain, dims);
        VectorXd full = domain.center();
        auto sub_alpha = [&](const VectorXd& u) {
            for (std::size_t k = 0; k < dims.size(); ++k) full[static_cast<Index>(dims[k])] = u[static_cast<Index>(k)];
            return alphas[m](full);
        };
        const std::size_t budget = budget_per_dim ? budget_per_dim * dims.size() : default_acquisition_budget(dims.size());
        const auto res = optimize_acquisition(sub_alpha, sub, budget, rng);
        for (std::size_t k = 0; k < dims.size(); ++k) result[static_cast<Index>(dims[k])] = res.x[static_cast<Index>(k)];
        if (values) (*values)[m] = res.value;
    }
    return result;
}

}  // namespace mesbo
