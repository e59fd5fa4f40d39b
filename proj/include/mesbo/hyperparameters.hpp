#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "gp.hpp"
#include "random.hpp"

namespace mesbo {

struct CoordinateAscentOptions {
    std::size_t budget = 400;      ///< total objective evaluations across all starts
    std::size_t starts = 8;        ///< start 0 is the initial point; the rest are perturbations
    double initial_step = 1.0;
    double min_step = 1e-4;
    double shrink = 0.5;
    double perturbation = 1.0;     ///< std of the start perturbations
    double box_radius = 7.0;       ///< coordinates confined to init +- box_radius
    std::uint64_t seed = 0x5eedULL;
};

struct CoordinateAscentResult {
    VectorXd x;
    double value = -std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

/// Multi-start derivative-free coordinate ascent with geometric step shrinkage.
/// Non-finite objective values count as failures. Deterministic for fixed options.
inline CoordinateAscentResult coordinate_ascent(const std::function<double(const VectorXd&)>& objective,
                                                const VectorXd& init, const CoordinateAscentOptions& opt = {}) {
    CoordinateAscentResult best;
    best.x = init;
    std::size_t used = 0;
    auto eval = [&](const VectorXd& x) {
        ++used;
        const double v = objective(x);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    auto in_box = [&](VectorXd x) {
        for (Index i = 0; i < x.size(); ++i)
            x[i] = std::clamp(x[i], init[i] - opt.box_radius, init[i] + opt.box_radius);
        return x;
    };

    Rng rng(opt.seed);
    const std::size_t starts = std::max<std::size_t>(1, opt.starts);
    const std::size_t per_start = std::max<std::size_t>(1, opt.budget / starts);
    for (std::size_t s = 0; s < starts && used < opt.budget; ++s) {
        VectorXd x = init;
        if (s > 0) x = in_box(init + opt.perturbation * rng.normal_vector(init.size()));
        const std::size_t limit = std::min(opt.budget, used + per_start);
        double fx = eval(x);
        double step = opt.initial_step;
        while (used < limit && step >= opt.min_step) {
            bool improved = false;
            for (Index i = 0; i < x.size() && used < limit; ++i) {
                for (double dir : {1.0, -1.0}) {
                    if (used >= limit) break;
                    VectorXd cand = x;
                    cand[i] += dir * step;
                    cand = in_box(cand);
                    if (cand[i] == x[i]) continue;
                    const double fc = eval(cand);
                    if (fc > fx) {
                        x = cand;
                        fx = fc;
                        improved = true;
                        break;
                    }
                }
            }
            if (!improved) step *= opt.shrink;
        }
        if (fx > best.value) {
            best.value = fx;
            best.x = x;
        }
    }
    best.evaluations = used;
    return best;
}

struct HyperparameterFit {
    KernelParams params;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    bool warning = false;  ///< every evaluation failed; params == init
};

/// Point-estimate marginal-likelihood maximization in log-parameter space.
/// Noise is held fixed when the initial noise_var is zero.
inline HyperparameterFit fit_hyperparameters(const ObservationSet& data, const KernelParams& init,
                                             std::size_t budget = 400) {
    if (data.size() < 2) throw ArgumentError("fit_hyperparameters: requires t >= 2");
    init.validate();
    const Index d = init.bandwidths.size();
    const bool fit_noise = init.noise_var > 0.0;
    VectorXd theta(1 + d + (fit_noise ? 1 : 0));
    theta[0] = std::log(init.scale);
    theta.segment(1, d) = init.bandwidths.array().log().matrix();
    if (fit_noise) theta[1 + d] = std::log(init.noise_var);

    auto unpack = [&](const VectorXd& th) {
        KernelParams p;
        p.scale = std::exp(th[0]);
        p.bandwidths = th.segment(1, d).array().exp().matrix();
        p.noise_var = fit_noise ? std::exp(th[1 + d]) : init.noise_var;
        return p;
    };
    auto objective = [&](const VectorXd& th) {
        try {
            return log_marginal_likelihood(data, unpack(th));
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    CoordinateAscentOptions opt;
    opt.budget = budget;
    const auto res = coordinate_ascent(objective, theta, opt);
    HyperparameterFit fit;
    if (!std::isfinite(res.value)) {
        fit.params = init;
        fit.warning = true;
        return fit;
    }
    fit.params = unpack(res.x);
    fit.log_likelihood = res.value;
    return fit;
}

/// Log marginal likelihood under the summed kernel of an additive model.
inline double additive_log_marginal_likelihood(const ObservationSet& data, const Partition& partition,
                                               const std::vector<KernelParams>& component_params, double noise_var) {
    return AddGpPosterior(data, partition, component_params, noise_var).log_marginal_likelihood();
}

/// Random decomposition: shuffled dimensions chunked into groups of max_group_size.
inline Partition random_partition(std::size_t dim, std::size_t max_group_size, Rng& rng) {
    std::vector<std::size_t> perm(dim);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Partition p;
    for (std::size_t i = 0; i < dim; i += max_group_size) {
        const std::size_t end = std::min(dim, i + max_group_size);
        p.groups.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(i), perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return p.canonical();
}

inline std::vector<KernelParams> component_params_for(const Partition& partition, const KernelParams& base) {
    std::vector<KernelParams> out;
    out.reserve(partition.size());
    for (const auto& g : partition.groups) out.push_back(base.restricted(g));
    return out;
}

struct Decomposition {
    Partition partition;
    std::vector<KernelParams> component_params;
    double log_likelihood = -std::numeric_limits<double>::infinity();
};

/// Sample `n_candidates` random decompositions and keep the one with the highest
/// data likelihood. `base` supplies per-dimension bandwidths, the per-group scale
/// and the shared noise.
inline Decomposition learn_decomposition(const ObservationSet& data, const KernelParams& base,
                                         std::size_t n_candidates, std::size_t max_group_size, Rng& rng) {
    if (n_candidates == 0) throw ArgumentError("learn_decomposition: n_candidates must be >= 1");
    if (max_group_size == 0) throw ArgumentError("learn_decomposition: max_group_size must be >= 1");
    if (data.size() < 2) throw ArgumentError("learn_decomposition: requires t >= 2");
    const std::size_t dim = data.dim();
    if (base.dim() != dim) throw ArgumentError("learn_decomposition: base bandwidths must match data dimension");

    // Per-dimension scaled squared distances, shared by every candidate.
    const Index t = static_cast<Index>(data.size());
    std::vector<MatrixXd> sq(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const VectorXd c = data.points.col(static_cast<Index>(j)) / base.bandwidths[static_cast<Index>(j)];
        sq[j] = (c.replicate(1, t) - c.transpose().replicate(t, 1)).array().square().matrix();
    }
    auto score = [&](const Partition& cand) {
        MatrixXd k = MatrixXd::Zero(t, t);
        MatrixXd acc(t, t);
        for (const auto& g : cand.groups) {
            acc.setZero();
            for (std::size_t j : g) acc += sq[j];
            k.array() += base.scale * (-0.5 * acc.array()).exp();
        }
        k.diagonal().array() += base.noise_var;
        const auto [l, jitter] = detail::jittered_cholesky(k, base.scale * static_cast<double>(cand.size()));
        const VectorXd a = l.triangularView<Eigen::Lower>().solve(data.values);
        return -0.5 * a.squaredNorm() - 0.5 * detail::log_det_from_cholesky(l) -
               0.5 * static_cast<double>(t) * std::log(2.0 * std::numbers::pi);
    };

    Decomposition best;
    std::set<std::vector<std::vector<std::size_t>>> seen;
    for (std::size_t c = 0; c < n_candidates; ++c) {
        Partition cand = random_partition(dim, max_group_size, rng);
        if (!seen.insert(cand.groups).second) continue;
        double ll = -std::numeric_limits<double>::infinity();
        try {
            ll = score(cand);
        } catch (const NumericalError&) {
            continue;
        }
        auto params = component_params_for(cand, base);
        if (ll > best.log_likelihood) {
            best.partition = std::move(cand);
            best.component_params = std::move(params);
            best.log_likelihood = ll;
        }
    }
    if (best.partition.groups.empty()) throw NumericalError("learn_decomposition: every candidate failed to factorize");
    return best;
}

}  // namespace mesbo
