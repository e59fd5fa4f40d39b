#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "acquisition.hpp"
#include "features.hpp"
#include "gp.hpp"
#include "gumbel.hpp"
#include "hyperparameters.hpp"
#include "optimizer.hpp"
#include "random.hpp"

namespace mesbo {

using ObjectiveFunction = std::function<double(const VectorXd&)>;

/// Structure search settings. With `samples` > 0 the likelihood is scored on that
/// many fresh uniform evaluations (not added to the run's observations);
/// with 0 it uses the initial design.
struct DecompositionLearning {
    std::size_t n_candidates = 10000;
    std::size_t max_group_size = 2;
    std::size_t samples = 500;
};

/// Settings of one optimization run.
struct BoConfig {
    AcquisitionSpec acquisition;
    std::size_t iterations = 60;               ///< T
    std::size_t num_features = 500;            ///< D for the feature sampler (split across groups when additive)
    std::optional<std::size_t> grid_size;      ///< unset = min(10000, 500 d) (per group when additive)
    std::optional<std::size_t> refit_every;    ///< unset = fixed hyperparameters
    std::size_t refit_budget = 300;
    std::uint64_t seed = 1;
    std::size_t initial_design = 1;
    bool clamp = true;
    KernelParams kernel;                       ///< full-dimensional; per-group scale for additive runs
    double noise_std = 0.0;                    ///< observation noise added by the loop
    std::optional<std::size_t> acq_budget;     ///< probes per input dimension; unset = 2000
    std::size_t restarts = 10;
    bool track_recommendation = true;
    std::optional<Partition> partition;        ///< additive structure when known
    std::optional<DecompositionLearning> learn;

    std::size_t probes_per_dim() const { return acq_budget.value_or(2000); }

    void validate(std::size_t dim) const {
        acquisition.validate();
        if (iterations == 0) throw ArgumentError("BoConfig: T must be >= 1");
        if (refit_every && *refit_every == 0) throw ArgumentError("BoConfig: refit_every must be >= 1");
        if (num_features == 0) throw ArgumentError("BoConfig: D must be >= 1");
        if (restarts == 0) throw ArgumentError("BoConfig: restarts must be >= 1");
        if (grid_size && *grid_size < 2) throw ArgumentError("BoConfig: grid_size must be >= 2");
        if (!(noise_std >= 0.0)) throw ArgumentError("BoConfig: noise_std must be >= 0");
        kernel.validate();
        if (kernel.dim() != dim) throw ArgumentError("BoConfig: kernel bandwidths must match domain dimension");
        if (is_additive(acquisition.kind)) {
            if (!partition && !learn) throw ArgumentError("BoConfig: additive methods need a partition or learn spec");
            if (partition) partition->validate(dim);
            if (!partition && learn && learn->samples == 0 && initial_design < 2)
                throw ArgumentError("BoConfig: decomposition learning needs initial_design >= 2");
        }
    }
};

struct Evaluation {
    VectorXd x;
    double y = 0.0;  ///< observed (noisy) value
    double f = 0.0;  ///< noiseless objective value
};

struct IterationRecord {
    std::size_t t = 0;
    VectorXd x;
    double y = 0.0;
    double f = 0.0;
    std::vector<std::vector<double>> y_star;  ///< per component (one entry for full models)
    double max_observed_before = -std::numeric_limits<double>::infinity();
    double acq_value = 0.0;
    double acq_seconds = 0.0;
    double best_f = 0.0;                      ///< cumulative best noiseless value including the initial design
    std::optional<VectorXd> recommendation;   ///< argmax of the posterior mean after this iteration
    std::optional<double> recommendation_f;
    bool refit = false;
};

struct BoTrace {
    std::string method;
    std::vector<Evaluation> initial;
    std::vector<IterationRecord> records;
    std::optional<std::string> error;
    KernelParams final_params;
    std::optional<Partition> partition;

    bool ok() const noexcept { return !error.has_value(); }
};

struct AdaptationResult {
    KernelParams params;
    bool refit = false;
    bool warning = false;
};

/// Refit when t is a multiple of `refit_every` (unset = never), warm-starting from `current`.
inline AdaptationResult model_adaptation_step(const ObservationSet& data, const KernelParams& current, std::size_t t,
                                              std::optional<std::size_t> refit_every, std::size_t budget = 300) {
    if (!refit_every || t == 0 || t % *refit_every != 0 || data.size() < 2) return {current, false, false};
    const auto fit = fit_hyperparameters(data, current, budget);
    return {fit.params, true, fit.warning};
}

namespace detail {

// Shared base parameters refit under the summed kernel of a fixed partition.
inline AdaptationResult additive_adaptation_step(const ObservationSet& data, const Partition& partition,
                                                 const KernelParams& current, std::size_t t,
                                                 std::optional<std::size_t> refit_every, std::size_t budget) {
    if (!refit_every || t == 0 || t % *refit_every != 0 || data.size() < 2) return {current, false, false};
    const Index d = current.bandwidths.size();
    const bool fit_noise = current.noise_var > 0.0;
    VectorXd theta(1 + d + (fit_noise ? 1 : 0));
    theta[0] = std::log(current.scale);
    theta.segment(1, d) = current.bandwidths.array().log().matrix();
    if (fit_noise) theta[1 + d] = std::log(current.noise_var);
    auto unpack = [&](const VectorXd& th) {
        return KernelParams(std::exp(th[0]), th.segment(1, d).array().exp().matrix(),
                            fit_noise ? std::exp(th[1 + d]) : current.noise_var);
    };
    auto objective = [&](const VectorXd& th) {
        const auto p = unpack(th);
        try {
            return additive_log_marginal_likelihood(data, partition, component_params_for(partition, p), p.noise_var);
        } catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    CoordinateAscentOptions opt;
    opt.budget = budget;
    const auto res = coordinate_ascent(objective, theta, opt);
    if (!std::isfinite(res.value)) return {current, true, true};
    return {unpack(res.x), true, false};
}

inline double margin_from_range(double lo, double hi, double scale) {
    return 1e-3 * std::max(hi - lo, 1e-9 * std::sqrt(scale));
}

inline std::vector<double> clamp_samples(std::vector<double> v, std::optional<double> floor) {
    if (floor)
        for (double& y : v) y = std::max(y, *floor);
    return v;
}

inline double feature_noise(const KernelParams& p) { return std::max(p.noise_var, 1e-8 * p.scale); }

// Samples of y* for a full model.
inline MaxValueSamples sample_max_values(const GpPosterior& post, const Domain& domain, const BoConfig& cfg,
                                         std::size_t k, SamplerKind sampler, Rng& rng,
                                         std::optional<GumbelParams>* gumbel_out = nullptr) {
    const auto& data = post.data();
    const std::size_t n_grid = cfg.grid_size.value_or(default_grid_size(domain.dim()));
    if (sampler == SamplerKind::gumbel) {
        const GridStats stats = build_grid_stats(post, domain, n_grid, rng);
        const GumbelParams gp = fit_gumbel(stats);
        if (gumbel_out) *gumbel_out = gp;
        MaxValueSamples ys = sample_max_gumbel(gp, rng, k);
        if (cfg.clamp && !data.empty()) {
            const double floor = data.max_value() +
                                 margin_from_range(stats.means.minCoeff(), stats.means.maxCoeff(), post.params().scale);
            ys.values = clamp_samples(std::move(ys.values), floor);
        }
        return ys;
    }
    const FeatureMap map = build_feature_map(post.params(), cfg.num_features, rng);
    const FeaturePosterior fp = feature_posterior(map, data, feature_noise(post.params()));
    std::optional<double> floor;
    if (cfg.clamp && !data.empty()) {
        const MatrixXd pts = domain.from_unit(shifted_halton(200 * domain.dim(), domain.dim(), rng));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Index i = 0; i < pts.rows(); ++i) {
            const double m = post.mean(pts.row(i).transpose());
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
        floor = data.max_value() + margin_from_range(lo, hi, post.params().scale);
    }
    return sample_max_features(fp, map, domain, rng, k, cfg.restarts, floor);
}

// Samples of y*^(m) for every component of an additive model.
inline std::vector<MaxValueSamples> sample_component_max_values(const AddGpPosterior& post, const Domain& domain,
                                                                const BoConfig& cfg, std::size_t k,
                                                                SamplerKind sampler, Rng& rng) {
    const auto& data = post.data();
    const std::size_t n_comp = post.components();
    std::vector<MaxValueSamples> out;
    out.reserve(n_comp);
    // Component floor: largest component mean at an observed input, plus margin.
    auto component_floor = [&](std::size_t m, double lo, double hi) -> std::optional<double> {
        if (!cfg.clamp || data.empty()) return std::nullopt;
        double best = -std::numeric_limits<double>::infinity();
        for (Index i = 0; i < data.points.rows(); ++i)
            best = std::max(best, post.component_mean(data.points.row(i).transpose(), m));
        return best + margin_from_range(lo, hi, post.component_params()[m].scale);
    };
    if (sampler == SamplerKind::gumbel) {
        for (std::size_t m = 0; m < n_comp; ++m) {
            const std::size_t n_grid = cfg.grid_size.value_or(default_grid_size(post.partition().groups[m].size()));
            const GridStats stats = build_grid_stats(post, m, domain, n_grid, rng);
            MaxValueSamples ys = sample_max_gumbel(fit_gumbel(stats), rng, k);
            ys.component = m;
            ys.values = clamp_samples(std::move(ys.values),
                                      component_floor(m, stats.means.minCoeff(), stats.means.maxCoeff()));
            out.push_back(std::move(ys));
        }
        return out;
    }
    const std::size_t per_group = std::max<std::size_t>(50, cfg.num_features / n_comp);
    const FeatureMap map =
        build_additive_feature_map(post.partition(), post.component_params(), per_group, domain.dim(), rng);
    const FeaturePosterior fp = feature_posterior(map, data, std::max(post.noise_var(), 1e-8));
    for (std::size_t m = 0; m < n_comp; ++m) {
        std::optional<double> floor;
        if (cfg.clamp && !data.empty()) {
            const auto& dims = post.partition().groups[m];
            const MatrixXd unit = shifted_halton(200 * dims.size(), dims.size(), rng);
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            VectorXd x = domain.center();
            for (Index i = 0; i < unit.rows(); ++i) {
                for (std::size_t j = 0; j < dims.size(); ++j) {
                    const Index c = static_cast<Index>(dims[j]);
                    x[c] = domain.lower[c] + (domain.upper[c] - domain.lower[c]) * unit(i, static_cast<Index>(j));
                }
                const double mu = post.component_mean(x, m);
                lo = std::min(lo, mu);
                hi = std::max(hi, mu);
            }
            floor = component_floor(m, lo, hi);
        }
        out.push_back(sample_max_features_component(fp, map, m, domain, rng, k, cfg.restarts, floor));
    }
    return out;
}

inline PointPrediction floored(PointPrediction p, double floor) {
    p.std = std::max(p.std, floor);
    return p;
}

}  // namespace detail

/// Argmax of the posterior mean (the inference-regret recommendation).
inline OptimizeResult maximize_posterior_mean(const GpPosterior& post, const Domain& domain, std::size_t budget, Rng& rng) {
    return optimize_acquisition([&](const VectorXd& x) { return post.mean(x); }, domain, budget, rng);
}

/// Additive posterior mean is separable, so it is maximized group by group.
inline VectorXd maximize_posterior_mean(const AddGpPosterior& post, const Domain& domain, std::size_t budget_per_dim,
                                        Rng& rng) {
    std::vector<ScoreFunction> alphas;
    for (std::size_t m = 0; m < post.components(); ++m)
        alphas.push_back([&post, m](const VectorXd& x) { return post.component_mean(x, m); });
    return optimize_acquisition_per_component(alphas, post.partition(), domain, budget_per_dim, rng);
}

/// Bayesian optimization with any acquisition in AcquisitionSpec. Additive kinds
/// follow the per-component select-and-concatenate loop; the rest use one full GP.
/// Deterministic given the objective, domain and config (including seed).
inline BoTrace run_bo(const ObjectiveFunction& objective, const Domain& domain, const BoConfig& config) {
    const std::size_t dim = domain.dim();
    config.validate(dim);
    const auto kind = config.acquisition.kind;
    const bool additive = is_additive(kind);
    const Rng root(config.seed);
    Rng noise_rng = root.child(2);

    BoTrace trace;
    trace.method = to_string(kind);
    ObservationSet data(dim);
    double best_f = -std::numeric_limits<double>::infinity();

    auto evaluate = [&](const VectorXd& x, Evaluation& ev) -> bool {
        ev.x = x;
        ev.f = objective(x);
        if (!std::isfinite(ev.f)) {
            trace.error = "objective returned a non-finite value";
            return false;
        }
        ev.y = ev.f + (config.noise_std > 0.0 ? config.noise_std * noise_rng.normal() : 0.0);
        return true;
    };

    {
        Rng init_rng = root.child(1);
        for (std::size_t i = 0; i < config.initial_design; ++i) {
            VectorXd x(static_cast<Index>(dim));
            for (Index j = 0; j < static_cast<Index>(dim); ++j) x[j] = init_rng.uniform(domain.lower[j], domain.upper[j]);
            Evaluation ev;
            if (!evaluate(x, ev)) return trace;
            data.add(ev.x, ev.y);
            best_f = std::max(best_f, ev.f);
            trace.initial.push_back(std::move(ev));
        }
    }

    KernelParams params = config.kernel;
    std::optional<Partition> partition = config.partition;
    if (additive && !partition) {
        Rng learn_rng = root.child(3);
        ObservationSet learn_data = data;
        if (config.learn->samples > 0) {
            learn_data = ObservationSet(dim);
            VectorXd x(static_cast<Index>(dim));
            for (std::size_t i = 0; i < config.learn->samples; ++i) {
                for (Index j = 0; j < x.size(); ++j) x[j] = learn_rng.uniform(domain.lower[j], domain.upper[j]);
                const double f = objective(x);
                if (!std::isfinite(f)) {
                    trace.error = "objective returned a non-finite value";
                    return trace;
                }
                learn_data.add(x, f + (config.noise_std > 0.0 ? config.noise_std * learn_rng.normal() : 0.0));
            }
        }
        try {
            partition = learn_decomposition(learn_data, params, config.learn->n_candidates, config.learn->max_group_size,
                                            learn_rng)
                            .partition;
        } catch (const std::exception& e) {
            trace.error = e.what();
            return trace;
        }
    }
    trace.partition = partition;

    const std::size_t budget_per_dim = config.probes_per_dim();
    const std::size_t full_budget = budget_per_dim * dim;
    const std::size_t k = config.acquisition.samples;

    try {
        for (std::size_t t = 1; t <= config.iterations; ++t) {
            Rng it_rng = root.child(1000 + t);
            IterationRecord rec;
            rec.t = t;
            rec.max_observed_before = data.empty() ? -std::numeric_limits<double>::infinity() : data.max_value();

            AdaptationResult adapt =
                additive ? detail::additive_adaptation_step(data, *partition, params, t, config.refit_every, config.refit_budget)
                         : model_adaptation_step(data, params, t, config.refit_every, config.refit_budget);
            params = adapt.params;
            rec.refit = adapt.refit;

            const auto start = std::chrono::steady_clock::now();
            VectorXd x_next;
            if (kind == AcquisitionKind::random) {
                x_next.resize(static_cast<Index>(dim));
                for (Index j = 0; j < static_cast<Index>(dim); ++j) x_next[j] = it_rng.uniform(domain.lower[j], domain.upper[j]);
            } else if (additive) {
                const AddGpPosterior post(data, *partition, component_params_for(*partition, params), params.noise_var);
                std::vector<ScoreFunction> alphas;
                std::vector<MaxValueSamples> samples;
                if (kind == AcquisitionKind::add_mes) {
                    samples = detail::sample_component_max_values(post, domain, config, k, config.acquisition.sampler, it_rng);
                    for (const auto& s : samples) rec.y_star.push_back(s.values);
                }
                for (std::size_t m = 0; m < post.components(); ++m) {
                    const double floor = 1e-9 * std::sqrt(post.component_params()[m].scale);
                    const std::size_t group_size = partition->groups[m].size();
                    if (kind == AcquisitionKind::add_mes) {
                        alphas.push_back([&post, &samples, m, floor](const VectorXd& x) {
                            return add_mes_alpha(detail::floored(post.predict_component(x, m), floor), samples[m], m);
                        });
                    } else {
                        const double tt = static_cast<double>(t);
                        alphas.push_back([&post, m, floor, group_size, tt](const VectorXd& x) {
                            return add_gp_ucb_alpha(detail::floored(post.predict_component(x, m), floor), group_size, tt);
                        });
                    }
                }
                std::vector<double> values;
                x_next = optimize_acquisition_per_component(alphas, *partition, domain, budget_per_dim, it_rng, &values);
                rec.acq_value = 0.0;
                for (double v : values) rec.acq_value += v;
            } else {
                const GpPosterior post(data, params);
                const double floor = 1e-9 * std::sqrt(params.scale);
                const double incumbent = data.empty() ? 0.0 : data.max_value();
                ScoreFunction alpha;
                MaxValueSamples samples;
                std::vector<GpPosterior> hyper_posts;
                std::vector<MaxValueSamples> hyper_samples;
                switch (kind) {
                    case AcquisitionKind::mes: {
                        samples = detail::sample_max_values(post, domain, config, k, config.acquisition.sampler, it_rng);
                        rec.y_star.push_back(samples.values);
                        alpha = [&](const VectorXd& x) { return mes_alpha(detail::floored(post.predict(x), floor), samples); };
                        break;
                    }
                    case AcquisitionKind::mes_marginal: {
                        for (const auto& eta : config.acquisition.hyper_set) {
                            hyper_posts.emplace_back(data, eta);
                            hyper_samples.push_back(detail::sample_max_values(hyper_posts.back(), domain, config, k,
                                                                              config.acquisition.sampler, it_rng));
                            rec.y_star.push_back(hyper_samples.back().values);
                        }
                        alpha = [&](const VectorXd& x) {
                            std::vector<PointPrediction> preds;
                            preds.reserve(hyper_posts.size());
                            for (const auto& hp : hyper_posts)
                                preds.push_back(detail::floored(hp.predict(x), 1e-9 * std::sqrt(hp.params().scale)));
                            return mes_alpha_marginal(preds, hyper_samples);
                        };
                        break;
                    }
                    case AcquisitionKind::est: {
                        std::optional<GumbelParams> gp;
                        detail::sample_max_values(post, domain, config, 1, SamplerKind::gumbel, it_rng, &gp);
                        double m = gumbel_mean(*gp);
                        rec.y_star.push_back({m});
                        alpha = [&post, floor, m](const VectorXd& x) { return est_alpha(detail::floored(post.predict(x), floor), m); };
                        break;
                    }
                    case AcquisitionKind::ucb: {
                        const double beta = config.acquisition.beta.value_or(srinivas_beta(full_budget, t));
                        alpha = [&post, floor, beta](const VectorXd& x) { return ucb_alpha(detail::floored(post.predict(x), floor), beta); };
                        break;
                    }
                    case AcquisitionKind::pi: {
                        const double theta = incumbent + config.acquisition.pi_margin.value_or(config.noise_std);
                        alpha = [&post, floor, theta](const VectorXd& x) { return pi_alpha(detail::floored(post.predict(x), floor), theta); };
                        break;
                    }
                    case AcquisitionKind::ei: {
                        alpha = [&post, floor, incumbent](const VectorXd& x) { return ei_alpha(detail::floored(post.predict(x), floor), incumbent); };
                        break;
                    }
                    default:
                        throw ArgumentError("run_bo: unsupported acquisition kind");
                }
                const auto res = optimize_acquisition(alpha, domain, full_budget, it_rng);
                x_next = res.x;
                rec.acq_value = res.value;
            }
            rec.acq_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

            Evaluation ev;
            if (!evaluate(domain.clamp(x_next), ev)) {
                trace.final_params = params;
                return trace;
            }
            data.add(ev.x, ev.y);
            best_f = std::max(best_f, ev.f);
            rec.x = ev.x;
            rec.y = ev.y;
            rec.f = ev.f;
            rec.best_f = best_f;

            if (config.track_recommendation && kind != AcquisitionKind::random) {
                Rng rec_rng = root.child(500000 + t);
                VectorXd x_rec;
                if (additive) {
                    const AddGpPosterior post(data, *partition, component_params_for(*partition, params), params.noise_var);
                    x_rec = maximize_posterior_mean(post, domain, budget_per_dim / 2, rec_rng);
                } else {
                    x_rec = maximize_posterior_mean(GpPosterior(data, params), domain, full_budget / 2, rec_rng).x;
                }
                const double f_rec = objective(x_rec);
                rec.recommendation = x_rec;
                if (std::isfinite(f_rec)) rec.recommendation_f = f_rec;
            }
            trace.records.push_back(std::move(rec));
        }
    } catch (const std::exception& e) {
        trace.error = e.what();
    }
    trace.final_params = params;
    return trace;
}

/// Full-model loop; `config.acquisition.kind` must not be additive.
inline BoTrace run_mes(const ObjectiveFunction& objective, const Domain& domain, BoConfig config) {
    if (is_additive(config.acquisition.kind)) throw ArgumentError("run_mes: additive acquisition kind");
    return run_bo(objective, domain, config);
}

/// Additive loop with a known partition or decomposition learning.
inline BoTrace run_add_mes(const ObjectiveFunction& objective, const Domain& domain,
                           std::variant<Partition, DecompositionLearning> structure, BoConfig config) {
    config.acquisition.kind = AcquisitionKind::add_mes;
    if (std::holds_alternative<Partition>(structure)) {
        config.partition = std::get<Partition>(structure);
        config.learn.reset();
    } else {
        config.partition.reset();
        config.learn = std::get<DecompositionLearning>(structure);
    }
    return run_bo(objective, domain, config);
}

}  // namespace mesbo
