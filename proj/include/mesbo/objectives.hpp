#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>

#include "features.hpp"
#include "gp.hpp"
#include "optimizer.hpp"
#include "random.hpp"

namespace mesbo {

/// A maximization benchmark. `known_max` carries where it came from and how many
/// probes backed it.
struct Objective {
    std::string name;
    Domain domain;
    std::function<double(const VectorXd&)> evaluate;
    std::optional<double> known_max;
    std::string known_max_source;
    std::size_t known_max_probes = 0;
    std::optional<Partition> true_partition;  // additive synthetics only

    std::size_t dim() const { return domain.dim(); }
    double operator()(const VectorXd& x) const { return evaluate(x); }
};

// Raw (minimization-form) test functions.

inline double eggholder(const VectorXd& x) {
    if (x.size() != 2) throw ArgumentError("eggholder: 2-d input required");
    const double a = x[0], b = x[1];
    return -(b + 47.0) * std::sin(std::sqrt(std::abs(b + a / 2.0 + 47.0))) -
           a * std::sin(std::sqrt(std::abs(a - (b + 47.0))));
}

namespace detail {
inline constexpr std::array<std::array<double, 4>, 10> kShekelC = {{{4, 4, 4, 4},
                                                                    {1, 1, 1, 1},
                                                                    {8, 8, 8, 8},
                                                                    {6, 6, 6, 6},
                                                                    {3, 7, 3, 7},
                                                                    {2, 9, 2, 9},
                                                                    {5, 5, 3, 3},
                                                                    {8, 1, 8, 1},
                                                                    {6, 2, 6, 2},
                                                                    {7, 3.6, 7, 3.6}}};
inline constexpr std::array<double, 10> kShekelBeta = {0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5};

// Centre of row i, tiled across d coordinates.
inline VectorXd shekel_center(std::size_t i, std::size_t d) {
    VectorXd c(static_cast<Index>(d));
    for (std::size_t j = 0; j < d; ++j) c[static_cast<Index>(j)] = kShekelC[i][j % 4];
    return c;
}
}  // namespace detail

/// Shekel with m = 10 terms; for d != 4 each row of the classical 4-d
/// coefficient table is repeated cyclically. Values are negative (minimization form).
inline double shekel(const VectorXd& x) {
    const std::size_t d = static_cast<std::size_t>(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        double q = detail::kShekelBeta[i];
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[static_cast<Index>(j)] - detail::kShekelC[i][j % 4];
            q += diff * diff;
        }
        s += 1.0 / q;
    }
    return -s;
}

/// Michalewicz with steepness 10 (minimization form).
inline double michalewicz(const VectorXd& x, double steepness = 10.0) {
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        s += std::sin(xi) * std::pow(std::sin(static_cast<double>(i + 1) * xi * xi / std::numbers::pi), 2.0 * steepness);
    }
    return -s;
}

/// Max over `n` random probes; used to certify stored maxima.
inline double random_probe_max(const Objective& obj, std::size_t n, Rng& rng, VectorXd* argmax = nullptr) {
    double best = -std::numeric_limits<double>::infinity();
    VectorXd x(static_cast<Index>(obj.dim()));
    for (std::size_t i = 0; i < n; ++i) {
        for (Index j = 0; j < x.size(); ++j) x[j] = rng.uniform(obj.domain.lower[j], obj.domain.upper[j]);
        const double v = obj(x);
        if (v > best) {
            best = v;
            if (argmax) *argmax = x;
        }
    }
    return best;
}

/// Raise `obj.known_max` to at least the best of `n` fresh random probes
/// (refined locally). Returns the probe max.
inline double certify_known_max(Objective& obj, std::size_t n, Rng& rng) {
    VectorXd arg;
    double probe = random_probe_max(obj, n, rng, &arg);
    if (!obj.known_max || probe > *obj.known_max) {
        Rng r2 = rng.child(7);
        const double w = 1e-3;
        Domain local(obj.domain.clamp((arg.array() - w * obj.domain.width().array()).matrix()),
                     obj.domain.clamp((arg.array() + w * obj.domain.width().array()).matrix()));
        const auto res = optimize_acquisition(obj.evaluate, local, 200 * obj.dim(), r2);
        obj.known_max = std::max(probe, res.value);
        obj.known_max_source += obj.known_max_source.empty() ? "probe" : "+probe";
    }
    obj.known_max_probes += n;
    return probe;
}

inline Objective eggholder_objective() {
    Objective o;
    o.name = "eggholder";
    o.domain = Domain::cube(2, -512.0, 512.0);
    o.evaluate = [](const VectorXd& x) { return -eggholder(x); };
    o.known_max = 959.640662720851;  // at (512, 404.2319), from a dense grid plus local refinement
    o.known_max_source = "grid4000^2+refine";
    o.known_max_probes = 16000000;
    return o;
}

/// Negated tiled Shekel on [0, 10]^d. The known maximum comes from refining each
/// coefficient-row centre.
inline Objective shekel_objective(std::size_t d = 10) {
    if (d == 0) throw ArgumentError("shekel_objective: d must be >= 1");
    Objective o;
    o.name = "shekel" + std::to_string(d);
    o.domain = Domain::cube(d, 0.0, 10.0);
    o.evaluate = [](const VectorXd& x) { return -shekel(x); };
    Rng rng(0x5e4e1);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 10; ++i) {
        const VectorXd c = detail::shekel_center(i, d);
        Domain local(o.domain.clamp((c.array() - 0.5).matrix()), o.domain.clamp((c.array() + 0.5).matrix()));
        best = std::max(best, optimize_acquisition(o.evaluate, local, 200 * d, rng).value);
    }
    o.known_max = best;
    o.known_max_source = "row-centre refine";
    o.known_max_probes = 10 * 200 * d;
    return o;
}

/// Negated Michalewicz on [0, pi]^d. Stored maxima: d = 2 (1.8013) and d = 10 (9.66015);
/// other dimensions are left for certification.
inline Objective michalewicz_objective(std::size_t d = 10) {
    if (d == 0) throw ArgumentError("michalewicz_objective: d must be >= 1");
    Objective o;
    o.name = "michalewicz" + std::to_string(d);
    o.domain = Domain::cube(d, 0.0, std::numbers::pi);
    o.evaluate = [](const VectorXd& x) { return -michalewicz(x); };
    if (d == 2) {
        o.known_max = 1.80130341009855;
        o.known_max_source = "grid+refine";
    } else if (d == 10) {
        o.known_max = 9.66015;
        o.known_max_source = "literature";
    }
    return o;
}

/// -(x - c)^2 summed; maximum 0 at c.
inline Objective quadratic_objective(const VectorXd& centre, const Domain& domain) {
    Objective o;
    o.name = "quadratic" + std::to_string(domain.dim());
    o.domain = domain;
    o.evaluate = [centre](const VectorXd& x) { return -(x - centre).squaredNorm(); };
    o.known_max = 0.0;
    o.known_max_source = "closed form";
    return o;
}

/// Returns NaN once `after` evaluations have happened.
inline Objective nonfinite_objective(std::size_t dim, std::size_t after) {
    Objective o;
    o.name = "nonfinite";
    o.domain = Domain::unit(dim);
    auto count = std::make_shared<std::size_t>(0);
    o.evaluate = [count, after](const VectorXd& x) {
        return ++*count > after ? std::numeric_limits<double>::quiet_NaN() : -x.squaredNorm();
    };
    o.known_max = 0.0;
    o.known_max_source = "closed form";
    return o;
}

namespace detail {

// w^T phi(x) with a shared, immutable map.
struct FeatureFunction {
    std::shared_ptr<const FeatureMap> map;
    VectorXd weights;
    double operator()(const VectorXd& x) const { return map->value(weights, x); }
};

inline double feature_function_max(const FeatureFunction& f, const Domain& domain, std::size_t probes, Rng& rng) {
    FeatureMaximizerOptions opt;
    opt.probes = probes;
    opt.restarts = 20;
    opt.steps = 400;
    return maximize_feature_function(f.weights, *f.map, domain, rng, opt).value;
}

}  // namespace detail

/// A prior GP draw on [0, 1]^d: f(x) = w^T phi(x) with w ~ N(0, I) and D random
/// Fourier features. The stored maximum is found by dense probing plus gradient
/// refinement (65536 probes in 2-d, 2000 d otherwise).
inline Objective sample_synthetic_gp_objective(const KernelParams& params, std::size_t d, std::size_t num_features,
                                               std::uint64_t seed) {
    if (num_features < 1000) throw ArgumentError("sample_synthetic_gp_objective: D must be >= 1000");
    if (params.dim() != d) throw ArgumentError("sample_synthetic_gp_objective: kernel dimension mismatch");
    Rng rng(seed);
    auto map = std::make_shared<const FeatureMap>(build_feature_map(params, num_features, rng));
    detail::FeatureFunction f{map, rng.normal_vector(static_cast<Index>(num_features))};
    Objective o;
    o.name = "gp" + std::to_string(d) + "d_" + std::to_string(seed);
    o.domain = Domain::unit(d);
    o.evaluate = f;
    const std::size_t probes = d == 2 ? 65536 : 2000 * d;
    o.known_max = detail::feature_function_max(f, o.domain, probes, rng);
    o.known_max_source = "probe+gradient refine";
    o.known_max_probes = probes;
    return o;
}

/// Sum of independent 2-d GP draws over a random pairing of the d coordinates
/// (d even). Each component uses bandwidth `bandwidth` and scale `scale`; the
/// stored maximum is the sum of the component maxima.
inline Objective sample_synthetic_additive_objective(std::size_t d, double scale, double bandwidth,
                                                     std::size_t features_per_group, std::uint64_t seed) {
    if (d == 0 || d % 2 != 0) throw ArgumentError("sample_synthetic_additive_objective: d must be even");
    if (features_per_group < 1000) throw ArgumentError("sample_synthetic_additive_objective: D must be >= 1000");
    Rng rng(seed);
    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    Partition p;
    for (std::size_t i = 0; i < d; i += 2) p.groups.push_back({perm[i], perm[i + 1]});
    p = p.canonical();

    const KernelParams base(scale, VectorXd::Constant(static_cast<Index>(d), bandwidth), 0.0);
    std::vector<KernelParams> comps;
    for (const auto& g : p.groups) comps.push_back(base.restricted(g));
    auto map = std::make_shared<const FeatureMap>(build_additive_feature_map(p, comps, features_per_group, d, rng));
    const VectorXd w = rng.normal_vector(static_cast<Index>(map->size()));

    const Domain dom = Domain::unit(d);
    double total = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m) {
        const auto idx = map->group_indices(m);
        VectorXd wm(static_cast<Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) wm[static_cast<Index>(j)] = w[idx[j]];
        FeatureMaximizerOptions opt;
        opt.probes = 16384;
        opt.restarts = 20;
        opt.steps = 400;
        total += maximize_feature_function(wm, map->select_group(m), dom, rng, opt).value;
    }
    Objective o;
    o.name = "add" + std::to_string(d) + "d_" + std::to_string(seed);
    o.domain = dom;
    o.evaluate = detail::FeatureFunction{map, w};
    o.known_max = total;
    o.known_max_source = "per-group probe+gradient refine";
    o.known_max_probes = 16384 * p.size();
    o.true_partition = p;
    return o;
}

}  // namespace mesbo
