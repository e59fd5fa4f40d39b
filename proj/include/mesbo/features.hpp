#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "gp.hpp"
#include "gumbel.hpp"
#include "random.hpp"

namespace mesbo {

/// Random Fourier features phi_i(x) = amp_i cos(omega_i^T x + c_i).
/// With amp_i = sqrt(2 scale / D), phi(x)^T phi(x') approximates the SE kernel.
/// Omega rows are zero outside the active dimensions of a restricted map.
struct FeatureMap {
    MatrixXd omegas;                  ///< D x d
    VectorXd phases;                  ///< D offsets in [0, 2 pi)
    VectorXd amplitudes;              ///< D per-feature amplitudes
    std::vector<std::size_t> groups;  ///< additive group of each feature (all 0 for a full map)

    std::size_t size() const noexcept { return static_cast<std::size_t>(phases.size()); }
    std::size_t input_dim() const noexcept { return static_cast<std::size_t>(omegas.cols()); }

    VectorXd evaluate(const VectorXd& x) const {
        return (amplitudes.array() * ((omegas * x).array() + phases.array()).cos()).matrix();
    }

    /// Feature matrix with one column per row of `points` (D x n).
    MatrixXd evaluate_rows(const MatrixXd& points) const {
        MatrixXd arg = omegas * points.transpose();
        arg.colwise() += phases;
        return (arg.array().cos().colwise() * amplitudes.array()).matrix();
    }

    double value(const VectorXd& weights, const VectorXd& x) const {
        return ((omegas * x).array() + phases.array()).cos().matrix().dot(
            (weights.array() * amplitudes.array()).matrix());
    }

    /// f(x) = sum_i w_i phi_i(x) and its gradient.
    double value_and_gradient(const VectorXd& weights, const VectorXd& x, VectorXd& grad) const {
        const Eigen::ArrayXd arg = (omegas * x).array() + phases.array();
        const Eigen::ArrayXd wa = weights.array() * amplitudes.array();
        grad = -(omegas.transpose() * (wa * arg.sin()).matrix());
        return (wa * arg.cos()).sum();
    }

    /// Sub-map holding only features of group m.
    FeatureMap select_group(std::size_t m) const {
        std::vector<Index> idx;
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i] == m) idx.push_back(static_cast<Index>(i));
        FeatureMap out;
        out.omegas.resize(static_cast<Index>(idx.size()), omegas.cols());
        out.phases.resize(static_cast<Index>(idx.size()));
        out.amplitudes.resize(static_cast<Index>(idx.size()));
        out.groups.assign(idx.size(), m);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out.omegas.row(static_cast<Index>(k)) = omegas.row(idx[k]);
            out.phases[static_cast<Index>(k)] = phases[idx[k]];
            out.amplitudes[static_cast<Index>(k)] = amplitudes[idx[k]];
        }
        return out;
    }

    std::vector<Index> group_indices(std::size_t m) const {
        std::vector<Index> idx;
        for (std::size_t i = 0; i < groups.size(); ++i)
            if (groups[i] == m) idx.push_back(static_cast<Index>(i));
        return idx;
    }
};

/// Features for an SE kernel active on `dims` of a `input_dim`-dimensional input.
/// `params` carries one bandwidth per entry of `dims`. The SE spectral density is
/// Gaussian with per-dimension std 1 / l_i.
inline FeatureMap build_feature_map(const KernelParams& params, std::size_t num_features, Rng& rng,
                                    const std::vector<std::size_t>& dims, std::size_t input_dim) {
    if (num_features == 0) throw ArgumentError("build_feature_map: D must be >= 1");
    if (dims.size() != params.dim()) throw ArgumentError("build_feature_map: one bandwidth per active dim required");
    for (std::size_t j : dims)
        if (j >= input_dim) throw ArgumentError("build_feature_map: active dimension out of range");
    const Index d = static_cast<Index>(num_features);
    FeatureMap map;
    map.omegas = MatrixXd::Zero(d, static_cast<Index>(input_dim));
    map.phases.resize(d);
    map.amplitudes = VectorXd::Constant(d, std::sqrt(2.0 * params.scale / static_cast<double>(num_features)));
    map.groups.assign(num_features, 0);
    for (Index i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < dims.size(); ++k)
            map.omegas(i, static_cast<Index>(dims[k])) = rng.normal() / params.bandwidths[static_cast<Index>(k)];
        map.phases[i] = 2.0 * std::numbers::pi * rng.uniform();
    }
    return map;
}

inline FeatureMap build_feature_map(const KernelParams& params, std::size_t num_features, Rng& rng) {
    std::vector<std::size_t> all(params.dim());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return build_feature_map(params, num_features, rng, all, params.dim());
}

/// One restricted map per group, stacked; feature i keeps its group tag.
inline FeatureMap build_additive_feature_map(const Partition& partition, const std::vector<KernelParams>& component_params,
                                             std::size_t features_per_group, std::size_t input_dim, Rng& rng) {
    std::vector<FeatureMap> parts;
    Index total = 0;
    for (std::size_t m = 0; m < partition.size(); ++m) {
        parts.push_back(build_feature_map(component_params[m], features_per_group, rng, partition.groups[m], input_dim));
        total += static_cast<Index>(parts.back().size());
    }
    FeatureMap out;
    out.omegas.resize(total, static_cast<Index>(input_dim));
    out.phases.resize(total);
    out.amplitudes.resize(total);
    Index row = 0;
    for (std::size_t m = 0; m < parts.size(); ++m) {
        const Index n = static_cast<Index>(parts[m].size());
        out.omegas.middleRows(row, n) = parts[m].omegas;
        out.phases.segment(row, n) = parts[m].phases;
        out.amplitudes.segment(row, n) = parts[m].amplitudes;
        out.groups.insert(out.groups.end(), parts[m].size(), m);
        row += n;
    }
    return out;
}

/// Gaussian weight posterior N(nu, Sigma) of the Bayesian linear model on features.
struct FeaturePosterior {
    VectorXd nu;
    MatrixXd sigma;
    MatrixXd sigma_sqrt;  ///< any S with S S^T = Sigma

    std::size_t size() const noexcept { return static_cast<std::size_t>(nu.size()); }

    /// Build from explicit moments; Sigma need only be positive semi-definite.
    static FeaturePosterior from_moments(VectorXd nu, MatrixXd sigma) {
        if (sigma.rows() != nu.size() || sigma.cols() != nu.size())
            throw ArgumentError("FeaturePosterior: sigma must be D x D");
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma);
        if (eig.info() != Eigen::Success) throw NumericalError("FeaturePosterior: eigendecomposition failed");
        const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        FeaturePosterior fp;
        fp.sigma_sqrt = eig.eigenvectors() * root.asDiagonal();
        fp.nu = std::move(nu);
        fp.sigma = std::move(sigma);
        return fp;
    }
};

/// Sigma = (Z Z^T / s^2 + I)^-1 and nu = Sigma Z y / s^2 with Z = [phi(x_1) .. phi(x_t)].
inline FeaturePosterior feature_posterior(const FeatureMap& map, const ObservationSet& data, double noise_var) {
    if (!(noise_var > 0.0)) throw ArgumentError("feature_posterior: noise_var must be > 0");
    const Index d = static_cast<Index>(map.size());
    FeaturePosterior fp;
    if (data.empty()) {
        fp.nu = VectorXd::Zero(d);
        fp.sigma = MatrixXd::Identity(d, d);
        fp.sigma_sqrt = MatrixXd::Identity(d, d);
        return fp;
    }
    if (data.dim() != map.input_dim()) throw ArgumentError("feature_posterior: data dimension mismatch");
    const MatrixXd z = map.evaluate_rows(data.points);
    MatrixXd a = MatrixXd::Identity(d, d);
    a.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0 / noise_var);
    Eigen::LLT<MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
        MatrixXd full = a.selfadjointView<Eigen::Lower>();  // rankUpdate filled only the lower half
        const Index pivot = detail::failing_pivot(full);
        throw NumericalError("feature_posterior: factorization failed at pivot " + std::to_string(pivot), pivot);
    }
    // Sigma = L^-T L^-1, so S = L^-T is a square root.
    MatrixXd l_inv = MatrixXd::Identity(d, d);
    llt.matrixL().solveInPlace(l_inv);
    fp.sigma_sqrt = l_inv.transpose();
    fp.sigma = fp.sigma_sqrt * l_inv;
    fp.sigma = 0.5 * (fp.sigma + fp.sigma.transpose()).eval();
    fp.nu = llt.solve(z * data.values) / noise_var;
    return fp;
}

/// a ~ N(nu, Sigma) drawn as nu + S eps.
inline VectorXd sample_posterior_function(const FeaturePosterior& fp, Rng& rng) {
    return fp.nu + fp.sigma_sqrt * rng.normal_vector(fp.nu.size());
}

struct FeatureMaximizerOptions {
    std::size_t restarts = 10;
    std::size_t steps = 200;
    std::size_t probes = 0;  ///< starting-point probes; 0 means max(500, 100 d)
};

struct FeatureMaximum {
    VectorXd x;
    double value = 0.0;
};

/// Maximize f(x) = w^T phi(x) over the box: the best `restarts` probes seed
/// projected gradient ascent with step expansion and backtracking halving.
/// Only coordinates where the map has non-zero frequencies are moved.
inline FeatureMaximum maximize_feature_function(const VectorXd& weights, const FeatureMap& map, const Domain& domain,
                                                Rng& rng, const FeatureMaximizerOptions& opt = {}) {
    const std::size_t dim = domain.dim();
    if (map.input_dim() != dim) throw ArgumentError("maximize_feature_function: dimension mismatch");
    std::vector<Index> active;
    for (Index j = 0; j < static_cast<Index>(dim); ++j)
        if (map.omegas.col(j).cwiseAbs().maxCoeff() > 0.0) active.push_back(j);

    const VectorXd width = domain.width();
    const std::size_t n_probe = opt.probes ? opt.probes : std::max<std::size_t>(500, 100 * std::max<std::size_t>(1, active.size()));
    MatrixXd probes = domain.center().transpose().replicate(static_cast<Index>(n_probe), 1);
    if (!active.empty()) {
        const MatrixXd unit = shifted_halton(n_probe, active.size(), rng);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const Index j = active[k];
            probes.col(j) = (domain.lower[j] + width[j] * unit.col(static_cast<Index>(k)).array()).matrix();
        }
    }
    MatrixXd arg = map.omegas * probes.transpose();
    arg.colwise() += map.phases;
    const VectorXd wa = (weights.array() * map.amplitudes.array()).matrix();
    const VectorXd probe_vals = arg.array().cos().matrix().transpose() * wa;

    std::vector<Index> order(static_cast<std::size_t>(probe_vals.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Index>(i);
    const std::size_t n_start = std::min(std::max<std::size_t>(1, opt.restarts), order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_start), order.end(),
                      [&](Index a, Index b) { return probe_vals[a] > probe_vals[b]; });

    FeatureMaximum best;
    best.x = probes.row(order[0]).transpose();
    best.value = probe_vals[order[0]];
    if (active.empty()) return best;

    VectorXd grad(static_cast<Index>(dim));
    for (std::size_t s = 0; s < n_start; ++s) {
        VectorXd x = probes.row(order[s]).transpose();
        double fx = map.value_and_gradient(weights, x, grad);
        double h = 0.05;  // step length in unit-box coordinates
        for (std::size_t step = 0; step < opt.steps && h > 1e-12; ++step) {
            double gnorm = 0.0;
            for (Index j : active) gnorm += (grad[j] * width[j]) * (grad[j] * width[j]);
            gnorm = std::sqrt(gnorm);
            if (gnorm == 0.0) break;
            VectorXd cand = x;
            for (Index j : active) cand[j] = std::clamp(x[j] + h * width[j] * (grad[j] * width[j]) / gnorm,
                                                        domain.lower[j], domain.upper[j]);
            VectorXd cgrad(static_cast<Index>(dim));
            const double fc = map.value_and_gradient(weights, cand, cgrad);
            if (fc > fx) {
                x = std::move(cand);
                fx = fc;
                grad = std::move(cgrad);
                h *= 1.5;
            } else {
                h *= 0.5;
            }
        }
        if (fx > best.value) {
            best.value = fx;
            best.x = x;
        }
    }
    return best;
}

/// K posterior function draws, each maximized over the domain. When `floor` is set,
/// each sample is raised to at least that value.
inline MaxValueSamples sample_max_features(const FeaturePosterior& fp, const FeatureMap& map, const Domain& domain,
                                           Rng& rng, std::size_t k, std::size_t restarts,
                                           std::optional<double> floor = std::nullopt) {
    if (k == 0) throw ArgumentError("sample_max_features: K must be >= 1");
    if (restarts == 0) throw ArgumentError("sample_max_features: restarts must be >= 1");
    if (fp.size() != map.size()) throw ArgumentError("sample_max_features: posterior/map size mismatch");
    MaxValueSamples out;
    out.source = SamplerKind::feature;
    FeatureMaximizerOptions opt;
    opt.restarts = restarts;
    for (std::size_t i = 0; i < k; ++i) {
        const VectorXd w = sample_posterior_function(fp, rng);
        double v = maximize_feature_function(w, map, domain, rng, opt).value;
        if (floor) v = std::max(v, *floor);
        out.values.push_back(v);
    }
    return out;
}

/// Component-m samples: weights restricted to the features of group m.
inline MaxValueSamples sample_max_features_component(const FeaturePosterior& fp, const FeatureMap& map, std::size_t m,
                                                     const Domain& domain, Rng& rng, std::size_t k,
                                                     std::size_t restarts, std::optional<double> floor = std::nullopt) {
    if (k == 0) throw ArgumentError("sample_max_features_component: K must be >= 1");
    const auto idx = map.group_indices(m);
    if (idx.empty()) throw ArgumentError("sample_max_features_component: no features for group " + std::to_string(m));
    const FeatureMap sub = map.select_group(m);
    MaxValueSamples out;
    out.source = SamplerKind::feature;
    out.component = m;
    FeatureMaximizerOptions opt;
    opt.restarts = restarts;
    for (std::size_t i = 0; i < k; ++i) {
        const VectorXd w = sample_posterior_function(fp, rng);
        VectorXd wm(static_cast<Index>(idx.size()));
        for (std::size_t j = 0; j < idx.size(); ++j) wm[static_cast<Index>(j)] = w[idx[j]];
        double v = maximize_feature_function(wm, sub, domain, rng, opt).value;
        if (floor) v = std::max(v, *floor);
        out.values.push_back(v);
    }
    return out;
}

}  // namespace mesbo
