#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "errors.hpp"

namespace mesbo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Squared-exponential ARD kernel hyperparameters plus observation noise.
struct KernelParams {
    double scale = 1.0;        ///< amplitude sigma_f^2
    VectorXd bandwidths;       ///< length-scales, one per input dimension
    double noise_var = 0.0;    ///< observation noise sigma^2

    KernelParams() = default;
    KernelParams(double scale_, VectorXd bandwidths_, double noise_var_)
        : scale(scale_), bandwidths(std::move(bandwidths_)), noise_var(noise_var_) {}

    /// Isotropic convenience constructor.
    static KernelParams isotropic(std::size_t dim, double scale, double bandwidth, double noise_var) {
        return {scale, VectorXd::Constant(static_cast<Index>(dim), bandwidth), noise_var};
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(bandwidths.size()); }

    void validate() const {
        if (!(scale > 0.0) || !std::isfinite(scale)) throw ArgumentError("KernelParams.scale must be > 0");
        if (bandwidths.size() == 0) throw ArgumentError("KernelParams.bandwidths must be non-empty");
        for (Index i = 0; i < bandwidths.size(); ++i) {
            if (!(bandwidths[i] > 0.0) || !std::isfinite(bandwidths[i]))
                throw ArgumentError("KernelParams.bandwidths[" + std::to_string(i) + "] must be > 0");
        }
        if (!(noise_var >= 0.0) || !std::isfinite(noise_var))
            throw ArgumentError("KernelParams.noise_var must be >= 0");
    }

    /// Parameters restricted to a subset of dimensions.
    KernelParams restricted(const std::vector<std::size_t>& dims) const {
        VectorXd bw(static_cast<Index>(dims.size()));
        for (std::size_t i = 0; i < dims.size(); ++i) bw[static_cast<Index>(i)] = bandwidths[static_cast<Index>(dims[i])];
        return {scale, bw, noise_var};
    }

    friend bool operator==(const KernelParams& a, const KernelParams& b) {
        return a.scale == b.scale && a.noise_var == b.noise_var && a.bandwidths.size() == b.bandwidths.size() &&
               a.bandwidths == b.bandwidths;
    }
};

/// Axis-aligned search box.
struct Domain {
    VectorXd lower;
    VectorXd upper;

    Domain() = default;
    Domain(VectorXd lo, VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) { validate(); }

    static Domain unit(std::size_t dim) {
        return {VectorXd::Zero(static_cast<Index>(dim)), VectorXd::Ones(static_cast<Index>(dim))};
    }
    static Domain cube(std::size_t dim, double lo, double hi) {
        return {VectorXd::Constant(static_cast<Index>(dim), lo), VectorXd::Constant(static_cast<Index>(dim), hi)};
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(lower.size()); }
    VectorXd width() const { return upper - lower; }
    VectorXd center() const { return 0.5 * (lower + upper); }

    void validate() const {
        if (lower.size() == 0 || lower.size() != upper.size())
            throw ArgumentError("Domain: lower/upper must be non-empty and of equal length");
        for (Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i]))
                throw ArgumentError("Domain: lower[" + std::to_string(i) + "] must be < upper[" + std::to_string(i) + "]");
        }
    }

    bool contains(const VectorXd& x) const {
        if (x.size() != lower.size()) return false;
        for (Index i = 0; i < x.size(); ++i) {
            if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
        }
        return true;
    }

    VectorXd clamp(VectorXd x) const {
        for (Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
        return x;
    }

    /// Map points in [0,1)^d (rows) into the box.
    MatrixXd from_unit(const MatrixXd& unit_pts) const {
        MatrixXd out = unit_pts;
        for (Index j = 0; j < out.cols(); ++j)
            out.col(j) = (lower[j] + (upper[j] - lower[j]) * unit_pts.col(j).array()).matrix();
        return out;
    }
};

/// Observations D_t: one input per row of `points`.
struct ObservationSet {
    MatrixXd points;
    VectorXd values;

    ObservationSet() = default;
    explicit ObservationSet(std::size_t dim) : points(0, static_cast<Index>(dim)) {}
    ObservationSet(MatrixXd pts, VectorXd vals) : points(std::move(pts)), values(std::move(vals)) {
        if (points.rows() != values.size())
            throw ArgumentError("ObservationSet: row count of points must equal length of values");
    }

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(points.cols()); }
    bool empty() const noexcept { return values.size() == 0; }

    void add(const VectorXd& x, double y) {
        if (points.cols() == 0 && points.rows() == 0) points.resize(0, x.size());
        if (x.size() != points.cols()) throw ArgumentError("ObservationSet::add: dimension mismatch");
        points.conservativeResize(points.rows() + 1, Eigen::NoChange);
        points.row(points.rows() - 1) = x.transpose();
        values.conservativeResize(values.size() + 1);
        values[values.size() - 1] = y;
    }

    double max_value() const { return values.maxCoeff(); }
};

/// Disjoint groups of input dimensions A_1..A_M covering {0..d-1}.
struct Partition {
    std::vector<std::vector<std::size_t>> groups;

    static Partition single(std::size_t dim) {
        std::vector<std::size_t> all(dim);
        for (std::size_t i = 0; i < dim; ++i) all[i] = i;
        return Partition{{all}};
    }

    std::size_t size() const noexcept { return groups.size(); }

    void validate(std::size_t dim) const {
        if (groups.empty()) throw ArgumentError("Partition: at least one group required");
        std::vector<int> seen(dim, 0);
        for (std::size_t m = 0; m < groups.size(); ++m) {
            if (groups[m].empty()) throw ArgumentError("Partition: group " + std::to_string(m) + " is empty");
            for (std::size_t i : groups[m]) {
                if (i >= dim) throw ArgumentError("Partition: dimension index " + std::to_string(i) + " out of range");
                if (seen[i]++) throw ArgumentError("Partition: dimension " + std::to_string(i) + " appears twice");
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            if (!seen[i]) throw ArgumentError("Partition: dimension " + std::to_string(i) + " not covered");
        }
    }

    /// Canonical form: each group sorted, groups ordered by first index.
    Partition canonical() const {
        Partition p = *this;
        for (auto& g : p.groups) std::sort(g.begin(), g.end());
        std::sort(p.groups.begin(), p.groups.end());
        return p;
    }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.canonical().groups == b.canonical().groups;
    }
};

/// Posterior mean and standard deviation at one input.
struct PointPrediction {
    double mean = 0.0;
    double std = 0.0;
};

/// SE kernel: scale * exp(-1/2 sum_i ((x_i - x2_i) / l_i)^2).
inline double se_kernel(const VectorXd& x, const VectorXd& x2, const KernelParams& params) {
    if (x.size() != x2.size() || x.size() != params.bandwidths.size())
        throw ArgumentError("se_kernel: dimension mismatch");
    double r2 = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double u = (x[i] - x2[i]) / params.bandwidths[i];
        r2 += u * u;
    }
    return params.scale * std::exp(-0.5 * r2);
}

namespace detail {

// SE kernel on the coordinates `dims` of full-length inputs; component params
// carry one bandwidth per entry of `dims`.
inline double se_kernel_on(const double* x, const double* x2, Index stride_x, Index stride_x2,
                           const std::vector<std::size_t>& dims, const KernelParams& params) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const Index i = static_cast<Index>(dims[k]);
        const double u = (x[i * stride_x] - x2[i * stride_x2]) / params.bandwidths[static_cast<Index>(k)];
        r2 += u * u;
    }
    return params.scale * std::exp(-0.5 * r2);
}

inline double se_kernel_raw(const double* x, const double* x2, const KernelParams& params) {
    double r2 = 0.0;
    const Index d = params.bandwidths.size();
    const double* bw = params.bandwidths.data();
    for (Index i = 0; i < d; ++i) {
        const double u = (x[i] - x2[i]) / bw[i];
        r2 += u * u;
    }
    return params.scale * std::exp(-0.5 * r2);
}

// Naive Cholesky used only to locate the failing pivot for diagnostics.
inline Index failing_pivot(const MatrixXd& a) {
    const Index n = a.rows();
    MatrixXd l = MatrixXd::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0) || !std::isfinite(d)) return j;
        l(j, j) = std::sqrt(d);
        for (Index i = j + 1; i < n; ++i) l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    return -1;
}

/// Cholesky of `a + jitter*I`, retrying once with the larger jitter. Returns (L, jitter used).
inline std::pair<MatrixXd, double> jittered_cholesky(const MatrixXd& a, double jitter_scale) {
    const double jitters[2] = {1e-10 * jitter_scale, 1e-6 * jitter_scale};
    for (double jitter : jitters) {
        MatrixXd m = a;
        m.diagonal().array() += jitter;
        Eigen::LLT<MatrixXd> llt(m);
        if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite()) {
            return {MatrixXd(llt.matrixL()), jitter};
        }
    }
    MatrixXd m = a;
    m.diagonal().array() += jitters[1];
    const Index pivot = failing_pivot(m);
    throw NumericalError("Cholesky factorization failed at pivot " + std::to_string(pivot), pivot);
}

inline double log_det_from_cholesky(const MatrixXd& l) {
    return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace detail

/// Factorized posterior of a zero-mean GP with an SE ARD kernel.
/// Immutable after construction; predictions are pure reads.
class GpPosterior {
public:
    GpPosterior(ObservationSet data, KernelParams params) : params_(std::move(params)), data_(std::move(data)) {
        params_.validate();
        if (!data_.empty() && data_.dim() != params_.dim())
            throw ArgumentError("fit_posterior: data dimension does not match bandwidths");
        const Index t = data_.values.size();
        if (t == 0) return;
        points_t_ = data_.points.transpose();
        MatrixXd k(t, t);
        for (Index i = 0; i < t; ++i) {
            for (Index j = 0; j <= i; ++j) {
                k(i, j) = k(j, i) = detail::se_kernel_raw(points_t_.col(i).data(), points_t_.col(j).data(), params_);
            }
        }
        k.diagonal().array() += params_.noise_var;
        std::tie(chol_, jitter_) = detail::jittered_cholesky(k, params_.scale);
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.values);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    }

    const KernelParams& params() const noexcept { return params_; }
    const ObservationSet& data() const noexcept { return data_; }
    const MatrixXd& chol() const noexcept { return chol_; }
    const VectorXd& alpha() const noexcept { return alpha_; }
    std::size_t dim() const noexcept { return params_.dim(); }

    VectorXd cross_covariance(const VectorXd& x) const {
        const Index t = data_.values.size();
        VectorXd kx(t);
        for (Index i = 0; i < t; ++i) kx[i] = detail::se_kernel_raw(points_t_.col(i).data(), x.data(), params_);
        return kx;
    }

    double mean(const VectorXd& x) const {
        if (x.size() != static_cast<Index>(dim())) throw ArgumentError("predict: dimension mismatch");
        if (data_.empty()) return 0.0;
        return cross_covariance(x).dot(alpha_);
    }

    PointPrediction predict(const VectorXd& x) const {
        if (x.size() != static_cast<Index>(dim())) throw ArgumentError("predict: dimension mismatch");
        if (data_.empty()) return {0.0, std::sqrt(params_.scale)};
        const VectorXd kx = cross_covariance(x);
        const VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
        const double var = std::max(0.0, params_.scale - v.squaredNorm());
        return {kx.dot(alpha_), std::sqrt(var)};
    }

    /// -1/2 y^T (K + s^2 I)^-1 y - 1/2 log det(K + s^2 I) - t/2 log 2 pi.
    double log_marginal_likelihood() const {
        if (data_.empty()) throw ArgumentError("log_marginal_likelihood: requires t >= 1");
        const double t = static_cast<double>(data_.size());
        return -0.5 * data_.values.dot(alpha_) - 0.5 * detail::log_det_from_cholesky(chol_) -
               0.5 * t * std::log(2.0 * std::numbers::pi);
    }

private:
    KernelParams params_;
    ObservationSet data_;
    MatrixXd points_t_;
    MatrixXd chol_;
    VectorXd alpha_;
    double jitter_ = 0.0;
};

inline GpPosterior fit_posterior(ObservationSet data, KernelParams params) {
    return GpPosterior(std::move(data), std::move(params));
}

inline PointPrediction predict(const GpPosterior& post, const VectorXd& x) { return post.predict(x); }

inline double log_marginal_likelihood(const ObservationSet& data, const KernelParams& params) {
    if (data.empty()) throw ArgumentError("log_marginal_likelihood: requires t >= 1");
    return GpPosterior(data, params).log_marginal_likelihood();
}

/// Posterior of an additive GP f = sum_m f^(m)(x^{A_m}) sharing one factorization
/// of the summed kernel matrix.
class AddGpPosterior {
public:
    AddGpPosterior(ObservationSet data, Partition partition, std::vector<KernelParams> component_params,
                   double noise_var)
        : partition_(std::move(partition)),
          params_(std::move(component_params)),
          noise_var_(noise_var),
          data_(std::move(data)) {
        if (params_.size() != partition_.size())
            throw ArgumentError("AddGpPosterior: one KernelParams per group required");
        if (!(noise_var_ >= 0.0)) throw ArgumentError("AddGpPosterior: noise_var must be >= 0");
        std::size_t dim = 0;
        for (std::size_t m = 0; m < partition_.size(); ++m) {
            params_[m].validate();
            if (params_[m].dim() != partition_.groups[m].size())
                throw ArgumentError("AddGpPosterior: group " + std::to_string(m) + " bandwidth count mismatch");
            dim += partition_.groups[m].size();
            total_scale_ += params_[m].scale;
        }
        partition_.validate(dim);
        dim_ = dim;
        if (!data_.empty() && data_.dim() != dim_) throw ArgumentError("AddGpPosterior: data dimension mismatch");
        const Index t = data_.values.size();
        if (t == 0) return;
        MatrixXd k = MatrixXd::Zero(t, t);
        const MatrixXd pts_t = data_.points.transpose();  // column-major rows -> contiguous points
        for (std::size_t m = 0; m < partition_.size(); ++m) {
            for (Index i = 0; i < t; ++i) {
                for (Index j = 0; j <= i; ++j) {
                    const double v = detail::se_kernel_on(pts_t.col(i).data(), pts_t.col(j).data(), 1, 1,
                                                          partition_.groups[m], params_[m]);
                    k(i, j) += v;
                    if (i != j) k(j, i) += v;
                }
            }
        }
        k.diagonal().array() += noise_var_;
        std::tie(chol_, jitter_) = detail::jittered_cholesky(k, total_scale_);
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(data_.values);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
        points_t_ = pts_t;
    }

    const Partition& partition() const noexcept { return partition_; }
    const std::vector<KernelParams>& component_params() const noexcept { return params_; }
    double noise_var() const noexcept { return noise_var_; }
    const ObservationSet& data() const noexcept { return data_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t components() const noexcept { return partition_.size(); }

    VectorXd component_cross_covariance(const VectorXd& x, std::size_t m) const {
        const Index t = data_.values.size();
        VectorXd kx(t);
        for (Index i = 0; i < t; ++i)
            kx[i] = detail::se_kernel_on(points_t_.col(i).data(), x.data(), 1, 1, partition_.groups[m], params_[m]);
        return kx;
    }

    PointPrediction predict_component(const VectorXd& x, std::size_t m) const {
        if (m >= partition_.size()) throw ArgumentError("predict_component: invalid group index " + std::to_string(m));
        if (x.size() != static_cast<Index>(dim_)) throw ArgumentError("predict_component: dimension mismatch");
        if (data_.empty()) return {0.0, std::sqrt(params_[m].scale)};
        const VectorXd kx = component_cross_covariance(x, m);
        const VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
        const double var = std::max(0.0, params_[m].scale - v.squaredNorm());
        return {kx.dot(alpha_), std::sqrt(var)};
    }

    double component_mean(const VectorXd& x, std::size_t m) const {
        if (data_.empty()) return 0.0;
        return component_cross_covariance(x, m).dot(alpha_);
    }

    /// Full-model prediction under the summed kernel.
    PointPrediction predict(const VectorXd& x) const {
        if (x.size() != static_cast<Index>(dim_)) throw ArgumentError("predict: dimension mismatch");
        if (data_.empty()) return {0.0, std::sqrt(total_scale_)};
        VectorXd kx = VectorXd::Zero(data_.values.size());
        for (std::size_t m = 0; m < partition_.size(); ++m) kx += component_cross_covariance(x, m);
        const VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
        const double var = std::max(0.0, total_scale_ - v.squaredNorm());
        return {kx.dot(alpha_), std::sqrt(var)};
    }

    double log_marginal_likelihood() const {
        if (data_.empty()) throw ArgumentError("log_marginal_likelihood: requires t >= 1");
        const double t = static_cast<double>(data_.size());
        return -0.5 * data_.values.dot(alpha_) - 0.5 * detail::log_det_from_cholesky(chol_) -
               0.5 * t * std::log(2.0 * std::numbers::pi);
    }

private:
    Partition partition_;
    std::vector<KernelParams> params_;
    double noise_var_;
    ObservationSet data_;
    std::size_t dim_ = 0;
    double total_scale_ = 0.0;
    MatrixXd points_t_;
    MatrixXd chol_;
    VectorXd alpha_;
    double jitter_ = 0.0;
};

inline PointPrediction predict_component(const AddGpPosterior& post, const VectorXd& x, std::size_t m) {
    return post.predict_component(x, m);
}

}  // namespace mesbo
