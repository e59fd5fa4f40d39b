#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "gp.hpp"
#include "gumbel.hpp"
#include "normal.hpp"

namespace mesbo {

enum class AcquisitionKind { mes, add_mes, ucb, pi, ei, est, add_gp_ucb, mes_marginal, random };

inline const char* to_string(AcquisitionKind k) {
    switch (k) {
        case AcquisitionKind::mes: return "mes";
        case AcquisitionKind::add_mes: return "add_mes";
        case AcquisitionKind::ucb: return "ucb";
        case AcquisitionKind::pi: return "pi";
        case AcquisitionKind::ei: return "ei";
        case AcquisitionKind::est: return "est";
        case AcquisitionKind::add_gp_ucb: return "add_gp_ucb";
        case AcquisitionKind::mes_marginal: return "mes_marginal";
        case AcquisitionKind::random: return "random";
    }
    return "unknown";
}

inline bool is_additive(AcquisitionKind k) { return k == AcquisitionKind::add_mes || k == AcquisitionKind::add_gp_ucb; }

/// The acquisition choice and its kind-specific parameters.
struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::mes;
    std::size_t samples = 1;                        ///< K (MES family)
    SamplerKind sampler = SamplerKind::gumbel;      ///< MES family
    std::optional<double> beta;                     ///< fixed UCB beta; unset = Srinivas schedule
    std::optional<double> pi_margin;                ///< PI target margin over incumbent; unset = noise std
    std::vector<KernelParams> hyper_set;            ///< E for marginal MES

    void validate() const {
        const bool mes_family = kind == AcquisitionKind::mes || kind == AcquisitionKind::add_mes ||
                                kind == AcquisitionKind::mes_marginal;
        if (mes_family && samples == 0) throw ArgumentError("AcquisitionSpec: K must be >= 1");
        if (beta && !(*beta >= 0.0)) throw ArgumentError("AcquisitionSpec: beta must be >= 0");
        if (kind == AcquisitionKind::mes_marginal && hyper_set.empty())
            throw ArgumentError("AcquisitionSpec: mes_marginal requires a non-empty hyperparameter set");
    }
};

/// g(u) = u psi(u) / (2 Psi(u)) - log Psi(u), the per-sample MES term.
/// Evaluated in extended precision so it stays strictly positive and strictly
/// decreasing across [-40, 40] (g(40) is ~1e-346, below the double range).
inline long double g(double u) {
    if (std::abs(u) <= 30.0) {
        // Double precision is ample here and several times faster.
        const double pdf = normal_pdf(u);
        if (u >= 0.0) {
            const double tail = 0.5 * std::erfc(u * std::numbers::sqrt2 / 2.0);
            return u * pdf / (2.0 * (1.0 - tail)) - std::log1p(-tail);
        }
        const double cdf = 0.5 * std::erfc(-u * std::numbers::sqrt2 / 2.0);
        return u * pdf / (2.0 * cdf) - std::log(cdf);
    }
    const long double x = u;
    constexpr long double inv_sqrt2 = 0.707106781186547524400844362104849039L;
    constexpr long double inv_sqrt2pi = 0.398942280401432677939946059934381868L;
    const long double pdf = inv_sqrt2pi * std::exp(-0.5L * x * x);
    if (x >= 0.0L) {
        const long double tail = 0.5L * std::erfc(x * inv_sqrt2);  // 1 - Psi(u)
        return x * pdf / (2.0L * (1.0L - tail)) - std::log1p(-tail);
    }
    const long double cdf = 0.5L * std::erfc(-x * inv_sqrt2);
    return x * pdf / (2.0L * cdf) - std::log(cdf);
}

inline double standardized_gap(double y_star, const PointPrediction& pred) { return (y_star - pred.mean) / pred.std; }

/// (1/K) sum_{y*} g((y* - mean) / std).
inline double mes_alpha(const PointPrediction& pred, const MaxValueSamples& ys) {
    if (ys.values.empty()) throw ArgumentError("mes_alpha: K must be >= 1");
    long double acc = 0.0L;
    for (double y : ys.values) acc += g(standardized_gap(y, pred));
    return static_cast<double>(acc / static_cast<long double>(ys.values.size()));
}

/// sum_{eta in E} sum_{y*} g(gamma^eta); no 1/K factor.
inline double mes_alpha_marginal(const std::vector<PointPrediction>& preds, const std::vector<MaxValueSamples>& ys) {
    if (preds.empty()) throw ArgumentError("mes_alpha_marginal: |E| must be >= 1");
    if (preds.size() != ys.size()) throw ArgumentError("mes_alpha_marginal: misaligned prediction/sample lists");
    long double acc = 0.0L;
    for (std::size_t e = 0; e < preds.size(); ++e)
        for (double y : ys[e].values) acc += g(standardized_gap(y, preds[e]));
    return static_cast<double>(acc);
}

inline double ucb_alpha(const PointPrediction& pred, double beta) {
    if (!(beta >= 0.0)) throw ArgumentError("ucb_alpha: beta must be >= 0");
    return pred.mean + std::sqrt(beta) * pred.std;
}

/// Psi((mean - theta) / std).
inline double pi_alpha(const PointPrediction& pred, double theta) { return normal_cdf((pred.mean - theta) / pred.std); }

/// std (z Psi(z) + psi(z)) with z = (mean - incumbent) / std.
inline double ei_alpha(const PointPrediction& pred, double incumbent) {
    const double diff = pred.mean - incumbent;
    if (pred.std <= 0.0) return std::max(diff, 0.0);
    const double z = diff / pred.std;
    return std::max(0.0, pred.std * (z * normal_cdf(z) + normal_pdf(z)));
}

/// -gamma_m(x), maximized by the shared optimizer.
inline double est_alpha(const PointPrediction& pred, double m) { return -(m - pred.mean) / pred.std; }

/// sum over the component's samples of g(gamma^(m)); no 1/K factor.
inline double add_mes_alpha(const PointPrediction& component_pred, const MaxValueSamples& ys_m, std::size_t m) {
    if (ys_m.component && *ys_m.component != m)
        throw ArgumentError("add_mes_alpha: samples belong to component " + std::to_string(*ys_m.component) +
                            ", not " + std::to_string(m));
    long double acc = 0.0L;
    for (double y : ys_m.values) acc += g(standardized_gap(y, component_pred));
    return static_cast<double>(acc);
}

/// beta_t^(m) = |A_m| log(2t) / 5.
inline double add_gp_ucb_beta(std::size_t group_size, double t) {
    if (!(t >= 1.0)) throw ArgumentError("add_gp_ucb: t must be >= 1");
    return static_cast<double>(group_size) * std::log(2.0 * t) / 5.0;
}

inline double add_gp_ucb_alpha(const PointPrediction& component_pred, std::size_t group_size, double t) {
    return component_pred.mean + std::sqrt(add_gp_ucb_beta(group_size, t)) * component_pred.std;
}

/// beta_t = 2 log(|X| t^2 pi^2 / (6 delta)) with delta = 0.1, on a discretized set of size |X|.
inline double srinivas_beta(std::size_t discrete_size, std::size_t t) {
    const double tt = static_cast<double>(std::max<std::size_t>(1, t));
    return 2.0 * std::log(static_cast<double>(discrete_size) * tt * tt * std::numbers::pi * std::numbers::pi / 0.6);
}

}  // namespace mesbo
