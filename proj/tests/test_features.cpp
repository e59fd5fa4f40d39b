#include <gtest/gtest.h>

#include <cmath>

#include "mesbo/features.hpp"
#include "oracles.hpp"

using namespace mesbo;

namespace {

oracle::Vector to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

ObservationSet noisy_sine_data(std::size_t t, std::size_t d, Rng& rng) {
    ObservationSet data(d);
    for (std::size_t i = 0; i < t; ++i) {
        VectorXd x(static_cast<Index>(d));
        for (Index j = 0; j < x.size(); ++j) x[j] = rng.uniform();
        data.add(x, std::sin(3.0 * x.sum()) + 0.1 * rng.normal());
    }
    return data;
}

}  // namespace

TEST(FeatureMap, SelfInnerProductNearScale) {
    Rng rng(1);
    const auto p = KernelParams::isotropic(3, 2.0, 0.3, 0.0);
    const auto map = build_feature_map(p, 5000, rng);
    for (int i = 0; i < 20; ++i) {
        const VectorXd x = rng.normal_vector(3);
        EXPECT_NEAR(map.evaluate(x).squaredNorm() / 2.0, 1.0, 0.05);
    }
    EXPECT_THROW(build_feature_map(p, 0, rng), ArgumentError);
}

TEST(FeatureMap, ApproximatesKernel) {
    Rng rng(2);
    const auto p = KernelParams(1.5, (VectorXd(2) << 0.2, 0.5).finished(), 0.0);
    const std::size_t D = 10000;
    const auto map = build_feature_map(p, D, rng);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        VectorXd x(2), y(2);
        x << rng.uniform(), rng.uniform();
        y << rng.uniform(), rng.uniform();
        worst = std::max(worst, std::abs(map.evaluate(x).dot(map.evaluate(y)) - se_kernel(x, y, p)));
    }
    EXPECT_LE(worst, 5.0 * p.scale / std::sqrt(static_cast<double>(D)));
}

TEST(FeatureMap, ValueGradientAndRows) {
    Rng rng(3);
    const auto map = build_feature_map(KernelParams::isotropic(2, 1.0, 0.3, 0.0), 200, rng);
    const VectorXd w = rng.normal_vector(200);
    VectorXd x(2);
    x << 0.3, 0.6;
    VectorXd g;
    const double v = map.value_and_gradient(w, x, g);
    EXPECT_NEAR(v, map.value(w, x), 1e-12);
    EXPECT_NEAR(v, w.dot(map.evaluate(x)), 1e-12);
    for (Index j = 0; j < 2; ++j) {
        VectorXd e = VectorXd::Zero(2);
        e[j] = 1e-6;
        EXPECT_NEAR(g[j], (map.value(w, x + e) - map.value(w, x - e)) / 2e-6, 1e-5);
    }
    MatrixXd pts(2, 2);
    pts << 0.1, 0.2, 0.7, 0.9;
    const MatrixXd z = map.evaluate_rows(pts);
    EXPECT_TRUE(z.col(1).isApprox(map.evaluate(pts.row(1).transpose()), 1e-12));
}

TEST(FeatureMap, RestrictedMapIgnoresInactiveDims) {
    Rng rng(4);
    const auto map = build_feature_map(KernelParams::isotropic(2, 1.0, 0.3, 0.0), 100, rng, {0, 3}, 5);
    VectorXd x = VectorXd::Constant(5, 0.4), y = x;
    y[1] = 0.9;
    y[2] = -3.0;
    y[4] = 7.0;
    EXPECT_TRUE(map.evaluate(x).isApprox(map.evaluate(y), 1e-14));
    EXPECT_THROW(build_feature_map(KernelParams::isotropic(2, 1.0, 0.3, 0.0), 10, rng, {0, 5}, 5), ArgumentError);
}

TEST(FeatureMap, AdditiveMapGroups) {
    Rng rng(5);
    const Partition part{{{0, 2}, {1}}};
    const auto map = build_additive_feature_map(
        part, {KernelParams::isotropic(2, 1.0, 0.3, 0.0), KernelParams::isotropic(1, 2.0, 0.3, 0.0)}, 50, 3, rng);
    EXPECT_EQ(map.size(), 100u);
    EXPECT_EQ(map.group_indices(1).size(), 50u);
    const auto sub = map.select_group(1);
    EXPECT_EQ(sub.size(), 50u);
    EXPECT_EQ(sub.omegas.col(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(sub.omegas.col(2).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_NEAR(sub.amplitudes[0], std::sqrt(2.0 * 2.0 / 50.0), 1e-15);
}

TEST(FeaturePosterior, EmptyDataIsPrior) {
    Rng rng(6);
    const auto map = build_feature_map(KernelParams::isotropic(1, 1.0, 0.3, 0.0), 30, rng);
    const auto fp = feature_posterior(map, ObservationSet(1), 0.1);
    EXPECT_EQ(fp.nu, VectorXd::Zero(30));
    EXPECT_EQ(fp.sigma, MatrixXd::Identity(30, 30));
    EXPECT_THROW(feature_posterior(map, ObservationSet(1), 0.0), ArgumentError);
}

TEST(FeaturePosterior, MatchesDenseGpWithFeatureKernel) {
    // Weight-space and function-space views of the same finite-feature model.
    Rng rng(7);
    const auto map = build_feature_map(KernelParams::isotropic(2, 1.0, 0.3, 0.0), 64, rng);
    const auto data = noisy_sine_data(25, 2, rng);
    const double noise = 0.05;
    const auto fp = feature_posterior(map, data, noise);
    EXPECT_LE((fp.sigma - fp.sigma.transpose()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((fp.sigma_sqrt * fp.sigma_sqrt.transpose() - fp.sigma).cwiseAbs().maxCoeff(), 1e-10);

    std::vector<oracle::Vector> xs;
    oracle::Vector ys;
    for (Index i = 0; i < data.points.rows(); ++i) {
        xs.push_back(to_std(data.points.row(i).transpose()));
        ys.push_back(data.values[i]);
    }
    auto kernel = [&](const oracle::Vector& a, const oracle::Vector& b) {
        const VectorXd va = Eigen::Map<const VectorXd>(a.data(), 2), vb = Eigen::Map<const VectorXd>(b.data(), 2);
        return map.evaluate(va).dot(map.evaluate(vb));
    };
    const auto gp = oracle::make_gp(xs, ys, kernel, noise);
    for (int i = 0; i < 100; ++i) {
        VectorXd q(2);
        q << rng.uniform(), rng.uniform();
        const VectorXd phi = map.evaluate(q);
        const auto ref = gp.at(to_std(q));
        EXPECT_NEAR(phi.dot(fp.nu), ref.mean, 1e-6);
        EXPECT_NEAR(phi.dot(fp.sigma * phi), ref.var, 1e-6);
    }
}

TEST(FeaturePosterior, SamplingMoments) {
    VectorXd nu(2);
    nu << 1.0, -2.0;
    const auto exact = FeaturePosterior::from_moments(nu, MatrixXd::Zero(2, 2));
    Rng rng(8);
    EXPECT_EQ(sample_posterior_function(exact, rng), nu);

    MatrixXd sigma(2, 2);
    sigma << 1.0, 0.6, 0.6, 0.5;
    const auto fp = FeaturePosterior::from_moments(nu, sigma);
    const int n = 200000;
    VectorXd mean = VectorXd::Zero(2);
    MatrixXd second = MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        const VectorXd a = sample_posterior_function(fp, rng);
        mean += a;
        second += (a - nu) * (a - nu).transpose();
    }
    mean /= n;
    second /= n;
    EXPECT_LE((mean - nu).cwiseAbs().maxCoeff(), 0.01);
    EXPECT_LE((second - sigma).cwiseAbs().maxCoeff(), 0.02);

    Rng a(9), b(10);
    EXPECT_NE(sample_posterior_function(fp, a), sample_posterior_function(fp, b));
    EXPECT_THROW(FeaturePosterior::from_moments(nu, MatrixXd::Zero(3, 3)), ArgumentError);
}

TEST(FeatureMaximizer, SingleFeatureReachesAmplitude) {
    Rng rng(11);
    const auto map = build_feature_map(KernelParams::isotropic(2, 3.0, 0.05, 0.0), 1, rng);
    const auto fp = FeaturePosterior::from_moments(VectorXd::Ones(1), MatrixXd::Zero(1, 1));
    const auto s = sample_max_features(fp, map, Domain::unit(2), rng, 3, 5);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.source, SamplerKind::feature);
    for (double v : s.values) EXPECT_NEAR(v, std::sqrt(2.0 * 3.0), 1e-6);
}

TEST(FeatureMaximizer, BeatsDenseProbing) {
    Rng rng(12);
    const auto map = build_feature_map(KernelParams::isotropic(2, 1.0, 0.15, 0.0), 500, rng);
    for (int rep = 0; rep < 5; ++rep) {
        const VectorXd w = rng.normal_vector(500);
        const auto best = maximize_feature_function(w, map, Domain::unit(2), rng);
        EXPECT_TRUE(Domain::unit(2).contains(best.x));
        EXPECT_NEAR(best.value, map.value(w, best.x), 1e-12);
        for (int i = 0; i < 1000; ++i) {
            VectorXd x(2);
            x << rng.uniform(), rng.uniform();
            EXPECT_GE(best.value, map.value(w, x) - 1e-9);
        }
    }
}

TEST(FeatureMaximizer, FloorAndArguments) {
    Rng rng(13);
    const auto map = build_feature_map(KernelParams::isotropic(1, 1.0, 0.3, 0.0), 20, rng);
    const auto fp = FeaturePosterior::from_moments(VectorXd::Zero(20), MatrixXd::Zero(20, 20));
    const auto s = sample_max_features(fp, map, Domain::unit(1), rng, 4, 3, 2.5);
    for (double v : s.values) EXPECT_EQ(v, 2.5);
    EXPECT_THROW(sample_max_features(fp, map, Domain::unit(1), rng, 0, 3), ArgumentError);
    EXPECT_THROW(sample_max_features(fp, map, Domain::unit(1), rng, 1, 0), ArgumentError);
}

TEST(FeatureMaximizer, ComponentUsesOnlyGroupWeights) {
    Rng rng(14);
    const Partition part{{{0}, {1}}};
    const auto map = build_additive_feature_map(
        part, {KernelParams::isotropic(1, 1.0, 0.3, 0.0), KernelParams::isotropic(1, 1.0, 0.3, 0.0)}, 1, 2, rng);
    VectorXd nu(2);
    nu << 0.0, 2.0;
    const auto fp = FeaturePosterior::from_moments(nu, MatrixXd::Zero(2, 2));
    const auto s0 = sample_max_features_component(fp, map, 0, Domain::unit(2), rng, 2, 3);
    const auto s1 = sample_max_features_component(fp, map, 1, Domain::unit(2), rng, 2, 3);
    EXPECT_EQ(s0.component, 0u);
    for (double v : s0.values) EXPECT_NEAR(v, 0.0, 1e-12);
    // cos reaches 1 only if the phase sweep covers it inside [0, 1]; bounded by the amplitude regardless.
    for (double v : s1.values) EXPECT_LE(v, 2.0 * std::sqrt(2.0) + 1e-12);
    EXPECT_THROW(sample_max_features_component(fp, map, 2, Domain::unit(2), rng, 1, 3), ArgumentError);
}
