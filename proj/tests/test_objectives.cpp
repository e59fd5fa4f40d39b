#include <gtest/gtest.h>

#include <cmath>

#include "mesbo/objectives.hpp"

using namespace mesbo;

TEST(Eggholder, ValuesAndKnownMax) {
    EXPECT_NEAR(eggholder(VectorXd::Zero(2)), -47.0 * std::sin(std::sqrt(47.0)), 1e-12);
    auto obj = eggholder_objective();
    const VectorXd at = (VectorXd(2) << 512.0, 404.2319).finished();
    EXPECT_NEAR(obj(at), *obj.known_max, 1e-6);
    double best = -1e300;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const VectorXd x = (VectorXd(2) << -512.0 + 10.24 * i, -512.0 + 10.24 * j).finished();
            const double v = obj(x);
            EXPECT_TRUE(std::isfinite(v));
            best = std::max(best, v);
        }
    EXPECT_LE(best, *obj.known_max);
    Rng rng(1);
    EXPECT_LE(random_probe_max(obj, 100000, rng), *obj.known_max);
}

TEST(Michalewicz, KnownMaxima) {
    auto m2 = michalewicz_objective(2);
    const VectorXd x = (VectorXd(2) << 2.20290552, 1.57079633).finished();
    EXPECT_NEAR(m2(x), 1.8013, 1e-4);
    EXPECT_NEAR(*m2.known_max, 1.8013, 1e-4);
    Rng rng(2);
    EXPECT_LE(random_probe_max(m2, 100000, rng), *m2.known_max + 1e-12);
    EXPECT_FALSE(michalewicz_objective(3).known_max.has_value());
    EXPECT_NEAR(*michalewicz_objective(10).known_max, 9.66015, 1e-9);
}

TEST(Shekel, KnownMaxBeatsProbes) {
    auto obj = shekel_objective(10);
    Rng rng(3);
    EXPECT_GE(*obj.known_max, random_probe_max(obj, 100000, rng));
    // Row 0 centre (all fours) dominates.
    EXPECT_GT(*obj.known_max, obj(VectorXd::Constant(10, 4.0)) - 1e-12);
    EXPECT_THROW(shekel_objective(0), ArgumentError);
}

TEST(Certify, RaisesUnderstatedMax) {
    auto obj = quadratic_objective(VectorXd::Constant(2, 0.5), Domain::unit(2));
    obj.known_max = -1.0;
    Rng rng(4);
    certify_known_max(obj, 1000, rng);
    EXPECT_GT(*obj.known_max, -1e-3);
    EXPECT_LE(*obj.known_max, 0.0);
    EXPECT_EQ(obj.known_max_probes, 1000u);
}

TEST(SyntheticGp, PriorVarianceAndSeeds) {
    const auto p = KernelParams::isotropic(2, 5.0, 0.0625, 0.0);
    // Variance across many independent draws at a fixed point.
    double s = 0.0, s2 = 0.0;
    const int n = 300;
    const VectorXd x = VectorXd::Constant(2, 0.37);
    for (int i = 0; i < n; ++i) {
        Rng rng(1000 + i);
        auto map = build_feature_map(p, 10000, rng);
        const double v = map.value(rng.normal_vector(10000), x);
        s += v;
        s2 += v * v;
    }
    const double var = s2 / n - (s / n) * (s / n);
    EXPECT_NEAR(var / 5.0, 1.0, 0.2);

    const auto a = sample_synthetic_gp_objective(p, 2, 1000, 1), b = sample_synthetic_gp_objective(p, 2, 1000, 2);
    EXPECT_NE(a(x), b(x));
    EXPECT_EQ(a(x), sample_synthetic_gp_objective(p, 2, 1000, 1)(x));
    EXPECT_THROW(sample_synthetic_gp_objective(p, 2, 999, 1), ArgumentError);
}

TEST(SyntheticGp, StoredMaxDominatesProbes) {
    const auto p = KernelParams::isotropic(2, 5.0, 0.0625, 0.0);
    for (std::uint64_t seed = 10; seed < 13; ++seed) {
        auto obj = sample_synthetic_gp_objective(p, 2, 1000, seed);
        Rng rng(seed);
        EXPECT_LE(random_probe_max(obj, 100000, rng), *obj.known_max + 1e-9);
    }
}

TEST(SyntheticAdditive, StructureAndMax) {
    auto obj = sample_synthetic_additive_objective(6, 5.0, 0.1, 1000, 7);
    ASSERT_TRUE(obj.true_partition.has_value());
    EXPECT_EQ(obj.true_partition->size(), 3u);
    EXPECT_NO_THROW(obj.true_partition->validate(6));
    Rng rng(8);
    EXPECT_LE(random_probe_max(obj, 20000, rng), *obj.known_max + 1e-9);
    // Changing a coordinate only moves its own group's contribution.
    const auto& g0 = obj.true_partition->groups[0];
    VectorXd x = VectorXd::Constant(6, 0.3), y = x, z = x;
    y[static_cast<Index>(g0[0])] = 0.8;
    z[static_cast<Index>(obj.true_partition->groups[1][0])] = 0.9;
    VectorXd yz = y;
    yz[static_cast<Index>(obj.true_partition->groups[1][0])] = 0.9;
    EXPECT_NEAR(obj(yz) - obj(y), obj(z) - obj(x), 1e-10);
    EXPECT_THROW(sample_synthetic_additive_objective(5, 1.0, 0.1, 1000, 1), ArgumentError);
}
