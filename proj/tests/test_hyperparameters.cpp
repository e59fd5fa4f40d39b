#include <gtest/gtest.h>

#include "mesbo/features.hpp"
#include "mesbo/hyperparameters.hpp"
#include "mesbo/objectives.hpp"

using namespace mesbo;

namespace {

ObservationSet sample_data(const std::function<double(const VectorXd&)>& f, std::size_t t, std::size_t d, double noise,
                           Rng& rng) {
    ObservationSet data(d);
    VectorXd x(static_cast<Index>(d));
    for (std::size_t i = 0; i < t; ++i) {
        for (Index j = 0; j < x.size(); ++j) x[j] = rng.uniform();
        data.add(x, f(x) + noise * rng.normal());
    }
    return data;
}

}  // namespace

TEST(CoordinateAscent, FindsQuadraticPeakAndKeepsFixedPoint) {
    auto f = [](const VectorXd& x) { return -(x[0] - 1.0) * (x[0] - 1.0) - 2.0 * (x[1] + 0.5) * (x[1] + 0.5); };
    VectorXd init(2);
    init << 3.0, 2.0;
    const auto res = coordinate_ascent(f, init);
    EXPECT_NEAR(res.x[0], 1.0, 1e-3);
    EXPECT_NEAR(res.x[1], -0.5, 1e-3);
    EXPECT_LE(res.evaluations, 400u);

    VectorXd at_peak(2);
    at_peak << 1.0, -0.5;
    const auto fixed = coordinate_ascent(f, at_peak);
    EXPECT_NEAR(fixed.x[0], 1.0, 1e-9);
    EXPECT_NEAR(fixed.x[1], -0.5, 1e-9);
}

TEST(FitHyperparameters, NeverDecreasesLikelihood) {
    Rng rng(41);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t d = 1 + rng.index(3);
        const auto truth = KernelParams::isotropic(d, rng.uniform(0.5, 3.0), rng.uniform(0.1, 0.5), 0.01);
        Rng frng = rng.child(rep);
        auto map = build_feature_map(truth, 500, frng);
        const VectorXd w = frng.normal_vector(500);
        const auto data = sample_data([&](const VectorXd& x) { return map.value(w, x); }, 10 + rng.index(20), d, 0.1, rng);
        const auto init = KernelParams::isotropic(d, rng.uniform(0.2, 5.0), rng.uniform(0.05, 1.0), rng.uniform(0.001, 0.1));
        const auto fit = fit_hyperparameters(data, init, 150);
        EXPECT_FALSE(fit.warning);
        EXPECT_GE(log_marginal_likelihood(data, fit.params), log_marginal_likelihood(data, init) - 1e-12);
        EXPECT_NO_THROW(fit.params.validate());
    }
}

TEST(FitHyperparameters, Deterministic) {
    Rng rng(42);
    const auto data = sample_data([](const VectorXd& x) { return std::sin(6.0 * x[0]); }, 15, 1, 0.05, rng);
    const auto init = KernelParams::isotropic(1, 1.0, 0.3, 0.01);
    EXPECT_EQ(fit_hyperparameters(data, init, 200).params, fit_hyperparameters(data, init, 200).params);
}

TEST(FitHyperparameters, RecoversBandwidthFromPriorDraw) {
    // scale 5, bandwidth 0.0625, noise 0.01^2; t = 200 in 1-d.
    const auto truth = KernelParams::isotropic(1, 5.0, 0.0625, 1e-4);
    int ok = 0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        Rng rng(100 + s);
        auto map = build_feature_map(truth, 2000, rng);
        const VectorXd w = rng.normal_vector(2000);
        const auto data = sample_data([&](const VectorXd& x) { return map.value(w, x); }, 200, 1, 0.01, rng);
        const auto fit = fit_hyperparameters(data, KernelParams::isotropic(1, 1.0, 0.2, 1e-3), 400);
        const double ratio = fit.params.bandwidths[0] / 0.0625;
        ok += ratio > 0.5 && ratio < 2.0;
    }
    EXPECT_GE(ok, 4);
}

TEST(FitHyperparameters, AllFailuresReturnInitWithWarning) {
    ObservationSet data(1);
    data.add(VectorXd::Constant(1, 0.1), std::numeric_limits<double>::quiet_NaN());
    data.add(VectorXd::Constant(1, 0.7), 1.0);
    const auto init = KernelParams::isotropic(1, 1.0, 0.3, 0.01);
    const auto fit = fit_hyperparameters(data, init, 50);
    EXPECT_TRUE(fit.warning);
    EXPECT_EQ(fit.params, init);
}

TEST(FitHyperparameters, NeedsTwoPoints) {
    ObservationSet data(1);
    data.add(VectorXd::Zero(1), 0.0);
    EXPECT_THROW(fit_hyperparameters(data, KernelParams::isotropic(1, 1.0, 1.0, 0.1)), ArgumentError);
}

TEST(RandomPartition, GroupSizesAndCoverage) {
    Rng rng(43);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t d = 1 + rng.index(12), g = 1 + rng.index(4);
        const auto p = random_partition(d, g, rng);
        EXPECT_NO_THROW(p.validate(d));
        for (const auto& grp : p.groups) EXPECT_LE(grp.size(), g);
    }
}

TEST(LearnDecomposition, SingleDimension) {
    Rng rng(44);
    const auto data = sample_data([](const VectorXd& x) { return x[0]; }, 5, 1, 0.0, rng);
    const auto dec = learn_decomposition(data, KernelParams::isotropic(1, 1.0, 0.3, 0.01), 50, 2, rng);
    EXPECT_EQ(dec.partition, Partition::single(1));
}

TEST(LearnDecomposition, ArgumentErrors) {
    Rng rng(45);
    const auto data = sample_data([](const VectorXd& x) { return x[0]; }, 5, 2, 0.0, rng);
    const auto base = KernelParams::isotropic(2, 1.0, 0.3, 0.01);
    EXPECT_THROW(learn_decomposition(data, base, 0, 2, rng), ArgumentError);
    EXPECT_THROW(learn_decomposition(data, base, 10, 0, rng), ArgumentError);
    ObservationSet one(2);
    one.add(VectorXd::Zero(2), 0.0);
    EXPECT_THROW(learn_decomposition(one, base, 10, 2, rng), ArgumentError);
}

TEST(LearnDecomposition, ScoreMatchesAdditiveLikelihood) {
    Rng rng(46);
    const auto data = sample_data([](const VectorXd& x) { return std::sin(5 * x[0]) + x[1] * x[2]; }, 30, 4, 0.05, rng);
    const auto base = KernelParams(2.0, (VectorXd(4) << 0.3, 0.4, 0.5, 0.6).finished(), 0.01);
    Rng r1(7);
    const auto dec = learn_decomposition(data, base, 200, 2, r1);
    const double direct = additive_log_marginal_likelihood(data, dec.partition, dec.component_params, base.noise_var);
    EXPECT_NEAR(dec.log_likelihood, direct, 1e-8 * std::abs(direct));
    // Argmax contract: no enumerated candidate beats the winner.
    Rng r2(7);
    for (int c = 0; c < 200; ++c) {
        const auto cand = random_partition(4, 2, r2);
        EXPECT_LE(additive_log_marginal_likelihood(data, cand, component_params_for(cand, base), base.noise_var),
                  dec.log_likelihood + 1e-8 * std::abs(dec.log_likelihood));
    }
}

TEST(LearnDecomposition, BeatsOneGroupWhenItIsACandidate) {
    Rng rng(47);
    const auto data = sample_data([](const VectorXd& x) { return std::cos(4 * x[0]) * x[1]; }, 25, 2, 0.05, rng);
    const auto base = KernelParams::isotropic(2, 1.0, 0.4, 0.01);
    const auto dec = learn_decomposition(data, base, 20, 2, rng);  // max group 2 in 2-d: the only candidate
    const double all_in_one = additive_log_marginal_likelihood(data, Partition::single(2), {base}, base.noise_var);
    EXPECT_GE(dec.log_likelihood, all_in_one - 1e-9 * std::abs(all_in_one));
}

TEST(LearnDecomposition, RecoversTwoGroupStructure) {
    // d = 4, true groups {0,2} and {1,3}; 20 trials with 500 candidates each.
    int hits = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng(200 + s);
        const Partition truth{{{0, 2}, {1, 3}}};
        const auto base = KernelParams::isotropic(4, 1.0, 0.25, 1e-4);
        auto map = build_additive_feature_map(truth, component_params_for(truth, base), 500, 4, rng);
        const VectorXd w = rng.normal_vector(static_cast<Index>(map.size()));
        const auto data = sample_data([&](const VectorXd& x) { return map.value(w, x); }, 120, 4, 0.01, rng);
        const auto dec = learn_decomposition(data, base, 500, 2, rng);
        hits += dec.partition == truth;
    }
    EXPECT_GE(hits, 16);
}

TEST(LearnDecomposition, DeterministicGivenSeed) {
    Rng rng(48);
    const auto data = sample_data([](const VectorXd& x) { return x.sum(); }, 20, 6, 0.1, rng);
    const auto base = KernelParams::isotropic(6, 1.0, 0.4, 0.01);
    Rng a(9), b(9);
    EXPECT_EQ(learn_decomposition(data, base, 100, 2, a).partition, learn_decomposition(data, base, 100, 2, b).partition);
}
