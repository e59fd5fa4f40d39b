#include <gtest/gtest.h>

#include <cmath>

#include "mesbo/acquisition.hpp"
#include "mesbo/optimizer.hpp"
#include "oracles.hpp"

using namespace mesbo;

namespace {

PointPrediction pred(double mean, double std) { return {mean, std}; }

MaxValueSamples samples(std::vector<double> v, std::optional<std::size_t> comp = std::nullopt) {
    MaxValueSamples s;
    s.values = std::move(v);
    s.component = comp;
    return s;
}

}  // namespace

TEST(GFunction, KnownValuesAndOracle) {
    EXPECT_NEAR(static_cast<double>(g(0.0)), std::log(2.0), 1e-15);
    const long double g8 = g(8.0);
    EXPECT_GT(g8, 0.0L);
    EXPECT_LT(g8, 1e-12L);
    for (double u = -8.0; u <= 8.0; u += 0.25)
        EXPECT_NEAR(static_cast<double>(g(u)), static_cast<double>(oracle::g(u)), 1e-9 * (1.0 + std::abs(u)));
}

TEST(GFunction, StrictlyDecreasingAndPositive) {
    long double prev = g(-40.0);
    EXPECT_GT(prev, 0.0L);
    for (int i = 1; i <= 8000; ++i) {
        const double u = -40.0 + 0.01 * i;
        const long double v = g(u);
        EXPECT_GT(v, 0.0L) << u;
        EXPECT_LT(v, prev) << u;
        prev = v;
    }
}

TEST(MesAlpha, AveragesOverSamples) {
    const auto p = pred(0.0, 1.0);
    const auto ys = samples({0.0, 1.0, 2.0});
    const double expect = static_cast<double>((g(0.0) + g(1.0) + g(2.0)) / 3.0L);
    EXPECT_NEAR(mes_alpha(p, ys), expect, 1e-15);
    EXPECT_THROW(mes_alpha(p, samples({})), ArgumentError);
}

TEST(MesAlpha, MarginalSumsWithoutAveraging) {
    const std::vector<PointPrediction> ps{pred(0.0, 1.0), pred(1.0, 2.0)};
    const std::vector<MaxValueSamples> ys{samples({1.0, 2.0}), samples({3.0})};
    const double expect = static_cast<double>(g(1.0) + g(2.0) + g(1.0));
    EXPECT_NEAR(mes_alpha_marginal(ps, ys), expect, 1e-14);
    EXPECT_THROW(mes_alpha_marginal(ps, {samples({1.0})}), ArgumentError);
    EXPECT_THROW(mes_alpha_marginal({}, {}), ArgumentError);
}

TEST(Baselines, Formulas) {
    EXPECT_NEAR(pi_alpha(pred(1.0, 1.0), 0.0), oracle::Phi(1.0), 1e-12);
    EXPECT_NEAR(ei_alpha(pred(0.0, 1.0), 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
    EXPECT_EQ(ei_alpha(pred(2.0, 0.0), 1.0), 1.0);
    EXPECT_NEAR(ucb_alpha(pred(1.0, 2.0), 4.0), 5.0, 1e-15);
    EXPECT_THROW(ucb_alpha(pred(1.0, 2.0), -1.0), ArgumentError);
    EXPECT_NEAR(est_alpha(pred(1.0, 2.0), 3.0), -1.0, 1e-15);
    EXPECT_NEAR(add_gp_ucb_beta(2, 5.0), 2.0 * std::log(10.0) / 5.0, 1e-15);
    EXPECT_THROW(add_gp_ucb_beta(2, 0.5), ArgumentError);
    EXPECT_NEAR(srinivas_beta(100, 3), 2.0 * std::log(100.0 * 9.0 * std::numbers::pi * std::numbers::pi / 0.6), 1e-12);
}

TEST(Baselines, ExpectedImprovementMatchesMonteCarlo) {
    Rng rng(1);
    const auto p = pred(0.3, 0.8);
    const double inc = 0.5;
    const int n = 1000000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = std::max(0.0, p.mean + p.std * rng.normal() - inc);
        acc += v;
        acc2 += v * v;
    }
    const double m = acc / n, se = std::sqrt((acc2 / n - m * m) / n);
    EXPECT_LT(std::abs(ei_alpha(p, inc) - m), 4.0 * se);
}

TEST(AddMes, SumsComponentSamples) {
    const auto p = pred(0.5, 1.5);
    EXPECT_NEAR(add_mes_alpha(p, samples({1.0, 2.0}, 1), 1),
                static_cast<double>(g((1.0 - 0.5) / 1.5) + g((2.0 - 0.5) / 1.5)), 1e-15);
    EXPECT_THROW(add_mes_alpha(p, samples({1.0}, 0), 1), ArgumentError);
    EXPECT_NEAR(add_gp_ucb_alpha(p, 2, 5.0), 0.5 + std::sqrt(add_gp_ucb_beta(2, 5.0)) * 1.5, 1e-15);
}

TEST(AcquisitionSpec, Validation) {
    AcquisitionSpec s;
    s.samples = 0;
    EXPECT_THROW(s.validate(), ArgumentError);
    s.samples = 1;
    s.kind = AcquisitionKind::mes_marginal;
    EXPECT_THROW(s.validate(), ArgumentError);
    s.kind = AcquisitionKind::ucb;
    s.beta = -1.0;
    EXPECT_THROW(s.validate(), ArgumentError);
}

TEST(Equivalence, SingleSampleMesMatchesUcbPiEst) {
    // With one y* above every mean, MES, -gamma, UCB at beta = min gamma^2 and PI
    // at theta = y* all pick the same candidate.
    Rng rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const Index n = 200;
        std::vector<PointPrediction> ps(n);
        for (auto& p : ps) p = pred(rng.uniform(-1.0, 1.0), rng.uniform(0.1, 1.0));
        double top = -1e300;
        for (const auto& p : ps) top = std::max(top, p.mean);
        const double ystar = top + rng.uniform(0.05, 1.0);
        double gmin = 1e300;
        for (const auto& p : ps) gmin = std::min(gmin, standardized_gap(ystar, p));
        MatrixXd idx(n, 1);
        for (Index i = 0; i < n; ++i) idx(i, 0) = static_cast<double>(i);
        auto at = [&](const VectorXd& x) { return ps[static_cast<std::size_t>(x[0])]; };
        const auto ys = samples({ystar});
        const Index a_mes = argmax_discrete([&](const VectorXd& x) { return mes_alpha(at(x), ys); }, idx);
        const Index a_est = argmax_discrete([&](const VectorXd& x) { return est_alpha(at(x), ystar); }, idx);
        const Index a_ucb = argmax_discrete([&](const VectorXd& x) { return ucb_alpha(at(x), gmin * gmin); }, idx);
        const Index a_pi = argmax_discrete([&](const VectorXd& x) { return pi_alpha(at(x), ystar); }, idx);
        EXPECT_EQ(a_mes, a_est);
        EXPECT_EQ(a_mes, a_ucb);
        EXPECT_EQ(a_mes, a_pi);
    }
}
