#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bistable/fit.hpp"
#include "bistable/random.hpp"

using namespace bistable;

namespace {

std::vector<double> rb_depths() {
    std::vector<double> d;
    for (int k = 0; k <= 11; ++k) d.push_back(std::ldexp(1.0, k));
    return d;
}

} // namespace

TEST(Fit, ExactExponentialIsRecovered) {
    const auto depths = rb_depths();
    std::vector<double> y;
    for (double m : depths) y.push_back(0.48 * std::pow(0.995, m) + 0.5);
    const auto f = fit_exponential(depths, y, {}, 0.8);
    ASSERT_TRUE(f.ok) << f.message;
    EXPECT_NEAR(f.decay, 0.995, 1e-9);
    EXPECT_NEAR(f.amplitude, 0.48, 1e-9);
    EXPECT_NEAR(f.offset, 0.5, 1e-9);
    EXPECT_NEAR(f.r_clifford, 0.0025, 1e-9);
    EXPECT_NEAR(f.r_native, 0.0025 / 0.8, 1e-9);
}

TEST(Fit, BinomialDataWithinStandardErrors) {
    // repeat a noisy fit and compare the spread of p to the reported SE
    const auto depths = rb_depths();
    Philox rng(51, 0);
    const double p_true = 0.998;
    const int trials = 200, shots = 200;
    int within = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> y;
        for (double m : depths) {
            const double s = 0.5 + 0.5 * std::pow(p_true, m);
            int k = 0;
            for (int i = 0; i < shots; ++i) k += bernoulli(rng, s);
            y.push_back(static_cast<double>(k) / shots);
        }
        const auto f = fit_exponential(depths, y, {}, 1.0);
        ASSERT_TRUE(f.ok);
        within += std::abs(f.decay - p_true) < 3.0 * f.se_decay;
    }
    EXPECT_GE(within, trials * 95 / 100); // about 98.5% expected with 9 residual dof
}

TEST(Fit, FlatDataGivesNoDecay) {
    const auto depths = rb_depths();
    const std::vector<double> y(depths.size(), 1.0);
    const auto f = fit_exponential(depths, y, {}, 0.8);
    EXPECT_TRUE(f.ok);
    EXPECT_EQ(f.decay, 1.0);
    EXPECT_EQ(f.r_native, 0.0);
}

TEST(Fit, RejectsTooFewDepths) {
    const std::vector<double> d = {1, 2}, y = {0.9, 0.8};
    EXPECT_FALSE(fit_exponential(d, y, {}, 1.0).ok);
}

TEST(Fit, LinearLeastSquares) {
    Eigen::MatrixXd b(4, 2);
    b << 1, 0, 1, 1, 1, 2, 1, 3;
    Eigen::VectorXd y(4);
    y << 1, 3, 5, 7;
    const auto [c, rss] = linear_lsq(b, y);
    EXPECT_NEAR(c(0), 1.0, 1e-12);
    EXPECT_NEAR(c(1), 2.0, 1e-12);
    EXPECT_NEAR(rss, 0.0, 1e-20);
}

TEST(Fit, DampedToneIsRecoveredFromOffsetSeed) {
    std::vector<double> taus, ys;
    for (int i = 0; i < 50; ++i) {
        const double t = 4e-6 * i / 49;
        taus.push_back(t);
        ys.push_back(0.5 + 0.3 * std::exp(-2e5 * t) * std::cos(kTwoPi * 2.1e6 * t + 0.4));
    }
    const auto f = fit_tones(taus, ys, {2.05e6}, 1e5);
    EXPECT_NEAR(f.frequencies[0], 2.1e6, 1.0);
    EXPECT_NEAR(f.amplitudes[0], 0.3, 1e-7);
    EXPECT_NEAR(f.decay_rate, 2e5, 1.0);
    EXPECT_NEAR(f.phases[0], 0.4, 1e-6);
    EXPECT_NEAR(f.value(1e-6), 0.5 + 0.3 * std::exp(-0.2) * std::cos(kTwoPi * 2.1 + 0.4), 1e-7);
}

TEST(Fit, TwoToneRecoversBeating) {
    std::vector<double> taus, ys;
    for (int i = 0; i < 50; ++i) {
        const double t = 4e-6 * i / 49;
        taus.push_back(t);
        ys.push_back(0.5 + 0.2 * std::cos(kTwoPi * 2.0e6 * t) + 0.2 * std::cos(kTwoPi * 2.374e6 * t));
    }
    const auto f = fit_two_tone(taus, ys, 1.0e6, 3.5e6, 10e3, 100e3);
    ASSERT_EQ(f.frequencies.size(), 2u);
    EXPECT_NEAR(std::min(f.frequencies[0], f.frequencies[1]), 2.0e6, 100);
    EXPECT_NEAR(std::max(f.frequencies[0], f.frequencies[1]), 2.374e6, 100);
    EXPECT_NEAR(f.envelope_node(), 0.5 / 374e3, 1e-10);
}

TEST(Fit, SingleToneAndSidebands) {
    std::vector<double> taus, ys;
    for (int i = 0; i < 50; ++i) {
        const double t = 4e-6 * i / 49;
        taus.push_back(t);
        ys.push_back(0.5 + 0.4 * std::cos(kTwoPi * 2.33e6 * t) + 0.04 * std::cos(kTwoPi * 2.704e6 * t));
    }
    const auto f = fit_single_tone(taus, ys, 1.0e6, 3.5e6, 10e3);
    EXPECT_NEAR(f.frequencies[0], 2.33e6, 2e4);
    const std::vector<double> offs = {-374e3, 374e3};
    const auto r = sideband_ratios(taus, ys, 2.33e6, 0.0, offs);
    EXPECT_NEAR(r[0], 0.0, 1e-6);
    EXPECT_NEAR(r[1], 0.1, 1e-6);
    EXPECT_NEAR(periodogram_peak(taus, ys, 1e6, 3.5e6, 10e3), 2.33e6, 1e4);
}
