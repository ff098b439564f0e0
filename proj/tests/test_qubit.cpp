#include <gtest/gtest.h>

#include <cmath>

#include "bistable/qubit.hpp"
#include "bistable/random.hpp"
#include "oracles.hpp"
#include "probes.hpp"

using namespace bistable;

TEST(Qubit, DerivedQuantities) {
    const QubitParams q;
    EXPECT_NEAR(q.delta_tls(), 374e3, 1e-3);
    EXPECT_NEAR(q.t2(), 43.2e-6, 0.05e-6);
    EXPECT_NEAR(q.alpha(), 0.94, 1e-15);
    EXPECT_NEAR(q.t_pi(), 48e-9, 1e-20);
    EXPECT_NEAR(q.t_wall(), 8e-6, 1e-20);
    EXPECT_DOUBLE_EQ(detuning(q, q.f_high, Mode::H), 0.0);
    EXPECT_NEAR(detuning(q, q.f_high, Mode::L), 374e3, 1e-3);
}

TEST(Qubit, ValidateRejectsBadParameters) {
    QubitParams q;
    q.f_low = q.f_high + 1;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    q = {};
    q.readout_eps_0to1 = 0.6;
    EXPECT_THROW(q.validate(), std::invalid_argument);
    q = {};
    q.t1 = 0;
    EXPECT_THROW(q.validate(), std::invalid_argument);
}

TEST(Qubit, NormNeverGrows) {
    const QubitParams q;
    Philox rng(21, 0);
    for (int trial = 0; trial < 500; ++trial) {
        BlochState s;
        for (int k = 0; k < 30; ++k) {
            const double d = (uniform01(rng) - 0.5) * 4e6;
            s = uniform01(rng) < 0.5 ? free_evolve(s, d, uniform01(rng) * 1e-5, q)
                                     : apply_pulse(s, PulseSpec::finite(uniform01(rng) * kTwoPi, uniform01(rng) * 4, q), d, q);
            ASSERT_LE(s.norm(), 1.0 + 1e-12);
        }
    }
}

TEST(Qubit, UnitaryEvolutionPreservesNorm) {
    const QubitParams q = QubitParams{}.ideal();
    BlochState s = apply_pulse({}, PulseSpec::finite(0.3, 1.1, q), 2e5, q);
    s = free_evolve(s, 1e6, 3e-6, q);
    EXPECT_NEAR(s.norm(), 1.0, 1e-13);
}

TEST(Qubit, DecoherenceRates) {
    QubitParams q;
    const BlochState s{1.0, 0.0, 0.0};
    const auto d = decohere(s, 10e-6, q);
    EXPECT_NEAR(d.x, std::exp(-10e-6 / q.t2()), 1e-14);
    EXPECT_NEAR(d.z, 1.0 - std::exp(-10e-6 / q.t1), 1e-14);
}

TEST(Qubit, FreePrecessionSign) {
    // positive detuning rotates the vector clockwise about z
    const QubitParams q = QubitParams{}.ideal();
    const auto s = free_evolve({1.0, 0.0, 0.0}, 1e6, 0.25e-6, q);
    EXPECT_NEAR(s.x, 0.0, 1e-12);
    EXPECT_NEAR(s.y, -1.0, 1e-12);
}

TEST(Qubit, ResonantPiPulseInverts) {
    const QubitParams q = QubitParams{}.ideal();
    const auto s = apply_pulse({}, PulseSpec::finite(0.0, kPi, q), 0.0, q);
    EXPECT_NEAR(s.z, -1.0, 1e-12);
    const auto t = apply_pulse({}, PulseSpec::instantaneous(kPi / 2, kPi / 2), 0.0, q);
    EXPECT_NEAR(t.x, 1.0, 1e-12);
}

TEST(Qubit, RabiFormulaMatchesIntegration) {
    const QubitParams q = QubitParams{}.ideal();
    for (double d : {0.0, 1e5, 374e3, 2e6, -1e6}) {
        const auto s = apply_pulse({}, PulseSpec::finite(0.0, kPi, q), d, q);
        EXPECT_NEAR(s.prob_one(), rabi_transition_probability(d, q), 1e-12) << d;
    }
}

TEST(Qubit, FiniteSegmentsCompose) {
    // without decoherence splitting a pulse is exact
    const QubitParams ideal = QubitParams{}.ideal();
    const auto p = PulseSpec::finite(0.4, 2.0, ideal);
    const auto whole = drive_segment({}, p, 3e5, p.duration, ideal);
    const auto halves = drive_segment(drive_segment({}, p, 3e5, p.duration / 2, ideal), p, 3e5, p.duration / 2, ideal);
    EXPECT_NEAR(whole.x, halves.x, 1e-12);
    EXPECT_NEAR(whole.y, halves.y, 1e-12);
    EXPECT_NEAR(whole.z, halves.z, 1e-12);
    // with decoherence the post-rotation contraction is an operator splitting: error of order duration/T2
    const QubitParams q;
    const auto a = drive_segment({}, p, 3e5, p.duration, q);
    const auto b = drive_segment(drive_segment({}, p, 3e5, p.duration / 2, q), p, 3e5, p.duration / 2, q);
    const double bound = p.duration / q.t2();
    EXPECT_LT(std::hypot(a.x - b.x, a.y - b.y, a.z - b.z), bound);
}

TEST(Qubit, ReadoutStatistics) {
    const QubitParams q;
    EXPECT_NEAR(readout_probability_one({}, q), 0.03, 1e-15);
    EXPECT_NEAR(readout_probability_one({0, 0, -1}, q), 0.97, 1e-15);
    Philox rng(22, 0);
    const int n = 200000;
    const BlochState s{0.0, 0.6, 0.8};
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        const auto m = measure(s, q, rng);
        ones += m.outcome;
        ASSERT_TRUE(m.collapsed.z == 1.0 || m.collapsed.z == -1.0);
    }
    const double p = readout_probability_one(s, q);
    EXPECT_NEAR(static_cast<double>(ones) / n, p, 4 * oracle::binomial_sigma(p, n));
}

TEST(Qubit, FinitePulseRamseyOffset) {
    const QubitParams q = QubitParams{}.ideal();
    const double target = 2.0 / q.rabi_rate;
    for (double tau : {0.5e-6, 1.3e-6, 3e-6}) {
        const double off = probe::effective_offset(q, -q.delta_tls() / 2, tau, -kPi / 2, -kPi / 2);
        EXPECT_NEAR(off, target, 0.01 * target) << tau;
    }
}
