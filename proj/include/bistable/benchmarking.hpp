// Interleaved randomized benchmarking with and without TLS feedback
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "clifford.hpp"
#include "fit.hpp"
#include "protocol.hpp"
#include "random.hpp"

namespace bistable {

// =============================================================================
// Configuration
// =============================================================================

enum class FeedbackPolicy {
    Syndrome,    // one syndrome cycle before each feedback-arm shot
    RandomGuess, // syndrome cycle is run for timing, its estimate replaced by a coin flip
    Oracle,      // f_c set to the true mode, no cycle
};

struct RbConfig {
    std::vector<int> depths;
    int n_sequences = 100;
    int shots_per_sequence = 1;
    int windows = 1;                  // each window is one full depth sweep
    bool exact_survival = false;      // record P(m = 0) instead of sampling the readout
    double injected_depolarizing = 0; // per-Clifford infidelity added after every random gate
    double syndrome_tau = 0.0;        // probe time of the syndrome cycle; must be set
    FeedbackPolicy policy = FeedbackPolicy::Syndrome;
    std::optional<double> reference_fc; // no-feedback frame; defaults to f_high

    static std::vector<int> power_of_two_depths(int max_exponent) {
        std::vector<int> d;
        for (int k = 0; k <= max_exponent; ++k) d.push_back(1 << k);
        return d;
    }

    void validate() const {
        if (depths.empty()) throw std::invalid_argument("rb: depths must be nonempty");
        for (std::size_t i = 0; i < depths.size(); ++i) {
            if (depths[i] < 0) throw std::invalid_argument("rb: depths must be nonnegative");
            if (i > 0 && depths[i] <= depths[i - 1]) throw std::invalid_argument("rb: depths must be strictly increasing");
        }
        if (n_sequences < 1) throw std::invalid_argument("rb: n_sequences must be >= 1");
        if (shots_per_sequence < 1) throw std::invalid_argument("rb: shots_per_sequence must be >= 1");
        if (windows < 1) throw std::invalid_argument("rb: windows must be >= 1");
        if (!(injected_depolarizing >= 0.0 && injected_depolarizing <= 0.5))
            throw std::invalid_argument("rb: injected_depolarizing must lie in [0, 0.5]");
        if (policy != FeedbackPolicy::Oracle && !(syndrome_tau > 0.0))
            throw std::invalid_argument("rb: syndrome_tau must be positive");
    }
};

// =============================================================================
// Sequence execution
// =============================================================================

/**
 * @brief Plays Clifford gates in the frame f_c with software frame tracking.
 *
 * VZ(theta) only shifts frame_phase; each physical pulse lasts q.t_gate and
 * is sent with axis phi + frame_phase. A wrong f_c therefore detunes every
 * pulse and lets the frame drift between pulses.
 */
template <typename Rng>
void play_clifford(Plant<Rng> &plant, ControllerState &ctrl, int gate) {
    const auto &q = plant.qubit();
    for (const auto &op : CliffordGroup::instance()[gate].decomposition) {
        if (!op.physical()) {
            ctrl.frame_phase -= op.angle;
            continue;
        }
        plant.pulse(PulseSpec::fixed(op.axis_phase + ctrl.frame_phase, op.angle, q.t_gate), ctrl.f_c);
    }
}

inline BlochState depolarize(const BlochState &s, double infidelity) {
    const double shrink = 1.0 - 2.0 * infidelity;
    return {s.x * shrink, s.y * shrink, s.z * shrink};
}

/// Runs one sequence from |0> and returns its survival (exact P(report 0) or a 0/1 shot).
template <typename Rng>
double run_sequence(Plant<Rng> &plant, ControllerState &ctrl, const RbSequence &seq, bool exact,
                    double injected_depolarizing = 0.0) {
    plant.reset_qubit();
    ctrl.frame_phase = 0.0;
    for (int g : seq.gates) {
        play_clifford(plant, ctrl, g);
        if (injected_depolarizing > 0.0) plant.set_bloch(depolarize(plant.bloch(), injected_depolarizing));
    }
    play_clifford(plant, ctrl, seq.recovery);
    double survival;
    if (exact) {
        survival = 1.0 - readout_probability_one(plant.bloch(), plant.qubit());
        plant.reset_qubit();
    } else {
        survival = plant.measure_qubit() == 0 ? 1.0 : 0.0;
    }
    plant.idle(plant.qubit().t_wall());
    ctrl.clock = plant.now();
    return survival;
}

// =============================================================================
// Interleaved experiment
// =============================================================================

struct RbArmWindow {
    std::vector<double> survival; // mean per depth
    FitResult fit;
    double frac_l = 0.0; // fraction of shots started in L
};

struct RbWindow {
    int index = 0;
    double t_start = 0.0;
    double t_end = 0.0;
    RbArmWindow no_feedback;
    RbArmWindow feedback;
    long syndrome_cycles = 0;
    long syndrome_errors = 0; // estimate differs from the mode at the start of the feedback shot
};

struct RbResult {
    std::vector<int> depths;
    double gates_per_clifford = 0.0;
    std::vector<RbWindow> windows;
};

/**
 * @brief Fig. 3(a) style interleaving.
 *
 * For every random sequence: (a) f_c = reference, play, record; (b) update
 * f_c per the feedback policy, replay the same sequence, record. Each window
 * is a full depth sweep and is fit per arm.
 */
template <typename Rng>
RbResult run_rb_interleaved(Plant<Rng> &plant, const RbConfig &cfg, Rng seq_rng, Rng guess_rng) {
    cfg.validate();
    const auto &q = plant.qubit();
    const auto &group = CliffordGroup::instance();
    const double f_ref = cfg.reference_fc.value_or(q.f_high);
    std::optional<SyndromeDecoder> decoder;
    if (cfg.policy != FeedbackPolicy::Oracle) decoder = SyndromeDecoder::calibrate(q, cfg.syndrome_tau);

    RbResult out;
    out.depths = cfg.depths;
    out.gates_per_clifford = group.gates_per_clifford();
    std::vector<double> depth_values(cfg.depths.begin(), cfg.depths.end());

    ControllerState ctrl = initial_controller(q);
    for (int w = 0; w < cfg.windows; ++w) {
        RbWindow win;
        win.index = w;
        win.t_start = plant.now();
        long shots = 0, l_nofb = 0, l_fb = 0;
        for (int depth : cfg.depths) {
            double sum_nofb = 0.0, sum_fb = 0.0;
            for (int s = 0; s < cfg.n_sequences; ++s) {
                const RbSequence seq = random_sequence(depth, seq_rng);
                for (int shot = 0; shot < cfg.shots_per_sequence; ++shot) {
                    ControllerState blind = ctrl;
                    blind.f_c = f_ref;
                    l_nofb += plant.mode() == Mode::L;
                    sum_nofb += run_sequence(plant, blind, seq, cfg.exact_survival, cfg.injected_depolarizing);

                    if (cfg.policy == FeedbackPolicy::Oracle) {
                        ctrl.f_c = q.freq(plant.mode());
                    } else {
                        syndrome_cycle(plant, ctrl, *decoder);
                        if (cfg.policy == FeedbackPolicy::RandomGuess) {
                            const Mode guess = bernoulli(guess_rng, 0.5) ? Mode::L : Mode::H;
                            ctrl.f_c = q.freq(guess);
                            ctrl.last_syndrome = guess;
                        }
                        ++win.syndrome_cycles;
                        win.syndrome_errors += *ctrl.last_syndrome != plant.mode();
                    }
                    l_fb += plant.mode() == Mode::L;
                    sum_fb += run_sequence(plant, ctrl, seq, cfg.exact_survival, cfg.injected_depolarizing);
                    ++shots;
                }
            }
            const double n = static_cast<double>(cfg.n_sequences) * cfg.shots_per_sequence;
            win.no_feedback.survival.push_back(sum_nofb / n);
            win.feedback.survival.push_back(sum_fb / n);
        }
        win.t_end = plant.now();
        win.no_feedback.frac_l = static_cast<double>(l_nofb) / static_cast<double>(shots);
        win.feedback.frac_l = static_cast<double>(l_fb) / static_cast<double>(shots);
        for (RbArmWindow *arm : {&win.no_feedback, &win.feedback})
            arm->fit = fit_exponential(depth_values, arm->survival, {}, out.gates_per_clifford);
        out.windows.push_back(std::move(win));
    }
    return out;
}

/// Convenience overload drawing every stream from the factory.
inline RbResult run_rb_interleaved(const Environment &env, const RbConfig &cfg, const StreamFactory &streams,
                                   std::uint64_t replica = 0) {
    Plant<Philox> plant(env, streams.stream("rb-tls", replica), streams.stream("rb-shot", replica));
    return run_rb_interleaved(plant, cfg, streams.stream("rb-seq", replica), streams.stream("rb-guess", replica));
}

/// Mean and standard error of r_native over windows with a successful fit.
struct SeriesSummary {
    double mean = 0.0;
    double se = 0.0;
    double max = 0.0;
    double min = 0.0;
    int used = 0;
    int flagged = 0;
};

template <typename Select>
SeriesSummary summarize_windows(const RbResult &r, Select &&arm_of) {
    SeriesSummary s;
    std::vector<double> v;
    for (const auto &w : r.windows) {
        const RbArmWindow &arm = arm_of(w);
        if (arm.fit.ok)
            v.push_back(arm.fit.r_native);
        else
            ++s.flagged;
    }
    s.used = static_cast<int>(v.size());
    if (v.empty()) return s;
    double sum = 0.0, sq = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    for (double x : v) sq += (x - s.mean) * (x - s.mean);
    s.se = v.size() > 1 ? std::sqrt(sq / static_cast<double>(v.size() - 1) / static_cast<double>(v.size())) : 0.0;
    s.max = *std::max_element(v.begin(), v.end());
    s.min = *std::min_element(v.begin(), v.end());
    return s;
}

// =============================================================================
// Active vs blind X_pi state preparation
// =============================================================================

struct XpiConfig {
    long cycles = 100000;
    double syndrome_tau = 0.0;
    FeedbackPolicy policy = FeedbackPolicy::Syndrome;
    std::optional<double> blind_fc; // defaults to the stationary-weighted frequency
};

struct XpiResult {
    long cycles = 0;
    long errors = 0;
    double blind_fc = 0.0;
    double mean_active = 0.0; // coherent X_pi infidelity with the estimated frame
    double mean_blind = 0.0;  // coherent X_pi infidelity at blind_fc
    double se_active = 0.0;
    double se_blind = 0.0;
    double se_difference = 0.0; // SE of the paired mean(active - blind)

    double p_err() const { return cycles ? static_cast<double>(errors) / static_cast<double>(cycles) : 0.0; }
    double se_p_err() const {
        const double p = p_err();
        return cycles ? std::sqrt(p * (1 - p) / static_cast<double>(cycles)) : 0.0;
    }
};

/**
 * @brief Repeated syndrome cycles, each followed by an X_pi scored exactly.
 *
 * After each cycle the Rabi formula gives the coherent error of an X_pi in the
 * updated frame and in the blind frame, both against the true current mode.
 */
template <typename Rng>
XpiResult run_xpi_comparison(Plant<Rng> &plant, const XpiConfig &cfg, Rng guess_rng) {
    if (cfg.cycles < 1) throw std::invalid_argument("xpi: cycles must be >= 1");
    const auto &q = plant.qubit();
    XpiResult out;
    if (cfg.blind_fc) {
        out.blind_fc = *cfg.blind_fc;
    } else {
        const auto &tls = plant.env().tls;
        const double p_l = tls.total_rate() > 0.0 ? stationary_distribution(tls).prob_l : 0.5;
        out.blind_fc = p_l * q.f_low + (1 - p_l) * q.f_high;
    }
    std::optional<SyndromeDecoder> decoder;
    if (cfg.policy != FeedbackPolicy::Oracle) decoder = SyndromeDecoder::calibrate(q, cfg.syndrome_tau);

    ControllerState ctrl = initial_controller(q);
    double sa = 0, sa2 = 0, sb = 0, sb2 = 0, sd2 = 0, sd = 0;
    for (long i = 0; i < cfg.cycles; ++i) {
        Mode est;
        if (cfg.policy == FeedbackPolicy::Oracle) {
            est = plant.mode();
        } else {
            est = syndrome_cycle(plant, ctrl, *decoder).estimate;
            if (cfg.policy == FeedbackPolicy::RandomGuess) est = bernoulli(guess_rng, 0.5) ? Mode::L : Mode::H;
        }
        const Mode truth = plant.mode();
        out.errors += est != truth;
        const double a = 1.0 - rabi_transition_probability(detuning(q, q.freq(est), truth), q);
        const double b = 1.0 - rabi_transition_probability(detuning(q, out.blind_fc, truth), q);
        sa += a, sa2 += a * a, sb += b, sb2 += b * b, sd += a - b, sd2 += (a - b) * (a - b);
    }
    const double n = static_cast<double>(cfg.cycles);
    out.cycles = cfg.cycles;
    out.mean_active = sa / n;
    out.mean_blind = sb / n;
    auto se = [n](double s, double s2) { return std::sqrt(std::max(s2 / n - (s / n) * (s / n), 0.0) / n); };
    out.se_active = se(sa, sa2);
    out.se_blind = se(sb, sb2);
    out.se_difference = se(sd, sd2);
    return out;
}

} // namespace bistable
