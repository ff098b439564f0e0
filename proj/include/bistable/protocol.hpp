// Feedback controller: TLS-syndrome cycle, Ramsey cycle, interleaved mitigation
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qubit.hpp"
#include "random.hpp"
#include "telegraph.hpp"

namespace bistable {

// =============================================================================
// Environment and plant
// =============================================================================

struct Environment {
    QubitParams qubit;
    TelegraphParams tls;
    std::optional<Mode> pinned; // freezes the TLS in this mode
    bool finite_pulses = false; // Ramsey/syndrome pulses last |angle|/Omega
};

/**
 * @brief The simulated hardware: qubit, TLS trajectory and laboratory clock.
 *
 * Qubit evolution is split exactly at TLS switching times. Pulses inside the
 * Ramsey and syndrome cycles honour env.finite_pulses; benchmarking gates
 * pass fully specified PulseSpecs.
 */
template <typename Rng = Philox>
class Plant {
public:
    Plant(const Environment &env, Rng tls_rng, Rng shot_rng, std::optional<Mode> initial = std::nullopt)
        : env_(env), tls_(make_track(env, std::move(tls_rng), initial, shot_rng)), shots_(std::move(shot_rng)) {
        env_.qubit.validate();
    }

    const Environment &env() const { return env_; }
    const QubitParams &qubit() const { return env_.qubit; }
    double now() const { return tls_.now(); }
    Mode mode() const { return tls_.mode(); }
    const BlochState &bloch() const { return bloch_; }
    Rng &shot_rng() { return shots_; }

    void set_bloch(const BlochState &s) { bloch_ = s; }
    void reset_qubit() { bloch_ = reset(env_.qubit); }

    void free(double dt, double f_c) {
        if (!(dt >= 0.0)) throw std::invalid_argument("free evolution time must be nonnegative");
        double left = dt;
        while (left > 0.0) {
            const double seg = tls_.segment(left);
            bloch_ = free_evolve(bloch_, detuning(env_.qubit, f_c, tls_.mode()), seg, env_.qubit);
            tls_.advance_to(tls_.now() + seg);
            left -= seg;
        }
    }

    void pulse(const PulseSpec &p, double f_c) {
        if (!p.finite_duration || p.duration <= 0.0) {
            bloch_ = apply_pulse(bloch_, p, 0.0, env_.qubit);
            return;
        }
        double left = p.duration;
        while (left > 0.0) {
            const double seg = tls_.segment(left);
            bloch_ = drive_segment(bloch_, p, detuning(env_.qubit, f_c, tls_.mode()), seg, env_.qubit);
            tls_.advance_to(tls_.now() + seg);
            left -= seg;
        }
    }

    /// Cycle pulse honouring the environment's pulse model.
    void cycle_pulse(double axis_phase, double angle, double f_c) {
        pulse(env_.finite_pulses ? PulseSpec::finite(axis_phase, angle, env_.qubit)
                                 : PulseSpec::instantaneous(axis_phase, angle),
              f_c);
    }

    int measure_qubit() {
        const auto m = measure(bloch_, env_.qubit, shots_);
        bloch_ = m.collapsed;
        return m.outcome;
    }

    /// Dead time: the TLS keeps switching, the qubit is being reset.
    void idle(double dt) { tls_.advance_to(tls_.now() + dt); }

private:
    static TelegraphTrack<Rng> make_track(const Environment &env, Rng rng, std::optional<Mode> initial,
                                          Rng &init_rng) {
        if (env.pinned) return TelegraphTrack<Rng>({0.0, 0.0}, TlsState{*env.pinned, 0.0, 0.0}, std::move(rng));
        const Mode start = initial ? *initial : draw_stationary(env.tls, init_rng);
        return TelegraphTrack<Rng>(env.tls, TlsState{start, 0.0, 0.0}, std::move(rng));
    }

    Environment env_;
    TelegraphTrack<Rng> tls_;
    Rng shots_;
    BlochState bloch_{};
};

// =============================================================================
// Controller
// =============================================================================

struct ControllerState {
    double f_c = 0.0;
    double frame_phase = 0.0;
    double clock = 0.0;
    std::optional<Mode> last_syndrome;
};

inline ControllerState initial_controller(const QubitParams &q) { return {q.f_high, 0.0, 0.0, std::nullopt}; }

struct CycleTiming {
    double t_gate = 0.0;
    double tau = 0.0;
    double t_readout = 0.0;
    double t_reset = 0.0;

    double total() const { return 2.0 * t_gate + tau + t_readout + t_reset; }

    static CycleTiming of(const QubitParams &q, double tau, bool finite_pulses) {
        return {finite_pulses ? kPi / (2.0 * q.rabi_rate) : 0.0, tau, q.t_readout, q.t_reset};
    }
};

/// Estimation bandwidth 1/(tau + t_readout + t_reset); gate time is not part of t_wall.
inline double cycle_bandwidth(const CycleTiming &t) {
    if (!(t.tau >= 0.0 && t.t_gate >= 0.0 && t.t_readout >= 0.0 && t.t_reset >= 0.0))
        throw std::invalid_argument("cycle timing values must be nonnegative");
    if (!(t.total() > 0.0)) throw std::invalid_argument("cycle duration must be positive");
    const double wall = t.tau + t.t_readout + t.t_reset;
    if (wall <= 0.0) throw std::invalid_argument("tau + t_wall must be positive");
    return 1.0 / wall;
}

/// Repetition rate including the two gate pulses.
inline double cycle_rate(const CycleTiming &t) {
    if (!(t.total() > 0.0)) throw std::invalid_argument("cycle duration must be positive");
    return 1.0 / t.total();
}

/**
 * @brief Outcome-to-mode map of the syndrome cycle.
 *
 * Calibrated once from the noiseless engine so the protocol does not depend
 * on the engine's rotation handedness.
 */
struct SyndromeDecoder {
    Mode mode_for_one = Mode::H;
    double tau = 0.0;

    Mode decode(int m) const { return m == 1 ? mode_for_one : other(mode_for_one); }

    static SyndromeDecoder calibrate(const QubitParams &q, double tau) {
        if (!(tau > 0.0)) throw std::invalid_argument("syndrome probe time must be positive");
        const QubitParams ideal = q.ideal();
        auto p_one = [&](Mode m) {
            const double d = detuning(ideal, ideal.f_high, m);
            BlochState s = reset(ideal);
            s = apply_pulse(s, PulseSpec::instantaneous(0.0, -kPi / 2), d, ideal);
            s = free_evolve(s, d, tau, ideal);
            s = apply_pulse(s, PulseSpec::instantaneous(0.0, -kPi / 2), d, ideal);
            return readout_probability_one(s, ideal);
        };
        return {p_one(Mode::H) >= p_one(Mode::L) ? Mode::H : Mode::L, tau};
    }
};

struct SyndromeResult {
    int outcome;
    Mode estimate;
    Mode true_mode_at_measurement;
};

/**
 * @brief One TLS-syndrome cycle: X_{-pi/2}, free evolution, X_{-pi/2}, readout.
 *
 * Always probes in the H frame. The estimate replaces ctrl.f_c after the
 * readout and reset dead time has elapsed.
 */
template <typename Rng>
SyndromeResult syndrome_cycle(Plant<Rng> &plant, ControllerState &ctrl, const SyndromeDecoder &decoder) {
    if (!(decoder.tau > 0.0)) throw std::invalid_argument("syndrome probe time must be positive");
    const auto &q = plant.qubit();
    plant.reset_qubit();
    plant.cycle_pulse(0.0, -kPi / 2, q.f_high);
    plant.free(decoder.tau, q.f_high);
    plant.cycle_pulse(0.0, -kPi / 2, q.f_high);
    const Mode truth = plant.mode();
    const int m = plant.measure_qubit();
    plant.idle(q.t_wall());
    const Mode est = decoder.decode(m);
    ctrl.f_c = q.freq(est);
    ctrl.last_syndrome = est;
    ctrl.clock = plant.now();
    return {m, est, truth};
}

/// Ramsey cycle at ctrl.f_c; the virtual Z advances the second pulse axis by 2 pi D tau.
template <typename Rng>
int ramsey_cycle(Plant<Rng> &plant, ControllerState &ctrl, double tau, double virtual_detuning) {
    if (!(tau >= 0.0)) throw std::invalid_argument("ramsey_cycle: tau must be nonnegative");
    const auto &q = plant.qubit();
    plant.reset_qubit();
    plant.cycle_pulse(0.0, -kPi / 2, ctrl.f_c);
    plant.free(tau, ctrl.f_c);
    plant.cycle_pulse(kTwoPi * virtual_detuning * tau, -kPi / 2, ctrl.f_c);
    const int m = plant.measure_qubit();
    plant.idle(q.t_wall());
    ctrl.clock = plant.now();
    return m;
}

/// Deterministic P(m = 1) of the Ramsey sequence for a fixed mode (no sampling, no TLS switching).
inline double ramsey_probability(const QubitParams &q, double f_c, Mode mode, double tau, double virtual_detuning,
                                 bool finite_pulses = false) {
    const double d = detuning(q, f_c, mode);
    auto pulse = [&](double phase) {
        return finite_pulses ? PulseSpec::finite(phase, -kPi / 2, q) : PulseSpec::instantaneous(phase, -kPi / 2);
    };
    BlochState s = reset(q);
    s = apply_pulse(s, pulse(0.0), d, q);
    s = free_evolve(s, d, tau, q);
    s = apply_pulse(s, pulse(kTwoPi * virtual_detuning * tau), d, q);
    return readout_probability_one(s, q);
}

// =============================================================================
// Interleaved mitigation experiment
// =============================================================================

/// Rows are laboratory-time repetitions, columns the tau grid; values are m = 1 fractions.
struct FringeMatrix {
    std::vector<double> taus;
    int shots_per_point = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<double>> cell_time;   // lab time at the end of each cell
    std::vector<std::vector<double>> cell_frac_l; // fraction of shots taken in L mode

    std::vector<double> column_mean() const {
        std::vector<double> mean(taus.size(), 0.0);
        for (const auto &r : rows)
            for (std::size_t i = 0; i < r.size(); ++i) mean[i] += r[i];
        for (auto &v : mean) v /= rows.empty() ? 1.0 : static_cast<double>(rows.size());
        return mean;
    }
};

struct ModeSample {
    double lab_time;
    Mode true_mode;
    Mode estimate;
};

struct MitigationConfig {
    int m = 50;
    int n = 10;
    int rows = 1;
    int block = 1; // shots per interleaving block
    std::vector<double> tau_grid;
    double det_nofb = 2.0e6;
    double det_fb = 2.33e6;

    static std::vector<double> linear_grid(double lo, double hi, int m) {
        std::vector<double> g(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) g[static_cast<std::size_t>(i)] = m == 1 ? lo : lo + (hi - lo) * i / (m - 1);
        return g;
    }
};

struct MitigationResult {
    FringeMatrix no_feedback;
    FringeMatrix feedback;
    std::vector<ModeSample> trace;
};

/**
 * @brief Interleaves fixed-frame Ramsey cycles with syndrome + feedback Ramsey cycles.
 *
 * Per tau and per block: `block` cycles at f_c = f_H with det_nofb, then
 * `block` pairs of (syndrome cycle, Ramsey at the updated f_c with det_fb).
 */
template <typename Rng>
MitigationResult run_mitigation(Plant<Rng> &plant, ControllerState &ctrl, const SyndromeDecoder &decoder,
                                const MitigationConfig &cfg) {
    if (cfg.m < 1 || cfg.n < 1 || cfg.rows < 1 || cfg.block < 1)
        throw std::invalid_argument("mitigation: M, N, rows and block must be >= 1");
    if (cfg.tau_grid.size() != static_cast<std::size_t>(cfg.m))
        throw std::invalid_argument("mitigation: tau_grid must have M entries");

    const auto &q = plant.qubit();
    MitigationResult out;
    for (FringeMatrix *fm : {&out.no_feedback, &out.feedback}) {
        fm->taus = cfg.tau_grid;
        fm->shots_per_point = cfg.n;
    }
    const auto m_cols = static_cast<std::size_t>(cfg.m);
    for (int row = 0; row < cfg.rows; ++row) {
        std::vector<double> p_nofb(m_cols), p_fb(m_cols), t_nofb(m_cols), t_fb(m_cols), l_nofb(m_cols), l_fb(m_cols);
        for (std::size_t i = 0; i < m_cols; ++i) {
            const double tau = cfg.tau_grid[i];
            int ones_nofb = 0, ones_fb = 0, in_l_nofb = 0, in_l_fb = 0;
            for (int done = 0; done < cfg.n; done += cfg.block) {
                const int b = std::min(cfg.block, cfg.n - done);
                for (int k = 0; k < b; ++k) {
                    ControllerState fixed = ctrl;
                    fixed.f_c = q.f_high;
                    in_l_nofb += plant.mode() == Mode::L;
                    ones_nofb += ramsey_cycle(plant, fixed, tau, cfg.det_nofb);
                    ctrl.clock = fixed.clock;
                }
                for (int k = 0; k < b; ++k) {
                    const auto syn = syndrome_cycle(plant, ctrl, decoder);
                    out.trace.push_back({plant.now(), plant.mode(), syn.estimate});
                    in_l_fb += plant.mode() == Mode::L;
                    ones_fb += ramsey_cycle(plant, ctrl, tau, cfg.det_fb);
                }
            }
            p_nofb[i] = static_cast<double>(ones_nofb) / cfg.n;
            p_fb[i] = static_cast<double>(ones_fb) / cfg.n;
            l_nofb[i] = static_cast<double>(in_l_nofb) / cfg.n;
            l_fb[i] = static_cast<double>(in_l_fb) / cfg.n;
            t_nofb[i] = t_fb[i] = plant.now();
        }
        out.no_feedback.rows.push_back(std::move(p_nofb));
        out.no_feedback.cell_time.push_back(std::move(t_nofb));
        out.no_feedback.cell_frac_l.push_back(std::move(l_nofb));
        out.feedback.rows.push_back(std::move(p_fb));
        out.feedback.cell_time.push_back(std::move(t_fb));
        out.feedback.cell_frac_l.push_back(std::move(l_fb));
    }
    return out;
}

// =============================================================================
// Syndrome error statistics
// =============================================================================

struct SyndromeStats {
    long cycles = 0;
    long errors = 0;

    double p_err() const { return cycles ? static_cast<double>(errors) / static_cast<double>(cycles) : 0.0; }
    double se() const {
        const double p = p_err();
        return cycles ? std::sqrt(p * (1.0 - p) / static_cast<double>(cycles)) : 0.0;
    }
    SyndromeStats &operator+=(const SyndromeStats &o) {
        cycles += o.cycles;
        errors += o.errors;
        return *this;
    }
};

/// An error is an estimate that differs from the mode once the dead time has elapsed.
template <typename Rng>
SyndromeStats run_syndrome_cycles(Plant<Rng> &plant, const SyndromeDecoder &decoder, long cycles) {
    ControllerState ctrl = initial_controller(plant.qubit());
    SyndromeStats s;
    for (long i = 0; i < cycles; ++i) {
        const auto r = syndrome_cycle(plant, ctrl, decoder);
        ++s.cycles;
        s.errors += r.estimate != plant.mode();
    }
    return s;
}

} // namespace bistable
