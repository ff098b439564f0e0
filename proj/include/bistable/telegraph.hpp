// Two-state Markov (random telegraph) process driving the qubit frequency
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "random.hpp"

namespace bistable {

// =============================================================================
// Types
// =============================================================================

/// Qubit mode set by the TLS configuration. Numeric value is xi.
enum class Mode : int { H = 0, L = 1 };

constexpr int xi_of(Mode m) { return static_cast<int>(m); }
constexpr Mode mode_of(int xi) { return xi ? Mode::L : Mode::H; }
constexpr Mode other(Mode m) { return m == Mode::H ? Mode::L : Mode::H; }
constexpr const char *to_string(Mode m) { return m == Mode::H ? "H" : "L"; }

/**
 * @brief Switching rates of the telegraph process (1/s).
 *
 * gamma_hl drives H -> L, gamma_lh drives L -> H. The single-rate picture
 * with total correlation decay gamma is symmetric(gamma).
 */
struct TelegraphParams {
    double gamma_hl = 0.0;
    double gamma_lh = 0.0;

    static TelegraphParams symmetric(double gamma) { return {gamma / 2, gamma / 2}; }

    double total_rate() const { return gamma_hl + gamma_lh; }
    double leave_rate(Mode from) const { return from == Mode::H ? gamma_hl : gamma_lh; }

    void validate() const {
        if (!(gamma_hl >= 0.0) || !(gamma_lh >= 0.0))
            throw std::invalid_argument("telegraph rates must be nonnegative");
    }
};

struct TlsState {
    Mode mode = Mode::H;
    double t_last_flip = 0.0;
    double now = 0.0;

    int xi() const { return xi_of(mode); }
};

struct Stationary {
    double prob_l;
    double prob_h;

    double of(Mode m) const { return m == Mode::L ? prob_l : prob_h; }
};

// =============================================================================
// Operations
// =============================================================================

inline Stationary stationary_distribution(const TelegraphParams &p) {
    p.validate();
    const double total = p.total_rate();
    if (total <= 0.0) throw std::domain_error("degenerate process: both switching rates are zero");
    return {p.gamma_hl / total, p.gamma_lh / total};
}

/// P(mode after dt differs from mode now).
inline double flip_probability(const TelegraphParams &p, Mode from, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("flip_probability: dt must be nonnegative");
    p.validate();
    const double total = p.total_rate();
    if (total <= 0.0 || dt == 0.0) return 0.0;
    const double p_other = (from == Mode::H ? p.gamma_hl : p.gamma_lh) / total;
    return p_other * -std::expm1(-total * dt);
}

/// Draws a stationary initial mode; with a degenerate process the given fallback is kept.
template <typename Rng>
Mode draw_stationary(const TelegraphParams &p, Rng &rng, Mode fallback = Mode::H) {
    if (p.total_rate() <= 0.0) return fallback;
    return bernoulli(rng, stationary_distribution(p).prob_l) ? Mode::L : Mode::H;
}

/**
 * @brief Exact jump simulation over [now, now + dt].
 *
 * Dwell times are exponential with the rate of leaving the current mode;
 * memorylessness lets each call start a fresh dwell from `now`.
 */
template <typename Rng>
TlsState evolve(TlsState s, const TelegraphParams &p, double dt, Rng &rng) {
    if (!(dt >= 0.0)) throw std::invalid_argument("evolve: dt must be nonnegative");
    const double t_end = s.now + dt;
    double t = s.now;
    for (;;) {
        const double wait = exponential(rng, p.leave_rate(s.mode));
        if (t + wait > t_end) break;
        t += wait;
        s.mode = other(s.mode);
        s.t_last_flip = t;
    }
    s.now = t_end;
    return s;
}

/**
 * @brief Telegraph trajectory with a pending next-flip time.
 *
 * Used by the protocol layer to split qubit evolution exactly at switching
 * events without redrawing a dwell for every small step.
 */
template <typename Rng>
class TelegraphTrack {
public:
    TelegraphTrack(TelegraphParams params, TlsState start, Rng rng)
        : params_(params), state_(start), rng_(std::move(rng)) {
        params_.validate();
        next_flip_ = state_.now + exponential(rng_, params_.leave_rate(state_.mode));
    }

    const TlsState &state() const { return state_; }
    const TelegraphParams &params() const { return params_; }
    Mode mode() const { return state_.mode; }
    double now() const { return state_.now; }
    double next_flip() const { return next_flip_; }

    /// Advances to t (>= now), applying every flip that falls in between.
    void advance_to(double t) {
        while (next_flip_ <= t) {
            state_.mode = other(state_.mode);
            state_.t_last_flip = next_flip_;
            next_flip_ += exponential(rng_, params_.leave_rate(state_.mode));
        }
        state_.now = t;
    }

    /// Time until the next flip, capped at `horizon`.
    double segment(double horizon) const {
        return std::min(horizon, next_flip_ - state_.now);
    }

private:
    TelegraphParams params_;
    TlsState state_;
    Rng rng_;
    double next_flip_ = std::numeric_limits<double>::infinity();
};

/**
 * @brief Ensemble average 1/2 <e^{i phi(t)}> of the telegraph phase.
 *
 * The phase advances at +omega in H and -omega in L. Trajectories start from
 * the stationary law unless `start` is given (equal weights for a degenerate
 * process). `times` must be sorted ascending.
 */
template <typename Rng>
std::vector<std::complex<double>> telegraph_phase_average(const TelegraphParams &p, double omega,
                                                          const std::vector<double> &times, long trajectories,
                                                          Rng &rng, std::optional<Mode> start = std::nullopt) {
    if (trajectories < 1) throw std::invalid_argument("telegraph_phase_average: need at least one trajectory");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] < times[i - 1]) throw std::invalid_argument("telegraph_phase_average: times must be sorted");
    std::vector<std::complex<double>> acc(times.size());
    for (long n = 0; n < trajectories; ++n) {
        Mode m = start ? *start : (p.total_rate() > 0.0 ? draw_stationary(p, rng) : (bernoulli(rng, 0.5) ? Mode::L : Mode::H));
        double t = 0.0, phase = 0.0;
        double next = exponential(rng, p.leave_rate(m));
        for (std::size_t i = 0; i < times.size(); ++i) {
            while (next <= times[i]) {
                phase += (m == Mode::H ? omega : -omega) * (next - t);
                t = next;
                m = other(m);
                next = t + exponential(rng, p.leave_rate(m));
            }
            phase += (m == Mode::H ? omega : -omega) * (times[i] - t);
            t = times[i];
            acc[i] += std::polar(1.0, phase);
        }
    }
    for (auto &a : acc) a *= 0.5 / static_cast<double>(trajectories);
    return acc;
}

} // namespace bistable
