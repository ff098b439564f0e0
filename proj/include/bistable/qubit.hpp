// Single-qubit Bloch-vector engine in the controller's rotating frame
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "random.hpp"
#include "telegraph.hpp"

namespace bistable {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// =============================================================================
// Parameters
// =============================================================================

/**
 * @brief Physical constants of the bistable qubit.
 *
 * Frequencies in Hz, rabi_rate in rad/s, times in s. Setting t1 and t_phi to
 * infinity disables decoherence. t_gate is the fixed duration given to every
 * physical gate by the benchmarking executor; zero means instantaneous gates.
 */
struct QubitParams {
    double f_low = 5.10e9 - 374e3;
    double f_high = 5.10e9;
    double rabi_rate = kPi / 48e-9;
    double t1 = 74e-6;
    double t_phi = 61e-6;
    double readout_eps_0to1 = 0.03;
    double readout_eps_1to0 = 0.03;
    double t_readout = 2e-6;
    double t_reset = 6e-6;
    double t_gate = 48e-9;

    double delta_tls() const { return f_high - f_low; }
    double t2() const { return 1.0 / (1.0 / (2.0 * t1) + 1.0 / t_phi); }
    double alpha() const { return 1.0 - readout_eps_0to1 - readout_eps_1to0; }
    double t_pi() const { return kPi / rabi_rate; }
    double t_wall() const { return t_readout + t_reset; }
    double freq(Mode m) const { return m == Mode::H ? f_high : f_low; }
    double midpoint() const { return 0.5 * (f_low + f_high); }

    void validate() const {
        if (!(f_high > f_low)) throw std::invalid_argument("qubit: f_high must exceed f_low");
        if (!(t1 > 0.0) || !(t_phi > 0.0)) throw std::invalid_argument("qubit: t1 and t_phi must be positive");
        if (!(rabi_rate > 0.0)) throw std::invalid_argument("qubit: rabi_rate must be positive");
        for (double eps : {readout_eps_0to1, readout_eps_1to0})
            if (!(eps >= 0.0 && eps < 0.5))
                throw std::invalid_argument("qubit: readout error probabilities must lie in [0, 0.5)");
        if (!(t_readout >= 0.0) || !(t_reset >= 0.0) || !(t_gate >= 0.0))
            throw std::invalid_argument("qubit: timing values must be nonnegative");
    }

    /// Decoherence-free, SPAM-free copy.
    QubitParams ideal() const {
        QubitParams q = *this;
        q.t1 = q.t_phi = kInf;
        q.readout_eps_0to1 = q.readout_eps_1to0 = 0.0;
        return q;
    }
};

/// Bloch vector; z = +1 is the ground state |0>.
struct BlochState {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    double prob_one() const { return 0.5 * (1.0 - z); }
};

/**
 * @brief Equatorial drive pulse.
 *
 * A finite pulse lasting `duration` drives at rate |nominal_angle|/duration,
 * which is the qubit Rabi rate for pulses built with finite().
 */
struct PulseSpec {
    double axis_phase = 0.0;
    double nominal_angle = 0.0;
    bool finite_duration = false;
    double duration = 0.0;

    static PulseSpec instantaneous(double axis_phase, double angle) { return {axis_phase, angle, false, 0.0}; }
    static PulseSpec finite(double axis_phase, double angle, const QubitParams &q) {
        return {axis_phase, angle, true, std::abs(angle) / q.rabi_rate};
    }
    static PulseSpec fixed(double axis_phase, double angle, double duration) {
        if (duration <= 0.0) return instantaneous(axis_phase, angle);
        return {axis_phase, angle, true, duration};
    }

    double drive_rate() const { return duration > 0.0 ? std::abs(nominal_angle) / duration : 0.0; }
};

// =============================================================================
// Primitive rotations
// =============================================================================

struct Vec3 {
    double x, y, z;
};

/// Right-handed rotation of v about unit axis n by angle (Rodrigues).
inline BlochState rotate(const BlochState &v, const Vec3 &n, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dot = n.x * v.x + n.y * v.y + n.z * v.z;
    const double k = dot * (1.0 - c);
    return {v.x * c + (n.y * v.z - n.z * v.y) * s + n.x * k,
            v.y * c + (n.z * v.x - n.x * v.z) * s + n.y * k,
            v.z * c + (n.x * v.y - n.y * v.x) * s + n.z * k};
}

/// Precession at angular velocity w (rad/s) for dt.
inline BlochState precess(const BlochState &v, const Vec3 &w, double dt) {
    const double mag = std::sqrt(w.x * w.x + w.y * w.y + w.z * w.z);
    if (mag == 0.0 || dt == 0.0) return v;
    return rotate(v, {w.x / mag, w.y / mag, w.z / mag}, mag * dt);
}

/// Transverse contraction e^{-dt/T2}; longitudinal relaxation toward z = +1.
inline BlochState decohere(const BlochState &v, double dt, const QubitParams &q) {
    if (dt <= 0.0) return v;
    const double t2 = q.t2();
    const double shrink = std::isinf(t2) ? 1.0 : std::exp(-dt / t2);
    const double relax = std::isinf(q.t1) ? 1.0 : std::exp(-dt / q.t1);
    return {v.x * shrink, v.y * shrink, 1.0 + (v.z - 1.0) * relax};
}

/**
 * @brief Bloch angular velocity in the rotating frame.
 *
 * The detuning term follows H/h = -(delta_q/2) sigma_z, i.e. free precession
 * rotates the vector by -2 pi delta_q t about z.
 */
inline Vec3 drive_vector(double axis_phase, double signed_rate, double delta_q) {
    return {signed_rate * std::cos(axis_phase), signed_rate * std::sin(axis_phase), -kTwoPi * delta_q};
}

// =============================================================================
// Operations
// =============================================================================

/// Control frequency minus instantaneous qubit frequency (Hz).
inline double detuning(const QubitParams &q, double f_c, int xi) {
    return f_c - (q.f_high - q.delta_tls() * xi);
}

inline double detuning(const QubitParams &q, double f_c, Mode m) { return detuning(q, f_c, xi_of(m)); }

inline BlochState free_evolve(const BlochState &s, double delta_q, double dt, const QubitParams &q) {
    if (!(dt >= 0.0)) throw std::invalid_argument("free_evolve: dt must be nonnegative");
    return decohere(precess(s, {0.0, 0.0, -kTwoPi * delta_q}, dt), dt, q);
}

/// Drives for part of a finite pulse; decoherence applied after the rotation.
inline BlochState drive_segment(const BlochState &s, const PulseSpec &p, double delta_q, double dt,
                                const QubitParams &q) {
    const double rate = std::copysign(p.drive_rate(), p.nominal_angle);
    return decohere(precess(s, drive_vector(p.axis_phase, rate, delta_q), dt), dt, q);
}

inline BlochState apply_pulse(const BlochState &s, const PulseSpec &p, double delta_q, const QubitParams &q) {
    if (!p.finite_duration || p.duration <= 0.0)
        return rotate(s, {std::cos(p.axis_phase), std::sin(p.axis_phase), 0.0}, p.nominal_angle);
    return drive_segment(s, p, delta_q, p.duration, q);
}

/// X_pi transition probability from the Rabi formula at detuning delta_q (Hz).
inline double rabi_transition_probability(double delta_q, const QubitParams &q) {
    const double om = q.rabi_rate;
    const double d = kTwoPi * delta_q;
    const double gen = std::sqrt(om * om + d * d);
    const double s = std::sin(kPi * gen / (2.0 * om));
    return om * om / (gen * gen) * s * s;
}

/// P(report 1) including assignment errors, without sampling.
inline double readout_probability_one(const BlochState &s, const QubitParams &q) {
    const double p1 = s.prob_one();
    return q.readout_eps_0to1 * (1.0 - p1) + (1.0 - q.readout_eps_1to0) * p1;
}

struct Measurement {
    int outcome;
    BlochState collapsed;
};

template <typename Rng>
Measurement measure(const BlochState &s, const QubitParams &q, Rng &rng) {
    const bool true_one = bernoulli(rng, s.prob_one());
    const double flip = true_one ? q.readout_eps_1to0 : q.readout_eps_0to1;
    const bool report_one = bernoulli(rng, flip) ? !true_one : true_one;
    return {report_one ? 1 : 0, BlochState{0.0, 0.0, true_one ? -1.0 : 1.0}};
}

inline BlochState reset(const QubitParams &) { return {}; }

} // namespace bistable
