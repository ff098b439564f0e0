// Closed-form fidelity, contrast and error-rate expressions
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qubit.hpp"
#include "telegraph.hpp"

namespace bistable::analytics {

// =============================================================================
// Ramsey likelihood and contrast
// =============================================================================

/**
 * @brief P(m | xi) of the Ramsey probe under decoherence and symmetric SPAM.
 *
 * delta_f = f_c - f_H. The phase is 2 pi (delta_f + xi Delta) tau, matching
 * detuning = f_c - f_q with f_q = f_H - xi Delta.
 */
inline double ramsey_likelihood(int m, int xi, double tau, double delta_f, const QubitParams &q) {
    if (!(tau >= 0.0)) throw std::invalid_argument("ramsey_likelihood: tau must be nonnegative");
    const double t2 = q.t2();
    const double decay = std::isinf(t2) ? 1.0 : std::exp(-tau / t2);
    const double osc = std::cos(kTwoPi * (delta_f + xi * q.delta_tls()) * tau);
    const double sign = m == 1 ? 1.0 : -1.0;
    return 0.5 + sign * 0.5 * q.alpha() * decay * osc;
}

inline double decay_factor(double tau, double t2) { return std::isinf(t2) ? 1.0 : std::exp(-tau / t2); }

/// |P(1|H) - P(1|L)|; at delta_f = 0 this is alpha e^{-tau/T2} sin^2(pi Delta tau).
inline double contrast(double delta_tls, double tau, double alpha, double t2, double delta_f = 0.0) {
    if (!(tau >= 0.0)) throw std::invalid_argument("contrast: tau must be nonnegative");
    return std::abs(alpha * decay_factor(tau, t2) * std::sin(kTwoPi * (delta_f + 0.5 * delta_tls) * tau) *
                    std::sin(kPi * delta_tls * tau));
}

/// Contrast of the midpoint-frame probe read out in quadrature.
inline double quadrature_contrast(double delta_tls, double tau, double alpha, double t2) {
    if (!(tau >= 0.0)) throw std::invalid_argument("quadrature_contrast: tau must be nonnegative");
    return alpha * decay_factor(tau, t2) * std::abs(std::sin(kPi * delta_tls * tau));
}

/// Argmax of contrast() on the first lobe: arccos(1/sqrt(1 + (2 pi Delta T2)^2)) / (pi Delta).
inline double tau_opt(double delta_tls, double t2) {
    if (!(delta_tls > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("tau_opt: inputs must be positive");
    if (std::isinf(t2)) return 0.5 / delta_tls;
    const double x = kTwoPi * delta_tls * t2;
    return std::acos(1.0 / std::sqrt(1.0 + x * x)) / (kPi * delta_tls);
}

/// Argmax of quadrature_contrast(): arctan(pi Delta T2) / (pi Delta).
inline double tau_opt_quadrature(double delta_tls, double t2) {
    if (!(delta_tls > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("tau_opt_quadrature: inputs must be positive");
    if (std::isinf(t2)) return 0.5 / delta_tls;
    return std::atan(kPi * delta_tls * t2) / (kPi * delta_tls);
}

inline double p_err_static(double delta_tls, double t2, double alpha) {
    if (!(delta_tls > 0.0) || !(t2 > 0.0)) throw std::invalid_argument("p_err_static: inputs must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("p_err_static: alpha must lie in [0, 1]");
    return 0.5 * (1.0 - contrast(delta_tls, tau_opt(delta_tls, t2), alpha, t2));
}

/**
 * @brief Contrast with finite pi/2 pulses.
 *
 * Without echo each pulse pair acts as an extra free time 2/Omega (Omega in
 * rad/s); with echo the instantaneous-pulse quadrature form is returned.
 */
inline double finite_pulse_contrast(double delta_tls, double tau, double alpha, double t2, double omega, bool echo) {
    if (!(omega > 0.0)) throw std::invalid_argument("finite_pulse_contrast: omega must be positive");
    if (!(tau >= 0.0)) throw std::invalid_argument("finite_pulse_contrast: tau must be nonnegative");
    if (echo) return quadrature_contrast(delta_tls, tau, alpha, t2);
    const double offset = std::isinf(omega) ? 0.0 : 2.0 / omega;
    return alpha * decay_factor(tau, t2) * std::abs(std::sin(kPi * delta_tls * (tau + offset)));
}

/// Argmax of the no-echo finite-pulse contrast.
inline double tau_opt_finite_pulse(double delta_tls, double t2, double omega) {
    return tau_opt_quadrature(delta_tls, t2) - 2.0 / omega;
}

// =============================================================================
// X-gate fidelity, blind and active
// =============================================================================

/// 1 - F_X(f_c | f_i) from the Rabi formula.
inline double rabi_infidelity(double f_c, double f_i, double omega) {
    const double d = kTwoPi * (f_c - f_i);
    const double gen = std::sqrt(omega * omega + d * d);
    const double s = std::sin(gen / (2.0 * omega) * kPi);
    return 1.0 - omega * omega / (gen * gen) * s * s;
}

/// Floor set by decoherence during the pulse and SPAM.
inline double intrinsic_infidelity(const QubitParams &q) { return 1.0 - q.alpha() * decay_factor(q.t_pi(), q.t2()); }

struct Populations {
    double p_l = 0.5;
    double p_h = 0.5;

    void validate() const {
        if (!(p_l >= 0.0 && p_h >= 0.0) || std::abs(p_l + p_h - 1.0) > 1e-12)
            throw std::invalid_argument("populations must be nonnegative and sum to 1");
    }
};

struct BlindResult {
    double coherent = 0.0; // exact Rabi mixture
    double total = 0.0;    // coherent + intrinsic floor
    bool weak_noise = true; // false when 2 pi Delta >= Omega (weighted-average optimum void)
};

inline bool weak_noise(const QubitParams &q) { return kTwoPi * q.delta_tls() < q.rabi_rate; }

inline BlindResult blind_x_infidelity(double f_c, const Populations &pops, const QubitParams &q) {
    pops.validate();
    BlindResult r;
    r.coherent = pops.p_l * rabi_infidelity(f_c, q.f_low, q.rabi_rate) +
                 pops.p_h * rabi_infidelity(f_c, q.f_high, q.rabi_rate);
    r.total = intrinsic_infidelity(q) + r.coherent;
    r.weak_noise = weak_noise(q);
    return r;
}

struct BlindOptimum {
    double f_c;
    bool weak_noise;
};

/// Population-weighted frequency; flagged outside the weak-noise regime.
inline BlindOptimum optimal_blind_frequency(const Populations &pops, const QubitParams &q) {
    pops.validate();
    return {pops.p_l * q.f_low + pops.p_h * q.f_high, weak_noise(q)};
}

/// Quadratic bound pi^2 Delta^2 / Omega^2 (equal populations, midpoint drive).
inline double blind_coherent_bound(const QubitParams &q) {
    const double r = kPi * q.delta_tls() / q.rabi_rate;
    return r * r;
}

inline double active_x_infidelity(double p_err, const QubitParams &q) {
    if (!(p_err >= 0.0 && p_err <= 0.5)) throw std::invalid_argument("active_x_infidelity: p_err must lie in [0, 0.5]");
    const double r = kTwoPi * q.delta_tls() / q.rabi_rate;
    return intrinsic_infidelity(q) + p_err * r * r;
}

/// <dphi^2> = (2 pi Delta t_g)^2 / 4 for a frame parked at the midpoint.
inline double z_phase_error_variance(double delta_tls, double t_g) {
    if (!(t_g >= 0.0)) throw std::invalid_argument("z_phase_error_variance: t_g must be nonnegative");
    const double phi = kTwoPi * delta_tls * t_g;
    return phi * phi / 4.0;
}

// =============================================================================
// Anderson-Kubo coherence
// =============================================================================

struct AkCoherence {
    std::complex<double> c_eq;
    std::complex<double> c_plus;
    std::complex<double> c_minus;
    std::complex<double> delta_c;
    double s_ak = 0.0;
    bool overdamped = false;
};

/**
 * @brief Solution of C'' + gamma C' + (pi Delta)^2 C = 0 with C(0) = 1/2.
 *
 * Works with complex beta = sqrt((pi Delta)^2 - (gamma/2)^2), so the
 * overdamped branch is the analytic continuation (hyperbolic functions).
 * C_plus/C_minus come from the A_pm constants; delta_c from the closed form
 * i (pi Delta / beta) e^{-gamma t/2} sin(beta t).
 */
inline AkCoherence ak_coherence(double t, double delta_tls, double gamma) {
    using namespace std::complex_literals;
    if (!(delta_tls > 0.0) || !(gamma >= 0.0)) throw std::invalid_argument("ak_coherence: invalid rates");
    const double w = kPi * delta_tls;
    const std::complex<double> beta = std::sqrt(std::complex<double>(w * w - 0.25 * gamma * gamma, 0.0));
    const double damp = std::exp(-0.5 * gamma * t);
    // sin(beta t)/beta, continuous through beta = 0
    const bool critical = std::abs(beta) * std::max(t, 1.0 / w) < 1e-6;
    const std::complex<double> sinc_t = critical ? std::complex<double>(t) : std::sin(beta * t) / beta;
    const std::complex<double> cos_t = critical ? std::complex<double>(1.0) : std::cos(beta * t);

    AkCoherence r;
    r.overdamped = gamma >= 2.0 * w;
    r.c_eq = 0.5 * damp * (cos_t + 0.5 * gamma * sinc_t);
    r.delta_c = 1i * w * damp * sinc_t;
    if (critical) {
        r.c_plus = r.c_eq + 0.5 * r.delta_c;
        r.c_minus = r.c_eq - 0.5 * r.delta_c;
    } else {
        auto branch = [&](double sign) {
            const std::complex<double> a = 0.25 * (1.0 - sign * w / beta + 1i * gamma / (2.0 * beta));
            return damp * (a * std::exp(-1i * beta * t) + (0.5 - a) * std::exp(1i * beta * t));
        };
        r.c_plus = branch(+1.0);
        r.c_minus = branch(-1.0);
    }
    r.s_ak = std::abs(r.delta_c);
    return r;
}

/// d/dt C_eq = -(pi Delta)^2/2 e^{-gamma t/2} sin(beta t)/beta.
inline std::complex<double> ak_ceq_derivative(double t, double delta_tls, double gamma) {
    const double w = kPi * delta_tls;
    const std::complex<double> beta = std::sqrt(std::complex<double>(w * w - 0.25 * gamma * gamma, 0.0));
    const bool critical = std::abs(beta) * std::max(t, 1.0 / w) < 1e-6;
    const std::complex<double> sinc_t = critical ? std::complex<double>(t) : std::sin(beta * t) / beta;
    return -0.5 * w * w * std::exp(-0.5 * gamma * t) * sinc_t;
}

// =============================================================================
// Estimation-bandwidth error budget
// =============================================================================

struct PerrBandwidth {
    double expanded; // first-order additive budget, clamped to [0, 0.5]
    double exact;    // 1/2 [1 - alpha e^{-Gamma tau - gamma t_wall}]
};

inline PerrBandwidth p_err_bandwidth(double delta_tls, double gamma, double alpha, double t2, double t_wall) {
    if (!(delta_tls > 0.0) || !(gamma >= 0.0) || !(alpha >= 0.0 && alpha <= 1.0) || !(t2 > 0.0) || !(t_wall >= 0.0))
        throw std::invalid_argument("p_err_bandwidth: inputs must be nonnegative (delta, t2 positive; alpha <= 1)");
    const double gamma_tilde = (std::isinf(t2) ? 0.0 : 1.0 / t2) + 0.5 * gamma;
    const double tau = 0.5 / delta_tls;
    const double budget = 0.5 * ((1.0 - alpha) + gamma_tilde * tau + gamma * t_wall);
    return {std::clamp(budget, 0.0, 0.5), std::clamp(0.5 * (1.0 - alpha * std::exp(-gamma_tilde * tau - gamma * t_wall)), 0.0, 0.5)};
}

// =============================================================================
// Improvement heatmap
// =============================================================================

struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    int n = 2;
    bool log = true;

    std::vector<double> values() const {
        if (n < 1) throw std::invalid_argument("grid axis needs at least one point");
        if (log && !(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log grid axis needs positive bounds");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            v[static_cast<std::size_t>(i)] = log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
        }
        return v;
    }
};

struct HeatmapParams {
    double alpha = 0.94;
    double t_pi = 48e-9;
    double t2 = 61e-6;
    double t_wall = 8e-6;

    double omega() const { return kPi / t_pi; }
    double floor() const { return 1.0 - alpha * decay_factor(t_pi, t2); }
};

/// One cell: u = 2 pi Delta / Omega, v = gamma t_cyc with t_cyc = 1/(2 Delta) + t_wall.
struct HeatmapCell {
    double delta_tls;
    double gamma;
    double t_cyc;
    double p_err;
    double blind;
    double active;
    double log_ratio;
};

inline HeatmapCell improvement_cell(double u, double v, const HeatmapParams &hp) {
    if (!(u > 0.0) || !(v >= 0.0)) throw std::invalid_argument("improvement_cell: need u > 0, v >= 0");
    HeatmapCell c{};
    c.delta_tls = u * hp.omega() / kTwoPi;
    c.t_cyc = 0.5 / c.delta_tls + hp.t_wall;
    c.gamma = v / c.t_cyc;
    c.p_err = p_err_bandwidth(c.delta_tls, c.gamma, hp.alpha, hp.t2, hp.t_wall).expanded;
    c.blind = hp.floor() + u * u / 4.0;
    c.active = hp.floor() + c.p_err * u * u;
    c.log_ratio = std::log10(c.blind / c.active);
    return c;
}

struct ImprovementMap {
    std::vector<double> u; // 2 pi Delta / Omega
    std::vector<double> v; // gamma t_cyc
    std::vector<std::vector<HeatmapCell>> cells; // cells[i][j] at (u[i], v[j])
    std::vector<double> zero_contour_v; // per u: interpolated v where log_ratio crosses 0 (NaN if none)
};

inline ImprovementMap improvement_map(const GridAxis &u_axis, const GridAxis &v_axis, const HeatmapParams &hp) {
    ImprovementMap m;
    m.u = u_axis.values();
    m.v = v_axis.values();
    for (double u : m.u) {
        std::vector<HeatmapCell> row;
        row.reserve(m.v.size());
        for (double v : m.v) row.push_back(improvement_cell(u, v, hp));
        double crossing = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 1; j < row.size(); ++j) {
            const double a = row[j - 1].log_ratio, b = row[j].log_ratio;
            if ((a > 0.0) != (b > 0.0)) {
                const double f = a / (a - b);
                crossing = m.v[j - 1] + f * (m.v[j] - m.v[j - 1]);
                break;
            }
        }
        m.zero_contour_v.push_back(crossing);
        m.cells.push_back(std::move(row));
    }
    return m;
}

/// gamma at which the expanded budget reaches p_err = 1/4 (negative: never profitable).
inline double break_even_gamma(double delta_tls, double alpha, double t2, double t_wall) {
    const double rhs = 0.5 - (1.0 - alpha) - 0.5 / (delta_tls * t2);
    return rhs / (0.25 / delta_tls + t_wall);
}

} // namespace bistable::analytics
