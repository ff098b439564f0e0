// Nonlinear least squares, RB decay fits and Ramsey fringe analysis
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qubit.hpp"

namespace bistable {

// =============================================================================
// Levenberg-Marquardt
// =============================================================================

/// model(x, params, gradient_out) -> value; gradient_out has params.size() entries.
using ModelFn = std::function<double(double, const Eigen::VectorXd &, Eigen::Ref<Eigen::VectorXd>)>;

struct LsqResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance; // (J^T W J)^{-1}
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
    bool singular = false;
};

struct LmOptions {
    int max_iterations = 500;
    double tolerance = 1e-15;
    std::function<void(Eigen::VectorXd &)> project; // optional clamp after each step
};

inline LsqResult levenberg_marquardt(const ModelFn &model, std::span<const double> xs, std::span<const double> ys,
                                     std::span<const double> ws, Eigen::VectorXd p0, const LmOptions &opt = {}) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    const auto k = p0.size();
    Eigen::MatrixXd jac(n, k);
    Eigen::VectorXd res(n), grad(k);

    auto evaluate = [&](const Eigen::VectorXd &p, bool with_jac) {
        double chi2 = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = model(xs[static_cast<std::size_t>(i)], p, grad);
            res(i) = ys[static_cast<std::size_t>(i)] - v;
            if (with_jac) jac.row(i) = grad.transpose();
            chi2 += ws[static_cast<std::size_t>(i)] * res(i) * res(i);
        }
        return chi2;
    };

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = ws[static_cast<std::size_t>(i)];

    LsqResult out;
    Eigen::VectorXd p = std::move(p0);
    double chi2 = evaluate(p, true);
    double lambda = 1e-3;
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        const Eigen::MatrixXd jtwj = jac.transpose() * w.asDiagonal() * jac;
        const Eigen::VectorXd jtwr = jac.transpose() * w.asDiagonal() * res;
        bool improved = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd a = jtwj;
            for (Eigen::Index d = 0; d < k; ++d) a(d, d) += lambda * std::max(jtwj(d, d), 1e-300);
            Eigen::VectorXd step = a.ldlt().solve(jtwr);
            if (!step.allFinite()) {
                lambda *= 10;
                continue;
            }
            Eigen::VectorXd trial = p + step;
            if (opt.project) opt.project(trial);
            const double chi2_trial = evaluate(trial, false);
            if (std::isfinite(chi2_trial) && chi2_trial <= chi2) {
                const double drop = chi2 - chi2_trial;
                const double rel_step = (trial - p).norm() / (p.norm() + 1e-300);
                p = trial;
                chi2 = evaluate(p, true);
                lambda = std::max(lambda / 10, 1e-15);
                improved = true;
                if (drop <= opt.tolerance * (chi2 + 1e-300) || rel_step < 1e-14) out.converged = true;
                break;
            }
            lambda *= 10;
        }
        if (!improved) {
            out.converged = true; // no downhill step exists at machine precision
            break;
        }
        if (out.converged) break;
    }
    out.params = p;
    out.chi2 = chi2;
    const Eigen::MatrixXd jtwj = jac.transpose() * w.asDiagonal() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtwj);
    out.singular = !lu.isInvertible();
    out.covariance = out.singular ? Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN())
                                  : Eigen::MatrixXd(lu.inverse());
    return out;
}

/// Ordinary weighted linear least squares; returns coefficients and residual sum of squares.
inline std::pair<Eigen::VectorXd, double> linear_lsq(const Eigen::MatrixXd &basis, const Eigen::VectorXd &y) {
    Eigen::VectorXd c = basis.colPivHouseholderQr().solve(y);
    return {c, (basis * c - y).squaredNorm()};
}

// =============================================================================
// Randomized-benchmarking decay
// =============================================================================

struct FitResult {
    double amplitude = 0.0;
    double decay = 1.0;
    double offset = 0.0;
    double se_amplitude = 0.0;
    double se_decay = 0.0;
    double se_offset = 0.0;
    double r_clifford = 0.0;
    double se_r_clifford = 0.0;
    double r_native = 0.0;
    double se_r_native = 0.0;
    double gates_per_clifford = 1.0;
    bool ok = false;
    std::string message;
};

/**
 * @brief Weighted fit of A p^L + B.
 *
 * Weights are inverse variances. With an empty span the point estimate is
 * unweighted and the covariance is a sandwich estimate that assumes variances
 * proportional to s(1 - s) of the fitted curve, scaled by the residuals.
 * r = (1 - p)/2 is the
 * single-qubit depolarizing relation; r_native divides by gates_per_clifford.
 */
inline FitResult fit_exponential(std::span<const double> depths, std::span<const double> survivals,
                                 std::span<const double> weights, double gates_per_clifford) {
    FitResult out;
    out.gates_per_clifford = gates_per_clifford;
    const std::size_t n = depths.size();
    if (survivals.size() != n || (!weights.empty() && weights.size() != n)) {
        out.message = "size mismatch";
        return out;
    }
    std::vector<double> distinct(depths.begin(), depths.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) {
        out.message = "need at least 3 distinct depths";
        return out;
    }
    for (double s : survivals)
        if (!(s >= 0.0 && s <= 1.0)) {
            out.message = "survival outside [0,1]";
            return out;
        }
    if (!(gates_per_clifford > 0.0)) {
        out.message = "gates_per_clifford must be positive";
        return out;
    }

    const auto [lo, hi] = std::minmax_element(survivals.begin(), survivals.end());
    if (*hi - *lo <= 1e-12) {
        double mean = 0.0;
        for (double s : survivals) mean += s;
        out.offset = mean / static_cast<double>(n);
        out.ok = true;
        out.message = "flat data: p = 1";
        return out;
    }

    std::vector<double> w(n, 1.0);
    if (!weights.empty()) w.assign(weights.begin(), weights.end());

    // Initial guess: B = 0.5, A from the shallowest depth, p from a log-linear fit.
    const std::size_t first = static_cast<std::size_t>(std::min_element(depths.begin(), depths.end()) - depths.begin());
    double b0 = 0.5;
    double a0 = survivals[first] - b0;
    if (std::abs(a0) < 1e-6) a0 = 0.5;
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ratio = (survivals[i] - b0) / a0;
        if (ratio <= 1e-3) continue;
        sx += depths[i];
        sy += std::log(ratio);
        sxx += depths[i] * depths[i];
        sxy += depths[i] * std::log(ratio);
        ++cnt;
    }
    double p0 = 0.99;
    if (cnt >= 2 && sxx * cnt - sx * sx > 0) {
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        p0 = std::clamp(std::exp(slope), 1e-3, 1.0 - 1e-9);
    }

    const ModelFn model = [](double depth, const Eigen::VectorXd &p, Eigen::Ref<Eigen::VectorXd> g) {
        const double pl = std::pow(p(1), depth);
        g(0) = pl;
        g(1) = depth == 0.0 ? 0.0 : p(0) * depth * std::pow(p(1), depth - 1.0);
        g(2) = 1.0;
        return p(0) * pl + p(2);
    };
    LmOptions opt;
    opt.project = [](Eigen::VectorXd &p) { p(1) = std::clamp(p(1), 1e-6, 1.0 + 1e-6); };
    Eigen::VectorXd init(3);
    init << a0, p0, b0;
    const auto res = levenberg_marquardt(model, depths, survivals, w, init, opt);

    out.amplitude = res.params(0);
    out.decay = res.params(1);
    out.offset = res.params(2);
    if (res.singular || !res.covariance.allFinite()) {
        out.message = "singular normal equations";
        return out;
    }
    Eigen::MatrixXd cov = res.covariance;
    if (weights.empty() && n > 3) {
        // binomial-shaped variances: unit weights are unbiased but not efficient, so sandwich the covariance
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(n), 3);
        Eigen::VectorXd var(static_cast<Eigen::Index>(n));
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            Eigen::VectorXd g(3);
            const double s = model(depths[i], res.params, g);
            jac.row(row) = g.transpose();
            var(row) = std::max(s * (1.0 - s), 1e-4);
            scale += (survivals[i] - s) * (survivals[i] - s) / var(row);
        }
        scale /= static_cast<double>(n - 3);
        const Eigen::MatrixXd meat = jac.transpose() * (scale * var).asDiagonal() * jac;
        cov = res.covariance * meat * res.covariance;
    }
    out.se_amplitude = std::sqrt(cov(0, 0));
    out.se_decay = std::sqrt(cov(1, 1));
    out.se_offset = std::sqrt(cov(2, 2));
    if (out.decay > 1.0 && out.decay <= 1.0 + 1e-12) out.decay = 1.0;
    if (!(out.decay > 0.0 && out.decay <= 1.0)) {
        out.message = "decay outside (0,1]";
        return out;
    }
    if (!res.converged) {
        out.message = "did not converge";
        return out;
    }
    out.r_clifford = (1.0 - out.decay) / 2.0;
    out.se_r_clifford = out.se_decay / 2.0;
    out.r_native = out.r_clifford / gates_per_clifford;
    out.se_r_native = out.se_r_clifford / gates_per_clifford;
    out.ok = true;
    return out;
}

// =============================================================================
// Ramsey fringe analysis
// =============================================================================

namespace detail {
inline Eigen::MatrixXd tone_basis(std::span<const double> taus, std::span<const double> freqs, double decay_rate) {
    const auto n = static_cast<Eigen::Index>(taus.size());
    Eigen::MatrixXd b(n, 1 + 2 * static_cast<Eigen::Index>(freqs.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = taus[static_cast<std::size_t>(i)];
        const double env = std::exp(-decay_rate * t);
        b(i, 0) = 1.0;
        for (std::size_t j = 0; j < freqs.size(); ++j) {
            b(i, 1 + 2 * static_cast<Eigen::Index>(j)) = env * std::cos(kTwoPi * freqs[j] * t);
            b(i, 2 + 2 * static_cast<Eigen::Index>(j)) = env * std::sin(kTwoPi * freqs[j] * t);
        }
    }
    return b;
}

inline Eigen::VectorXd as_vector(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}
} // namespace detail

/// Frequency in [f_lo, f_hi] whose single tone best explains the data.
inline double periodogram_peak(std::span<const double> taus, std::span<const double> ys, double f_lo, double f_hi,
                               double step) {
    const Eigen::VectorXd y = detail::as_vector(ys);
    double best_f = f_lo, best_rss = std::numeric_limits<double>::infinity();
    for (double f = f_lo; f <= f_hi; f += step) {
        const double fr[] = {f};
        const double rss = linear_lsq(detail::tone_basis(taus, fr, 0.0), y).second;
        if (rss < best_rss) best_rss = rss, best_f = f;
    }
    return best_f;
}

/// B + sum_j A_j e^{-k tau} cos(2 pi f_j tau + phi_j)
struct ToneFit {
    double offset = 0.0;
    std::vector<double> amplitudes;
    std::vector<double> frequencies;
    std::vector<double> phases;
    double decay_rate = 0.0;
    double rss = 0.0;
    bool ok = false;

    /// First zero of the two-tone beating envelope.
    double envelope_node() const {
        return frequencies.size() == 2 ? 0.5 / std::abs(frequencies[1] - frequencies[0])
                                       : std::numeric_limits<double>::quiet_NaN();
    }
    double value(double t) const {
        double v = offset;
        for (std::size_t j = 0; j < amplitudes.size(); ++j)
            v += amplitudes[j] * std::exp(-decay_rate * t) * std::cos(kTwoPi * frequencies[j] * t + phases[j]);
        return v;
    }
};

/**
 * @brief Joint nonlinear fit of a sum of damped tones with a shared decay.
 *
 * Starts from linear amplitudes at the given frequencies; frequencies,
 * phases, amplitudes, offset and the decay rate are then refined together.
 */
inline ToneFit fit_tones(std::span<const double> taus, std::span<const double> ys, std::vector<double> freqs,
                         double decay_guess = 0.0) {
    ToneFit out;
    const std::size_t nt = freqs.size();
    const auto [coef, rss0] = linear_lsq(detail::tone_basis(taus, freqs, decay_guess), detail::as_vector(ys));
    // parameter layout: B, (A_j, f_j, phi_j)..., k
    Eigen::VectorXd p(static_cast<Eigen::Index>(2 + 3 * nt));
    p(0) = coef(0);
    for (std::size_t j = 0; j < nt; ++j) {
        const double c = coef(static_cast<Eigen::Index>(1 + 2 * j)), s = coef(static_cast<Eigen::Index>(2 + 2 * j));
        const auto base = static_cast<Eigen::Index>(1 + 3 * j);
        p(base) = std::hypot(c, s);
        p(base + 1) = freqs[j];
        p(base + 2) = std::atan2(-s, c);
    }
    p(p.size() - 1) = decay_guess;

    const ModelFn model = [nt](double t, const Eigen::VectorXd &p, Eigen::Ref<Eigen::VectorXd> g) {
        const double k = p(p.size() - 1);
        const double env = std::exp(-k * t);
        double v = p(0), tone_sum = 0.0;
        g(0) = 1.0;
        for (std::size_t j = 0; j < nt; ++j) {
            const auto base = static_cast<Eigen::Index>(1 + 3 * j);
            const double arg = kTwoPi * p(base + 1) * t + p(base + 2);
            const double c = std::cos(arg), s = std::sin(arg);
            g(base) = env * c;
            g(base + 1) = -p(base) * env * s * kTwoPi * t;
            g(base + 2) = -p(base) * env * s;
            tone_sum += p(base) * env * c;
        }
        v += tone_sum;
        g(p.size() - 1) = -t * tone_sum;
        return v;
    };
    LmOptions opt;
    opt.project = [](Eigen::VectorXd &p) { p(p.size() - 1) = std::max(p(p.size() - 1), 0.0); };
    const std::vector<double> w(taus.size(), 1.0);
    const auto res = levenberg_marquardt(model, taus, ys, w, p, opt);

    out.offset = res.params(0);
    for (std::size_t j = 0; j < nt; ++j) {
        const auto base = static_cast<Eigen::Index>(1 + 3 * j);
        double a = res.params(base), ph = res.params(base + 2);
        if (a < 0) a = -a, ph += kPi;
        out.amplitudes.push_back(a);
        out.frequencies.push_back(res.params(base + 1));
        out.phases.push_back(std::remainder(ph, kTwoPi));
    }
    out.decay_rate = res.params(res.params.size() - 1);
    out.rss = res.chi2;
    out.ok = res.params.allFinite();
    (void)rss0;
    return out;
}

/// Single damped cosine seeded by a periodogram scan.
inline ToneFit fit_single_tone(std::span<const double> taus, std::span<const double> ys, double f_lo, double f_hi,
                               double step) {
    return fit_tones(taus, ys, {periodogram_peak(taus, ys, f_lo, f_hi, step)});
}

/**
 * @brief Two-tone fit seeded by a brute-force grid over frequency pairs.
 *
 * Tones closer than min_separation are not considered at the seeding stage.
 */
inline ToneFit fit_two_tone(std::span<const double> taus, std::span<const double> ys, double f_lo, double f_hi,
                            double step, double min_separation) {
    const Eigen::VectorXd y = detail::as_vector(ys);
    double best_rss = std::numeric_limits<double>::infinity();
    std::vector<double> best = {f_lo, f_hi};
    for (double f1 = f_lo; f1 <= f_hi; f1 += step)
        for (double f2 = f1 + min_separation; f2 <= f_hi; f2 += step) {
            const std::vector<double> fr = {f1, f2};
            const double rss = linear_lsq(detail::tone_basis(taus, fr, 0.0), y).second;
            if (rss < best_rss) best_rss = rss, best = fr;
        }
    return fit_tones(taus, ys, best);
}

/**
 * @brief Amplitudes of side tones at main +- offsets relative to the main tone.
 *
 * The main tone frequency and decay come from a prior fit; the amplitudes of
 * all tones are then solved jointly by linear least squares.
 */
inline std::vector<double> sideband_ratios(std::span<const double> taus, std::span<const double> ys, double f_main,
                                           double decay_rate, std::span<const double> offsets) {
    std::vector<double> freqs = {f_main};
    for (double o : offsets) freqs.push_back(f_main + o);
    const auto [c, rss] = linear_lsq(detail::tone_basis(taus, freqs, decay_rate), detail::as_vector(ys));
    (void)rss;
    auto amp = [&](std::size_t j) {
        return std::hypot(c(static_cast<Eigen::Index>(1 + 2 * j)), c(static_cast<Eigen::Index>(2 + 2 * j)));
    };
    std::vector<double> out;
    for (std::size_t j = 1; j < freqs.size(); ++j) out.push_back(amp(j) / amp(0));
    return out;
}

} // namespace bistable
