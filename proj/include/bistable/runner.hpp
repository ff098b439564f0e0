// Experiment orchestration, tabular output and run manifests
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "analytics.hpp"
#include "benchmarking.hpp"
#include "config.hpp"
#include "fit.hpp"
#include "protocol.hpp"
#include "random.hpp"

namespace bistable {

inline constexpr const char *kArtifactVersion = "1.0.0";

// =============================================================================
// Tables
// =============================================================================

inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <typename... Cells>
    void add(const Cells &...cells) {
        std::vector<std::string> row;
        (row.push_back(cell(cells)), ...);
        if (row.size() != header_.size()) throw std::logic_error("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::string str() const {
        std::string out;
        auto line = [&out](const std::vector<std::string> &r) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
            out += '\n';
        };
        line(header_);
        for (const auto &r : rows_) line(r);
        return out;
    }

    std::size_t rows() const { return rows_.size(); }

private:
    static std::string cell(const std::string &s) { return s; }
    static std::string cell(const char *s) { return s; }
    static std::string cell(double v) { return fmt_num(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    template <typename I>
        requires std::is_integral_v<I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

struct OutputFile {
    std::string name;
    std::string content;
};

struct RunOutput {
    std::vector<OutputFile> files; // data tables; summary.json is appended by write_run
    json summary;
};

inline std::string fnv1a_hex(const std::string &bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_string(bytes)));
    return buf;
}

/// Runs fn(replica) for every replica on a small thread pool; results keep replica order.
template <typename T>
std::vector<T> run_replicas(int replicas, const std::function<T(int)> &fn) {
    std::vector<T> out(static_cast<std::size_t>(replicas));
    const int workers = std::max(1, std::min<int>(replicas, static_cast<int>(std::thread::hardware_concurrency())));
    if (workers == 1) {
        for (int r = 0; r < replicas; ++r) out[static_cast<std::size_t>(r)] = fn(r);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int r = w; r < replicas; r += workers) out[static_cast<std::size_t>(r)] = fn(r);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

// =============================================================================
// Fringe analysis
// =============================================================================

struct BeatingAnalysis {
    ToneFit fit;
    double node = 0.0;          // 1 / (2 |f1 - f2|)
    double expected_node = 0.0; // 1 / (2 Delta)
    double relative_error = 0.0;
};

/// Two-tone fit of a fixed-frame fringe; the tones sit near det and det + Delta.
inline BeatingAnalysis analyze_beating(std::span<const double> taus, std::span<const double> p, double det,
                                       double delta_tls) {
    BeatingAnalysis a;
    const double lo = std::max(det - 1.0e6, 1e4), hi = det + 1.5e6;
    a.fit = fit_two_tone(taus, p, lo, hi, 1e4, 1e5);
    a.node = a.fit.envelope_node();
    a.expected_node = 0.5 / delta_tls;
    a.relative_error = std::abs(a.node - a.expected_node) / a.expected_node;
    return a;
}

struct SuppressionAnalysis {
    ToneFit fit;
    double ratio_minus = 0.0; // side tone at f - Delta over main amplitude
    double ratio_plus = 0.0;
    double second_ratio = 0.0; // larger of the two
};

/// Single damped cosine near det, then side-tone amplitudes at +-Delta.
inline SuppressionAnalysis analyze_suppression(std::span<const double> taus, std::span<const double> p, double det,
                                               double delta_tls) {
    SuppressionAnalysis a;
    a.fit = fit_single_tone(taus, p, std::max(det - 1.0e6, 1e4), det + 1.0e6, 5e3);
    const double offsets[] = {-delta_tls, delta_tls};
    const auto r = sideband_ratios(taus, p, a.fit.frequencies[0], a.fit.decay_rate, offsets);
    a.ratio_minus = r[0];
    a.ratio_plus = r[1];
    a.second_ratio = std::max(r[0], r[1]);
    return a;
}

inline json tone_json(const ToneFit &f) {
    return {{"offset", f.offset},
            {"amplitudes", f.amplitudes},
            {"frequencies_hz", f.frequencies},
            {"phases_rad", f.phases},
            {"decay_rate_per_s", f.decay_rate},
            {"rss", f.rss}};
}

inline json fit_json(const FitResult &f) {
    return {{"A", f.amplitude},      {"p", f.decay},          {"B", f.offset},          {"se_A", f.se_amplitude},
            {"se_p", f.se_decay},    {"se_B", f.se_offset},   {"r_clifford", f.r_clifford}, {"r_native", f.r_native},
            {"se_r_native", f.se_r_native}, {"ok", f.ok},     {"message", f.message}};
}

inline json series_json(const SeriesSummary &s) {
    return {{"mean", s.mean}, {"se", s.se}, {"min", s.min}, {"max", s.max}, {"windows_used", s.used}, {"windows_flagged", s.flagged}};
}

// =============================================================================
// Experiments
// =============================================================================

namespace experiments {

inline json derived_json(const RunConfig &c) {
    const auto &q = c.qubit;
    return {{"delta_tls_hz", q.delta_tls()},
            {"t2_s", q.t2()},
            {"alpha", q.alpha()},
            {"t_pi_s", q.t_pi()},
            {"t_wall_s", q.t_wall()},
            {"tau_opt_s", c.tau_opt()},
            {"tau_opt_limit_s", 0.5 / q.delta_tls()},
            {"p_err_static", analytics::p_err_static(q.delta_tls(), q.t2(), q.alpha())}};
}

inline RunOutput syndrome_sweep(const RunConfig &c) {
    const auto &q = c.qubit;
    const StreamFactory streams(c.seed);
    const double tau = c.syndrome_sweep.tau > 0.0 ? c.syndrome_sweep.tau : c.tau_opt();
    const auto decoder = SyndromeDecoder::calibrate(q, tau);
    const double static_p = analytics::p_err_static(q.delta_tls(), q.t2(), q.alpha());

    CsvTable table({"gamma_hz", "gamma_t_wall", "replica", "cycles", "errors", "p_err", "se_p_err", "p_err_static",
                    "p_err_bw_exact", "p_err_bw_expanded"});
    json per_gamma = json::array();
    std::vector<double> xs, ys_sim, ys_exact;
    for (std::size_t gi = 0; gi < c.syndrome_sweep.gammas.size(); ++gi) {
        const double g = c.syndrome_sweep.gammas[gi];
        const auto bw = analytics::p_err_bandwidth(q.delta_tls(), g, q.alpha(), q.t2(), q.t_wall());
        const auto stats = run_replicas<SyndromeStats>(c.replicas, [&](int r) {
            Environment env = c.environment();
            env.tls = TelegraphParams::symmetric(g);
            if (env.pinned || g > 0.0) {
                Plant<Philox> plant(env, streams.stream("syn-tls", gi, r), streams.stream("syn-shot", gi, r));
                return run_syndrome_cycles(plant, decoder, c.syndrome_sweep.cycles);
            }
            // frozen TLS: half the cycles in each mode
            SyndromeStats s;
            for (Mode m : {Mode::H, Mode::L}) {
                env.pinned = m;
                Plant<Philox> plant(env, streams.stream("syn-tls", gi, r, xi_of(m)),
                                    streams.stream("syn-shot", gi, r, xi_of(m)));
                const long n = m == Mode::H ? c.syndrome_sweep.cycles / 2 : c.syndrome_sweep.cycles - c.syndrome_sweep.cycles / 2;
                s += run_syndrome_cycles(plant, decoder, n);
            }
            return s;
        });
        SyndromeStats pooled;
        for (std::size_t r = 0; r < stats.size(); ++r) {
            pooled += stats[r];
            table.add(g, g * q.t_wall(), static_cast<int>(r), stats[r].cycles, stats[r].errors, stats[r].p_err(),
                      stats[r].se(), static_p, bw.exact, bw.expanded);
        }
        per_gamma.push_back({{"gamma_hz", g},
                             {"p_err", pooled.p_err()},
                             {"se", pooled.se()},
                             {"cycles", pooled.cycles},
                             {"p_err_bw_exact", bw.exact},
                             {"p_err_bw_expanded", bw.expanded}});
        xs.push_back(g * q.t_wall());
        ys_sim.push_back(pooled.p_err());
        ys_exact.push_back(bw.exact);
    }
    auto slope = [&](const std::vector<double> &y) {
        const double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) sx += xs[i], sy += y[i], sxx += xs[i] * xs[i], sxy += xs[i] * y[i];
        const double den = n * sxx - sx * sx;
        return den > 0 ? (n * sxy - sx * sy) / den : 0.0;
    };
    RunOutput out;
    out.files.push_back({"syndrome_sweep.csv", table.str()});
    out.summary = {{"tau_s", tau},
                   {"p_err_static", static_p},
                   {"gammas", per_gamma},
                   {"slope_sim", slope(ys_sim)},
                   {"slope_exact", slope(ys_exact)}};
    return out;
}

inline RunOutput ramsey(const RunConfig &c) {
    const auto &q = c.qubit;
    const auto &rp = c.ramsey;
    const StreamFactory streams(c.seed);
    const auto taus = MitigationConfig::linear_grid(rp.tau_lo, rp.tau_hi, rp.points);
    struct Rows {
        std::vector<double> p, t;
    };
    const auto reps = run_replicas<Rows>(c.replicas, [&](int r) {
        Plant<Philox> plant(c.environment(), streams.stream("ramsey-tls", r), streams.stream("ramsey-shot", r));
        ControllerState ctrl = initial_controller(q);
        ctrl.f_c = q.f_high + rp.fc_offset;
        Rows rows;
        for (double tau : taus) {
            int ones = 0;
            for (int s = 0; s < rp.shots; ++s) ones += ramsey_cycle(plant, ctrl, tau, rp.virtual_detuning);
            rows.p.push_back(static_cast<double>(ones) / rp.shots);
            rows.t.push_back(plant.now());
        }
        return rows;
    });
    CsvTable table({"replica", "col", "tau_s", "p_one", "lab_time_s", "model_p_one_h", "model_p_one_l"});
    std::vector<double> mean(taus.size(), 0.0);
    for (std::size_t r = 0; r < reps.size(); ++r)
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const double df = rp.fc_offset + rp.virtual_detuning;
            table.add(static_cast<int>(r), static_cast<int>(i), taus[i], reps[r].p[i], reps[r].t[i],
                      analytics::ramsey_likelihood(1, 0, taus[i], df, q), analytics::ramsey_likelihood(1, 1, taus[i], df, q));
            mean[i] += reps[r].p[i] / static_cast<double>(reps.size());
        }
    RunOutput out;
    out.files.push_back({"ramsey.csv", table.str()});
    out.summary = {{"shots_per_point", rp.shots * c.replicas}};
    if (taus.size() >= 8) {
        const auto beat = analyze_beating(taus, mean, rp.fc_offset + rp.virtual_detuning, q.delta_tls());
        out.summary["two_tone_fit"] = tone_json(beat.fit);
        out.summary["node_s"] = beat.node;
        out.summary["expected_node_s"] = beat.expected_node;
    }
    return out;
}

inline RunOutput mitigate(const RunConfig &c) {
    const auto &q = c.qubit;
    const auto &mp = c.mitigate;
    const StreamFactory streams(c.seed);
    MitigationConfig cfg;
    cfg.m = mp.m;
    cfg.n = mp.n;
    cfg.rows = mp.rows;
    cfg.block = mp.block;
    cfg.tau_grid = MitigationConfig::linear_grid(mp.tau_lo, mp.tau_hi, mp.m);
    cfg.det_nofb = mp.det_nofb;
    cfg.det_fb = mp.det_fb;
    const double tau_s = mp.tau_syndrome > 0.0 ? mp.tau_syndrome : c.tau_opt();
    const auto decoder = SyndromeDecoder::calibrate(q, tau_s);

    const auto reps = run_replicas<MitigationResult>(c.replicas, [&](int r) {
        Plant<Philox> plant(c.environment(), streams.stream("mit-tls", r), streams.stream("mit-shot", r));
        ControllerState ctrl = initial_controller(q);
        return run_mitigation(plant, ctrl, decoder, cfg);
    });

    CsvTable fringe({"replica", "arm", "row", "col", "tau_s", "p_one", "lab_time_s", "frac_l"});
    CsvTable trace({"replica", "index", "lab_time_s", "true_mode", "estimate"});
    std::vector<double> mean_nofb(cfg.tau_grid.size(), 0.0), mean_fb(cfg.tau_grid.size(), 0.0);
    long errors = 0, samples = 0;
    const double nrows = static_cast<double>(reps.size()) * cfg.rows;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        for (const auto &[arm, fm, acc] : {std::tuple{"no_feedback", &reps[r].no_feedback, &mean_nofb},
                                           std::tuple{"feedback", &reps[r].feedback, &mean_fb}}) {
            for (std::size_t row = 0; row < fm->rows.size(); ++row)
                for (std::size_t col = 0; col < fm->taus.size(); ++col) {
                    fringe.add(static_cast<int>(r), arm, static_cast<int>(row), static_cast<int>(col), fm->taus[col],
                               fm->rows[row][col], fm->cell_time[row][col], fm->cell_frac_l[row][col]);
                    (*acc)[col] += fm->rows[row][col] / nrows;
                }
        }
        for (std::size_t i = 0; i < reps[r].trace.size(); ++i) {
            const auto &s = reps[r].trace[i];
            trace.add(static_cast<int>(r), static_cast<long>(i), s.lab_time, to_string(s.true_mode), to_string(s.estimate));
            errors += s.true_mode != s.estimate;
            ++samples;
        }
    }
    RunOutput out;
    out.files.push_back({"fringe.csv", fringe.str()});
    out.files.push_back({"mode_trace.csv", trace.str()});
    out.summary = {{"tau_syndrome_s", tau_s},
                   {"shots_per_point", static_cast<long>(cfg.n) * cfg.rows * c.replicas},
                   {"syndrome_error_rate", samples ? static_cast<double>(errors) / static_cast<double>(samples) : 0.0}};
    if (cfg.tau_grid.size() >= 8) {
        const auto beat = analyze_beating(cfg.tau_grid, mean_nofb, cfg.det_nofb, q.delta_tls());
        const auto sup = analyze_suppression(cfg.tau_grid, mean_fb, cfg.det_fb, q.delta_tls());
        out.summary["no_feedback"] = {{"two_tone_fit", tone_json(beat.fit)},
                                      {"node_s", beat.node},
                                      {"expected_node_s", beat.expected_node},
                                      {"node_relative_error", beat.relative_error}};
        out.summary["feedback"] = {{"single_tone_fit", tone_json(sup.fit)},
                                   {"side_ratio_minus", sup.ratio_minus},
                                   {"side_ratio_plus", sup.ratio_plus},
                                   {"second_frequency_ratio", sup.second_ratio}};
    }
    return out;
}

inline RbConfig rb_config(const RunConfig &c) {
    RbConfig cfg;
    cfg.depths = c.rb.depths;
    cfg.n_sequences = c.rb.n_sequences;
    cfg.shots_per_sequence = c.rb.shots_per_sequence;
    cfg.windows = c.rb.windows;
    cfg.exact_survival = c.rb.exact_survival;
    cfg.injected_depolarizing = c.rb.injected_depolarizing;
    cfg.syndrome_tau = c.rb.tau_syndrome > 0.0 ? c.rb.tau_syndrome : c.tau_opt();
    cfg.policy = c.rb.policy == "oracle"   ? FeedbackPolicy::Oracle
                 : c.rb.policy == "random" ? FeedbackPolicy::RandomGuess
                                           : FeedbackPolicy::Syndrome;
    if (c.rb.reference == "mid") cfg.reference_fc = c.qubit.midpoint();
    return cfg;
}

inline RunOutput rb(const RunConfig &c) {
    const StreamFactory streams(c.seed);
    const RbConfig cfg = rb_config(c);
    const auto reps = run_replicas<RbResult>(
        c.replicas, [&](int r) { return run_rb_interleaved(c.environment(), cfg, streams, static_cast<std::uint64_t>(r)); });

    CsvTable windows({"replica", "window", "arm", "t_start_s", "t_end_s", "frac_l", "A", "p", "B", "r_clifford",
                      "r_native", "se_r_native", "fit_ok", "syndrome_error_rate"});
    CsvTable survival({"replica", "window", "arm", "depth", "survival"});
    RbResult pooled;
    for (std::size_t r = 0; r < reps.size(); ++r) {
        pooled.depths = reps[r].depths;
        pooled.gates_per_clifford = reps[r].gates_per_clifford;
        for (const auto &w : reps[r].windows) {
            pooled.windows.push_back(w);
            const double syn = w.syndrome_cycles ? static_cast<double>(w.syndrome_errors) / static_cast<double>(w.syndrome_cycles) : 0.0;
            for (const auto &[arm, a] : {std::pair{"no_feedback", &w.no_feedback}, std::pair{"feedback", &w.feedback}}) {
                windows.add(static_cast<int>(r), w.index, arm, w.t_start, w.t_end, a->frac_l, a->fit.amplitude,
                            a->fit.decay, a->fit.offset, a->fit.r_clifford, a->fit.r_native, a->fit.se_r_native,
                            a->fit.ok, syn);
                for (std::size_t d = 0; d < reps[r].depths.size(); ++d)
                    survival.add(static_cast<int>(r), w.index, arm, reps[r].depths[d], a->survival[d]);
            }
        }
    }
    const auto &q = c.qubit;
    RunOutput out;
    out.files.push_back({"rb_windows.csv", windows.str()});
    out.files.push_back({"rb_survival.csv", survival.str()});
    out.summary = {
        {"gates_per_clifford", pooled.gates_per_clifford},
        {"decoherence_floor_formula", q.t_gate * (1.0 / q.t1 + 1.0 / q.t_phi) / 3.0},
        {"no_feedback", series_json(summarize_windows(pooled, [](const RbWindow &w) -> const RbArmWindow & { return w.no_feedback; }))},
        {"feedback", series_json(summarize_windows(pooled, [](const RbWindow &w) -> const RbArmWindow & { return w.feedback; }))},
        {"note", "r_native = r_clifford / gates_per_clifford; the conversion depends on the Clifford decomposition"}};
    return out;
}

inline RunOutput heatmap(const RunConfig &c) {
    const auto map = analytics::improvement_map(c.heatmap.u, c.heatmap.v, c.heatmap.params);
    CsvTable cells({"u_2pi_delta_over_omega", "v_gamma_t_cyc", "delta_tls_hz", "gamma_hz", "t_cyc_s", "p_err",
                    "infidelity_blind", "infidelity_active", "log10_ratio"});
    CsvTable contour({"u_2pi_delta_over_omega", "v_zero_crossing"});
    int positive = 0;
    for (std::size_t i = 0; i < map.u.size(); ++i) {
        for (std::size_t j = 0; j < map.v.size(); ++j) {
            const auto &cell = map.cells[i][j];
            cells.add(map.u[i], map.v[j], cell.delta_tls, cell.gamma, cell.t_cyc, cell.p_err, cell.blind, cell.active,
                      cell.log_ratio);
            positive += cell.log_ratio > 0.0;
        }
        contour.add(map.u[i], map.zero_contour_v[i]);
    }
    const auto &hp = c.heatmap.params;
    const double u_ref = kTwoPi * c.qubit.delta_tls() / hp.omega();
    const auto reference_cell = analytics::improvement_cell(u_ref, 0.0, hp);
    RunOutput out;
    out.files.push_back({"heatmap.csv", cells.str()});
    out.files.push_back({"contour.csv", contour.str()});
    out.summary = {{"cells", map.u.size() * map.v.size()},
                   {"cells_improved", positive},
                   {"reference_cell", {{"u", u_ref}, {"log10_ratio", reference_cell.log_ratio}, {"p_err", reference_cell.p_err}}},
                   {"t_cyc_definition", "1/(2 delta_tls) + t_wall"}};
    return out;
}

inline RunOutput perr(const RunConfig &c) {
    const auto &q = c.qubit;
    const double t2 = c.perr.t2 > 0.0 ? c.perr.t2 : q.t2();
    const double static_p = analytics::p_err_static(q.delta_tls(), t2, q.alpha());
    CsvTable table({"gamma_hz", "t_wall_s", "p_err_static", "p_err_bw_expanded", "p_err_bw_exact"});
    for (double g : c.perr.gammas)
        for (double tw : c.perr.t_walls) {
            const auto bw = analytics::p_err_bandwidth(q.delta_tls(), g, q.alpha(), t2, tw);
            table.add(g, tw, static_p, bw.expanded, bw.exact);
        }
    const double tau = analytics::tau_opt(q.delta_tls(), t2);
    RunOutput out;
    out.files.push_back({"perr.csv", table.str()});
    out.summary = {{"t2_s", t2},
                   {"tau_opt_s", tau},
                   {"contrast_at_tau_opt", analytics::contrast(q.delta_tls(), tau, q.alpha(), t2)},
                   {"p_err_static", static_p},
                   {"p_err_quoted_in_experiment", 0.09}};
    return out;
}

inline RunOutput ak(const RunConfig &c) {
    const double delta = c.qubit.delta_tls();
    const double t_max = c.ak.t_max > 0.0 ? c.ak.t_max : 3.0 / delta;
    std::vector<double> times(static_cast<std::size_t>(c.ak.points));
    for (int i = 0; i < c.ak.points; ++i) times[static_cast<std::size_t>(i)] = t_max * i / (c.ak.points - 1);
    const StreamFactory streams(c.seed);
    const long per = c.ak.trajectories / c.replicas;
    const long extra = c.ak.trajectories % c.replicas;
    const auto tls = TelegraphParams::symmetric(c.ak.gamma);
    const auto parts = run_replicas<std::vector<std::complex<double>>>(c.replicas, [&](int r) {
        const long n = per + (r < extra ? 1 : 0);
        if (n == 0) return std::vector<std::complex<double>>(times.size());
        auto rng = streams.stream("ak", r);
        auto v = telegraph_phase_average(tls, kPi * delta, times, n, rng);
        for (auto &x : v) x *= static_cast<double>(n);
        return v;
    });
    std::vector<std::complex<double>> mc(times.size());
    for (const auto &p : parts)
        for (std::size_t i = 0; i < p.size(); ++i) mc[i] += p[i] / static_cast<double>(c.ak.trajectories);

    CsvTable table({"t_s", "c_eq_re", "c_eq_im", "c_plus_re", "c_plus_im", "c_minus_re", "c_minus_im", "delta_c_re",
                    "delta_c_im", "s_ak", "mc_re", "mc_im"});
    double worst = 0.0;
    bool overdamped = false;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto a = analytics::ak_coherence(times[i], delta, c.ak.gamma);
        overdamped = a.overdamped;
        table.add(times[i], a.c_eq.real(), a.c_eq.imag(), a.c_plus.real(), a.c_plus.imag(), a.c_minus.real(),
                  a.c_minus.imag(), a.delta_c.real(), a.delta_c.imag(), a.s_ak, mc[i].real(), mc[i].imag());
        worst = std::max(worst, std::abs(mc[i] - a.c_eq));
    }
    RunOutput out;
    out.files.push_back({"ak.csv", table.str()});
    out.summary = {{"gamma_hz", c.ak.gamma},
                   {"overdamped", overdamped},
                   {"trajectories", c.ak.trajectories},
                   {"max_abs_mc_minus_c_eq", worst}};
    return out;
}

} // namespace experiments

/// Runs the configured experiment without touching the filesystem.
inline RunOutput run_experiment(const RunConfig &c) {
    RunOutput out;
    if (c.experiment == "syndrome-sweep") out = experiments::syndrome_sweep(c);
    else if (c.experiment == "ramsey") out = experiments::ramsey(c);
    else if (c.experiment == "mitigate") out = experiments::mitigate(c);
    else if (c.experiment == "rb") out = experiments::rb(c);
    else if (c.experiment == "heatmap") out = experiments::heatmap(c);
    else if (c.experiment == "perr") out = experiments::perr(c);
    else if (c.experiment == "ak") out = experiments::ak(c);
    else throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");
    out.summary["experiment"] = c.experiment;
    out.summary["derived"] = experiments::derived_json(c);
    return out;
}

/**
 * @brief Runs and writes every table, summary.json and manifest.json into dir.
 *
 * Data files and the summary are deterministic for a fixed configuration;
 * the manifest also records wall time.
 */
inline json write_run(const RunConfig &c, const std::filesystem::path &dir) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutput out = run_experiment(c);
    out.files.push_back({"summary.json", out.summary.dump(2) + "\n"});
    std::filesystem::create_directories(dir);
    json files = json::array();
    for (const auto &f : out.files) {
        std::ofstream os(dir / f.name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + (dir / f.name).string());
        os << f.content;
        files.push_back({{"name", f.name}, {"bytes", f.content.size()}, {"fnv1a64", fnv1a_hex(f.content)}});
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json manifest = {{"artifact", "bistable"},
                     {"version", kArtifactVersion},
                     {"experiment", c.experiment},
                     {"seed", c.seed},
                     {"replicas", c.replicas},
                     {"wall_time_s", wall},
                     {"config", to_json(c)},
                     {"derived", experiments::derived_json(c)},
                     {"files", files}};
    std::ofstream os(dir / "manifest.json", std::ios::binary);
    os << manifest.dump(2) << "\n";
    return manifest;
}

} // namespace bistable
