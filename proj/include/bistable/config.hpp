// Run configuration: JSON schema, defaults and validation
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "analytics.hpp"
#include "benchmarking.hpp"
#include "protocol.hpp"
#include "qubit.hpp"
#include "telegraph.hpp"

namespace bistable {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> &experiment_names() {
    static const std::vector<std::string> names = {"syndrome-sweep", "ramsey", "mitigate", "rb", "heatmap", "perr", "ak"};
    return names;
}

// =============================================================================
// Experiment parameter blocks
// =============================================================================

struct SyndromeSweepParams {
    std::vector<double> gammas = {0.0, 2.5e3, 5e3, 7.5e3, 1e4, 1.25e4}; // 1/s
    long cycles = 1000000;
    double tau = 0.0; // 0: tau_opt
};

struct RamseyParams {
    double tau_lo = 0.0;
    double tau_hi = 4e-6;
    int points = 50;
    int shots = 400;
    double virtual_detuning = 2e6;
    double fc_offset = 0.0; // f_c - f_high
};

struct MitigateParams {
    int m = 50;
    int n = 10;
    int rows = 1;
    int block = 1;
    double tau_lo = 0.0;
    double tau_hi = 4e-6;
    double det_nofb = 2e6;
    double det_fb = 2.33e6;
    double tau_syndrome = 0.0; // 0: tau_opt
};

struct RbParams {
    std::vector<int> depths = RbConfig::power_of_two_depths(11);
    int n_sequences = 100;
    int shots_per_sequence = 1;
    int windows = 10;
    bool exact_survival = false;
    double injected_depolarizing = 0.0;
    std::string policy = "syndrome"; // syndrome | random | oracle
    std::string reference = "high";  // high | mid
    double tau_syndrome = 0.0;
};

struct HeatmapConfig {
    analytics::HeatmapParams params;
    analytics::GridAxis u{1e-3, 1.0, 61, true};
    analytics::GridAxis v{1e-4, 1.0, 61, true};
};

struct PerrParams {
    std::vector<double> gammas = {0.0, 1e3, 3e3, 1e4, 3e4, 1e5};
    std::vector<double> t_walls = {0.0, 2e-6, 8e-6, 20e-6};
    double t2 = 0.0; // 0: qubit T2
};

struct AkParams {
    double gamma = 2e5;
    double t_max = 0.0; // 0: 3 / Delta
    int points = 121;
    long trajectories = 100000;
};

/**
 * @brief Fully resolved run configuration.
 *
 * Qubit keys use natural units: delta_tls (Hz) and t_pi (s) set
 * f_low and the Rabi rate.
 */
struct RunConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    int replicas = 1;
    std::string out_dir = "out";
    QubitParams qubit;
    TelegraphParams tls = TelegraphParams::symmetric(0.1); // mean dwell 20 s
    std::optional<Mode> pinned;
    bool finite_pulses = false;

    SyndromeSweepParams syndrome_sweep;
    RamseyParams ramsey;
    MitigateParams mitigate;
    RbParams rb;
    HeatmapConfig heatmap;
    PerrParams perr;
    AkParams ak;

    Environment environment() const { return {qubit, tls, pinned, finite_pulses}; }
    double tau_opt() const { return analytics::tau_opt(qubit.delta_tls(), qubit.t2()); }
};

// =============================================================================
// Parsing helpers
// =============================================================================

namespace detail {

inline void check_keys(const json &obj, const std::string &where, const std::set<std::string> &allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto &[k, v] : obj.items()) {
        (void)v;
        if (!allowed.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

template <typename T>
void read(const json &obj, const std::string &where, const char *key, T &out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception &) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline void require(bool ok, const std::string &key, const std::string &constraint) {
    if (!ok) throw ConfigError(key + ": " + constraint);
}

inline void read_axis(const json &obj, const std::string &where, analytics::GridAxis &axis) {
    check_keys(obj, where, {"lo", "hi", "n", "log"});
    read(obj, where, "lo", axis.lo);
    read(obj, where, "hi", axis.hi);
    read(obj, where, "n", axis.n);
    read(obj, where, "log", axis.log);
    require(axis.n >= 1, where + ".n", "must be >= 1");
    require(axis.hi >= axis.lo, where + ".hi", "must be >= lo");
    require(!axis.log || axis.lo > 0.0, where + ".lo", "must be positive on a log axis");
}

inline json axis_json(const analytics::GridAxis &a) { return {{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}, {"log", a.log}}; }

} // namespace detail

// =============================================================================
// parse_config
// =============================================================================

inline RunConfig parse_config(const json &doc) {
    using detail::check_keys;
    using detail::read;
    using detail::require;
    check_keys(doc, "", {"experiment", "seed", "replicas", "out", "qubit", "tls", "finite_pulses", "syndrome_sweep",
                         "ramsey", "mitigate", "rb", "heatmap", "perr", "ak"});
    RunConfig c;
    read(doc, "", "experiment", c.experiment);
    require(!c.experiment.empty(), "experiment", "must name one of syndrome-sweep, ramsey, mitigate, rb, heatmap, perr, ak");
    {
        bool known = false;
        for (const auto &n : experiment_names()) known = known || n == c.experiment;
        require(known, "experiment", "unknown experiment '" + c.experiment + "'");
    }
    read(doc, "", "seed", c.seed);
    read(doc, "", "replicas", c.replicas);
    require(c.replicas >= 1, "replicas", "must be >= 1");
    read(doc, "", "out", c.out_dir);
    read(doc, "", "finite_pulses", c.finite_pulses);

    if (doc.contains("qubit")) {
        const json &q = doc["qubit"];
        check_keys(q, "qubit", {"f_high", "f_low", "delta_tls", "t_pi", "t1", "t_phi", "eps_0to1", "eps_1to0",
                                "t_readout", "t_reset", "t_gate"});
        require(!(q.contains("f_low") && q.contains("delta_tls")), "qubit.f_low", "give either f_low or delta_tls, not both");
        double delta = c.qubit.delta_tls();
        read(q, "qubit", "f_high", c.qubit.f_high);
        read(q, "qubit", "delta_tls", delta);
        c.qubit.f_low = c.qubit.f_high - delta;
        read(q, "qubit", "f_low", c.qubit.f_low);
        double t_pi = c.qubit.t_pi();
        read(q, "qubit", "t_pi", t_pi);
        require(t_pi > 0.0, "qubit.t_pi", "must be positive");
        c.qubit.rabi_rate = kPi / t_pi;
        read(q, "qubit", "t1", c.qubit.t1);
        read(q, "qubit", "t_phi", c.qubit.t_phi);
        read(q, "qubit", "eps_0to1", c.qubit.readout_eps_0to1);
        read(q, "qubit", "eps_1to0", c.qubit.readout_eps_1to0);
        read(q, "qubit", "t_readout", c.qubit.t_readout);
        read(q, "qubit", "t_reset", c.qubit.t_reset);
        read(q, "qubit", "t_gate", c.qubit.t_gate);
    }
    require(c.qubit.f_low < c.qubit.f_high, "qubit.f_low", "must be below f_high (delta_tls > 0)");
    try {
        c.qubit.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }

    if (doc.contains("tls")) {
        const json &t = doc["tls"];
        check_keys(t, "tls", {"gamma", "gamma_hl", "gamma_lh", "pinned"});
        if (t.contains("gamma")) {
            require(!t.contains("gamma_hl") && !t.contains("gamma_lh"), "tls.gamma", "give gamma or gamma_hl/gamma_lh");
            double g = 0.0;
            read(t, "tls", "gamma", g);
            c.tls = TelegraphParams::symmetric(g);
        }
        read(t, "tls", "gamma_hl", c.tls.gamma_hl);
        read(t, "tls", "gamma_lh", c.tls.gamma_lh);
        require(c.tls.gamma_hl >= 0.0 && c.tls.gamma_lh >= 0.0, "tls.gamma", "rates must be nonnegative");
        if (t.contains("pinned") && !t["pinned"].is_null()) {
            std::string p;
            read(t, "tls", "pinned", p);
            require(p == "H" || p == "L", "tls.pinned", "must be \"H\", \"L\" or null");
            c.pinned = p == "H" ? Mode::H : Mode::L;
        }
    }

    if (doc.contains("syndrome_sweep")) {
        const json &s = doc["syndrome_sweep"];
        check_keys(s, "syndrome_sweep", {"gammas", "cycles", "tau"});
        read(s, "syndrome_sweep", "gammas", c.syndrome_sweep.gammas);
        read(s, "syndrome_sweep", "cycles", c.syndrome_sweep.cycles);
        read(s, "syndrome_sweep", "tau", c.syndrome_sweep.tau);
    }
    require(!c.syndrome_sweep.gammas.empty(), "syndrome_sweep.gammas", "must be nonempty");
    for (double g : c.syndrome_sweep.gammas) require(g >= 0.0, "syndrome_sweep.gammas", "must be nonnegative");
    require(c.syndrome_sweep.cycles >= 1, "syndrome_sweep.cycles", "must be >= 1");
    require(c.syndrome_sweep.tau >= 0.0, "syndrome_sweep.tau", "must be nonnegative");

    if (doc.contains("ramsey")) {
        const json &r = doc["ramsey"];
        check_keys(r, "ramsey", {"tau_lo", "tau_hi", "points", "shots", "virtual_detuning", "fc_offset"});
        read(r, "ramsey", "tau_lo", c.ramsey.tau_lo);
        read(r, "ramsey", "tau_hi", c.ramsey.tau_hi);
        read(r, "ramsey", "points", c.ramsey.points);
        read(r, "ramsey", "shots", c.ramsey.shots);
        read(r, "ramsey", "virtual_detuning", c.ramsey.virtual_detuning);
        read(r, "ramsey", "fc_offset", c.ramsey.fc_offset);
    }
    require(c.ramsey.tau_lo >= 0.0 && c.ramsey.tau_hi >= c.ramsey.tau_lo, "ramsey.tau_hi", "need 0 <= tau_lo <= tau_hi");
    require(c.ramsey.points >= 1, "ramsey.points", "must be >= 1");
    require(c.ramsey.shots >= 1, "ramsey.shots", "must be >= 1");

    if (doc.contains("mitigate")) {
        const json &m = doc["mitigate"];
        check_keys(m, "mitigate", {"m", "n", "rows", "block", "tau_lo", "tau_hi", "det_nofb", "det_fb", "tau_syndrome"});
        read(m, "mitigate", "m", c.mitigate.m);
        read(m, "mitigate", "n", c.mitigate.n);
        read(m, "mitigate", "rows", c.mitigate.rows);
        read(m, "mitigate", "block", c.mitigate.block);
        read(m, "mitigate", "tau_lo", c.mitigate.tau_lo);
        read(m, "mitigate", "tau_hi", c.mitigate.tau_hi);
        read(m, "mitigate", "det_nofb", c.mitigate.det_nofb);
        read(m, "mitigate", "det_fb", c.mitigate.det_fb);
        read(m, "mitigate", "tau_syndrome", c.mitigate.tau_syndrome);
    }
    require(c.mitigate.m >= 1, "mitigate.m", "must be >= 1");
    require(c.mitigate.n >= 1, "mitigate.n", "must be >= 1");
    require(c.mitigate.rows >= 1, "mitigate.rows", "must be >= 1");
    require(c.mitigate.block >= 1, "mitigate.block", "must be >= 1");
    require(c.mitigate.tau_lo >= 0.0 && c.mitigate.tau_hi >= c.mitigate.tau_lo, "mitigate.tau_hi",
            "need 0 <= tau_lo <= tau_hi");
    require(c.mitigate.tau_syndrome >= 0.0, "mitigate.tau_syndrome", "must be nonnegative");

    if (doc.contains("rb")) {
        const json &r = doc["rb"];
        check_keys(r, "rb", {"depths", "n_sequences", "shots_per_sequence", "windows", "exact_survival",
                             "injected_depolarizing", "policy", "reference", "tau_syndrome"});
        read(r, "rb", "depths", c.rb.depths);
        read(r, "rb", "n_sequences", c.rb.n_sequences);
        read(r, "rb", "shots_per_sequence", c.rb.shots_per_sequence);
        read(r, "rb", "windows", c.rb.windows);
        read(r, "rb", "exact_survival", c.rb.exact_survival);
        read(r, "rb", "injected_depolarizing", c.rb.injected_depolarizing);
        read(r, "rb", "policy", c.rb.policy);
        read(r, "rb", "reference", c.rb.reference);
        read(r, "rb", "tau_syndrome", c.rb.tau_syndrome);
    }
    require(c.rb.policy == "syndrome" || c.rb.policy == "random" || c.rb.policy == "oracle", "rb.policy",
            "must be syndrome, random or oracle");
    require(c.rb.reference == "high" || c.rb.reference == "mid", "rb.reference", "must be high or mid");
    require(c.rb.tau_syndrome >= 0.0, "rb.tau_syndrome", "must be nonnegative");

    if (doc.contains("heatmap")) {
        const json &h = doc["heatmap"];
        check_keys(h, "heatmap", {"alpha", "t_pi", "t2", "t_wall", "u", "v"});
        read(h, "heatmap", "alpha", c.heatmap.params.alpha);
        read(h, "heatmap", "t_pi", c.heatmap.params.t_pi);
        read(h, "heatmap", "t2", c.heatmap.params.t2);
        read(h, "heatmap", "t_wall", c.heatmap.params.t_wall);
        if (h.contains("u")) detail::read_axis(h["u"], "heatmap.u", c.heatmap.u);
        if (h.contains("v")) detail::read_axis(h["v"], "heatmap.v", c.heatmap.v);
    }
    require(c.heatmap.params.alpha > 0.0 && c.heatmap.params.alpha <= 1.0, "heatmap.alpha", "must lie in (0, 1]");
    require(c.heatmap.params.t_pi > 0.0, "heatmap.t_pi", "must be positive");
    require(c.heatmap.params.t2 > 0.0, "heatmap.t2", "must be positive");
    require(c.heatmap.params.t_wall >= 0.0, "heatmap.t_wall", "must be nonnegative");
    require(c.heatmap.u.lo > 0.0, "heatmap.u.lo", "must be positive");

    if (doc.contains("perr")) {
        const json &p = doc["perr"];
        check_keys(p, "perr", {"gammas", "t_walls", "t2"});
        read(p, "perr", "gammas", c.perr.gammas);
        read(p, "perr", "t_walls", c.perr.t_walls);
        read(p, "perr", "t2", c.perr.t2);
    }
    for (double g : c.perr.gammas) require(g >= 0.0, "perr.gammas", "must be nonnegative");
    for (double t : c.perr.t_walls) require(t >= 0.0, "perr.t_walls", "must be nonnegative");
    require(c.perr.t2 >= 0.0, "perr.t2", "must be nonnegative");

    if (doc.contains("ak")) {
        const json &a = doc["ak"];
        check_keys(a, "ak", {"gamma", "t_max", "points", "trajectories"});
        read(a, "ak", "gamma", c.ak.gamma);
        read(a, "ak", "t_max", c.ak.t_max);
        read(a, "ak", "points", c.ak.points);
        read(a, "ak", "trajectories", c.ak.trajectories);
    }
    require(c.ak.gamma >= 0.0, "ak.gamma", "must be nonnegative");
    require(c.ak.t_max >= 0.0, "ak.t_max", "must be nonnegative");
    require(c.ak.points >= 2, "ak.points", "must be >= 2");
    require(c.ak.trajectories >= 1, "ak.trajectories", "must be >= 1");

    if (c.experiment == "rb") {
        RbConfig probe;
        probe.depths = c.rb.depths;
        probe.n_sequences = c.rb.n_sequences;
        probe.shots_per_sequence = c.rb.shots_per_sequence;
        probe.windows = c.rb.windows;
        probe.injected_depolarizing = c.rb.injected_depolarizing;
        probe.syndrome_tau = 1.0;
        try {
            probe.validate();
        } catch (const std::invalid_argument &e) {
            throw ConfigError(e.what());
        }
    }
    return c;
}

inline RunConfig parse_config(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

/// Echo of the resolved configuration in the same schema parse_config reads.
inline json to_json(const RunConfig &c) {
    json tls = {{"gamma_hl", c.tls.gamma_hl}, {"gamma_lh", c.tls.gamma_lh}};
    tls["pinned"] = c.pinned ? json(to_string(*c.pinned)) : json(nullptr);
    return {
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"replicas", c.replicas},
        {"out", c.out_dir},
        {"finite_pulses", c.finite_pulses},
        {"qubit",
         {{"f_high", c.qubit.f_high},
          {"delta_tls", c.qubit.delta_tls()},
          {"t_pi", c.qubit.t_pi()},
          {"t1", c.qubit.t1},
          {"t_phi", c.qubit.t_phi},
          {"eps_0to1", c.qubit.readout_eps_0to1},
          {"eps_1to0", c.qubit.readout_eps_1to0},
          {"t_readout", c.qubit.t_readout},
          {"t_reset", c.qubit.t_reset},
          {"t_gate", c.qubit.t_gate}}},
        {"tls", tls},
        {"syndrome_sweep",
         {{"gammas", c.syndrome_sweep.gammas}, {"cycles", c.syndrome_sweep.cycles}, {"tau", c.syndrome_sweep.tau}}},
        {"ramsey",
         {{"tau_lo", c.ramsey.tau_lo},
          {"tau_hi", c.ramsey.tau_hi},
          {"points", c.ramsey.points},
          {"shots", c.ramsey.shots},
          {"virtual_detuning", c.ramsey.virtual_detuning},
          {"fc_offset", c.ramsey.fc_offset}}},
        {"mitigate",
         {{"m", c.mitigate.m},
          {"n", c.mitigate.n},
          {"rows", c.mitigate.rows},
          {"block", c.mitigate.block},
          {"tau_lo", c.mitigate.tau_lo},
          {"tau_hi", c.mitigate.tau_hi},
          {"det_nofb", c.mitigate.det_nofb},
          {"det_fb", c.mitigate.det_fb},
          {"tau_syndrome", c.mitigate.tau_syndrome}}},
        {"rb",
         {{"depths", c.rb.depths},
          {"n_sequences", c.rb.n_sequences},
          {"shots_per_sequence", c.rb.shots_per_sequence},
          {"windows", c.rb.windows},
          {"exact_survival", c.rb.exact_survival},
          {"injected_depolarizing", c.rb.injected_depolarizing},
          {"policy", c.rb.policy},
          {"reference", c.rb.reference},
          {"tau_syndrome", c.rb.tau_syndrome}}},
        {"heatmap",
         {{"alpha", c.heatmap.params.alpha},
          {"t_pi", c.heatmap.params.t_pi},
          {"t2", c.heatmap.params.t2},
          {"t_wall", c.heatmap.params.t_wall},
          {"u", detail::axis_json(c.heatmap.u)},
          {"v", detail::axis_json(c.heatmap.v)}}},
        {"perr", {{"gammas", c.perr.gammas}, {"t_walls", c.perr.t_walls}, {"t2", c.perr.t2}}},
        {"ak", {{"gamma", c.ak.gamma}, {"t_max", c.ak.t_max}, {"points", c.ak.points}, {"trajectories", c.ak.trajectories}}},
    };
}

} // namespace bistable
