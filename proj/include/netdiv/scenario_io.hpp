/**
 * @file scenario_io.hpp
 * @brief JSON scenario files and the CSV/snapshot writers.
 *
 * Scenario document (every section and key optional, unknown keys rejected):
 * @code
 * {
 *   "network":  {"synthetic": {"n_layer1": 570, "n_layer2": 554, "overlap": 0.886,
 *                              "attachment": 3, "seed": 7}}
 *            |  {"layers": ["twitter.txt", "friendfeed.txt"], "users": "users.txt"},
 *   "diversity": {"hbar": 3, "x": 10, "q": 1.0, "initial_algo": "degree_priority",
 *                 "flip_sweeps": 100},
 *   "attacker":  {"m3": 5, "m4": 10, "ini_comp": 10, "budget": null, "coverage": null},
 *   "defender":  {"strategy": "hybrid", "eta1": null, "eta2": 0.2, "fpr": 0.1, "fnr": 0.1,
 *                 "tau": 0.333333, "hybrid_union": false, "detection": "alert"},
 *   "run":       {"t_max": 500, "runs": 100, "seed": 1, "attacker_first": false}
 * }
 * @endcode
 * Relative layer/user paths resolve against the scenario file's directory.
 */
#pragma once

#include "netdiv/engine.hpp"
#include "netdiv/errors.hpp"
#include "netdiv/metrics.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <string>

namespace netdiv {

using json = nlohmann::json;

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown key '" + where + "." + it.key() + "'");
    }
}

template <class T>
void read(const json& obj, const char* key, const std::string& where, T& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

template <class T>
void read_opt(const json& obj, const char* key, const std::string& where, std::optional<T>& out) {
    if (!obj.contains(key)) return;
    if (obj.at(key).is_null()) {
        out.reset();
        return;
    }
    T value{};
    read(obj, key, where, value);
    out = value;
}

inline void read_count(const json& obj, const char* key, const std::string& where, std::size_t& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(where + "." + key + " must be a non-negative integer");
    out = v.get<std::size_t>();
}

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline Scenario scenario_from_json(const json& doc, const std::filesystem::path& base_dir = {}) {
    using namespace detail;
    check_keys(doc, "scenario", {"network", "diversity", "attacker", "defender", "run"});
    Scenario sc;
    sc.network.synthetic = SyntheticParams{};

    if (doc.contains("network")) {
        const auto& net = doc.at("network");
        check_keys(net, "network", {"synthetic", "layers", "users"});
        if (net.contains("synthetic") && net.contains("layers"))
            throw ConfigError("network: give either 'synthetic' or 'layers', not both");
        if (net.contains("layers")) {
            sc.network.synthetic.reset();
            std::vector<std::string> files;
            read(net, "layers", "network", files);
            for (const auto& f : files) sc.network.layer_files.push_back(base_dir / f);
            if (net.contains("users")) {
                std::string users;
                read(net, "users", "network", users);
                sc.network.users_file = base_dir / users;
            }
        } else if (net.contains("users")) {
            throw ConfigError("network.users requires network.layers");
        }
        if (net.contains("synthetic")) {
            const auto& syn = net.at("synthetic");
            check_keys(syn, "network.synthetic", {"n_layer1", "n_layer2", "overlap", "attachment", "seed"});
            auto& p = *sc.network.synthetic;
            read_count(syn, "n_layer1", "network.synthetic", p.n_layer1);
            read_count(syn, "n_layer2", "network.synthetic", p.n_layer2);
            read(syn, "overlap", "network.synthetic", p.overlap_fraction);
            read_count(syn, "attachment", "network.synthetic", p.attachment_degree);
            read(syn, "seed", "network.synthetic", p.seed);
        }
    }

    if (doc.contains("diversity")) {
        const auto& d = doc.at("diversity");
        check_keys(d, "diversity", {"hbar", "x", "q", "initial_algo", "flip_sweeps"});
        std::size_t hbar = sc.hbar, x = sc.x;
        read_count(d, "hbar", "diversity", hbar);
        read_count(d, "x", "diversity", x);
        sc.hbar = static_cast<std::uint32_t>(hbar);
        sc.x = static_cast<std::uint32_t>(x);
        read(d, "q", "diversity", sc.q);
        read_count(d, "flip_sweeps", "diversity", sc.run.flip_sweeps);
        if (d.contains("initial_algo")) {
            std::string name;
            read(d, "initial_algo", "diversity", name);
            auto algo = parse_initial_algorithm(name);
            if (!algo) throw ConfigError("diversity.initial_algo '" + name + "' is not one of random, color_flip, degree_priority");
            sc.defender.initial_algo = *algo;
        }
    }

    if (doc.contains("attacker")) {
        const auto& a = doc.at("attacker");
        check_keys(a, "attacker", {"m3", "m4", "ini_comp", "budget", "coverage"});
        read_count(a, "m3", "attacker", sc.attacker.m3);
        read_count(a, "m4", "attacker", sc.attacker.m4);
        read_count(a, "ini_comp", "attacker", sc.attacker.ini_comp);
        if (a.contains("budget") && !a.at("budget").is_null()) {
            std::size_t b = 0;
            read_count(a, "budget", "attacker", b);
            sc.attacker.budget = b;
        }
        read_opt(a, "coverage", "attacker", sc.attacker.coverage);
    }

    if (doc.contains("defender")) {
        const auto& d = doc.at("defender");
        check_keys(d, "defender", {"strategy", "eta1", "eta2", "fpr", "fnr", "tau", "hybrid_union", "detection"});
        if (d.contains("strategy")) {
            std::string name;
            read(d, "strategy", "defender", name);
            auto s = parse_strategy(name);
            if (!s) throw ConfigError("defender.strategy '" + name + "' is not one of monoculture, static, proactive, reactive, hybrid");
            sc.defender.strategy = *s;
        }
        read_opt(d, "eta1", "defender", sc.defender.eta1);
        read_opt(d, "eta2", "defender", sc.defender.eta2);
        read_opt(d, "fpr", "defender", sc.defender.fpr);
        read_opt(d, "fnr", "defender", sc.defender.fnr);
        read(d, "tau", "defender", sc.defender.tau);
        read(d, "hybrid_union", "defender", sc.defender.hybrid_union);
        if (d.contains("detection")) {
            std::string mode;
            read(d, "detection", "defender", mode);
            if (mode == "alert")
                sc.defender.detection = DetectionMode::Alert;
            else if (mode == "snapshot")
                sc.defender.detection = DetectionMode::Snapshot;
            else
                throw ConfigError("defender.detection '" + mode + "' is not one of alert, snapshot");
        }
    }

    if (doc.contains("run")) {
        const auto& r = doc.at("run");
        check_keys(r, "run", {"t_max", "runs", "seed", "attacker_first"});
        read(r, "t_max", "run", sc.run.t_max);
        read_count(r, "runs", "run", sc.run.runs);
        read(r, "seed", "run", sc.run.seed);
        read(r, "attacker_first", "run", sc.run.attacker_first);
    }
    return sc;
}

inline json scenario_to_json(const Scenario& sc) {
    using detail::opt_json;
    json doc;
    if (sc.network.synthetic) {
        const auto& p = *sc.network.synthetic;
        doc["network"]["synthetic"] = {{"n_layer1", p.n_layer1},
                                       {"n_layer2", p.n_layer2},
                                       {"overlap", p.overlap_fraction},
                                       {"attachment", p.attachment_degree},
                                       {"seed", p.seed}};
    } else {
        json layers = json::array();
        for (const auto& f : sc.network.layer_files) layers.push_back(f.string());
        doc["network"]["layers"] = layers;
        if (sc.network.users_file) doc["network"]["users"] = sc.network.users_file->string();
    }
    doc["diversity"] = {{"hbar", sc.hbar},
                        {"x", sc.x},
                        {"q", sc.q},
                        {"initial_algo", to_string(sc.defender.initial_algo)},
                        {"flip_sweeps", sc.run.flip_sweeps}};
    doc["attacker"] = {{"m3", sc.attacker.m3},
                       {"m4", sc.attacker.m4},
                       {"ini_comp", sc.attacker.ini_comp},
                       {"budget", opt_json(sc.attacker.budget)},
                       {"coverage", opt_json(sc.attacker.coverage)}};
    doc["defender"] = {{"strategy", to_string(sc.defender.strategy)},
                       {"eta1", opt_json(sc.defender.eta1)},
                       {"eta2", opt_json(sc.defender.eta2)},
                       {"fpr", opt_json(sc.defender.fpr)},
                       {"fnr", opt_json(sc.defender.fnr)},
                       {"tau", sc.defender.tau},
                       {"hybrid_union", sc.defender.hybrid_union},
                       {"detection", to_string(sc.defender.detection)}};
    doc["run"] = {{"t_max", sc.run.t_max},
                  {"runs", sc.run.runs},
                  {"seed", sc.run.seed},
                  {"attacker_first", sc.run.attacker_first}};
    return doc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return scenario_from_json(doc, path.parent_path());
}

/// Fixed-point formatting independent of stream state and locale.
inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline void write_trace_csv(std::ostream& out, const MeanTrace& trace) {
    out << "t,cc,vc,ic,oc,new_compromised\n";
    for (const auto& r : trace) {
        out << r.t << ',' << fixed6(r.cc) << ',' << fixed6(r.vc) << ',' << fixed6(r.ic) << ','
            << fixed6(r.oc) << ',' << fixed6(r.new_compromised) << '\n';
    }
}

inline void write_summary_header(std::ostream& out) { out << "strategy,tau,metric,value,censored\n"; }

inline void write_summary_rows(std::ostream& out, Strategy strategy, double tau, const MetricsReport& m) {
    const std::string head = std::string(to_string(strategy)) + ',' + fixed6(tau) + ',';
    out << head << "tts," << (m.tts ? std::to_string(*m.tts) : "NA") << ",0\n";
    if (m.asd)
        out << head << "asd," << m.asd->steps << ',' << (m.asd->censored ? 1 : 0) << '\n';
    else
        out << head << "asd,NA,0\n";
    out << head << "awd," << fixed6(m.awd) << ",0\n";
    out << head << "aoc," << fixed6(m.aoc) << ",0\n";
}

constexpr const char* to_string(NodeState s) noexcept {
    switch (s) {
        case NodeState::Vulnerable: return "vulnerable";
        case NodeState::Compromised: return "compromised";
        case NodeState::Invulnerable: return "invulnerable";
    }
    return "?";
}

inline void write_snapshot(std::ostream& out, const CommGraph& g, const DiversityConfig& config,
                           const SecurityState& state) {
    out << "id,program,impl,state\n";
    for (const auto& nd : g.nodes())
        out << nd.id << ',' << nd.program.index << ',' << config[nd.id] << ',' << to_string(state[nd.id]) << '\n';
}

}  // namespace netdiv
