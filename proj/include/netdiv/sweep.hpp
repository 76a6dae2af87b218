/**
 * @file sweep.hpp
 * @brief Cartesian parameter sweeps over a base scenario.
 *
 * Grid syntax: `key=start:stop:step` (inclusive stop) or `key=v1,v2,...`.
 * Cells are visited with the first axis outermost. Mean traces are memoized
 * on everything except tau, so a tau axis costs no extra simulation. Every
 * cell gets ASD against a monoculture baseline built from the same cell.
 */
#pragma once

#include "netdiv/engine.hpp"
#include "netdiv/errors.hpp"
#include "netdiv/metrics.hpp"
#include "netdiv/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace netdiv {

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

inline const std::vector<std::string>& sweep_keys() {
    static const std::vector<std::string> keys = {
        "defender.strategy", "defender.tau",       "defender.eta1",     "defender.eta2",
        "defender.fpr",      "defender.fnr",       "defender.detection", "diversity.q",
        "diversity.x",       "diversity.initial_algo", "attacker.m3",   "attacker.m4",
        "attacker.ini_comp", "attacker.budget",    "attacker.coverage", "run.t_max"};
    return keys;
}

namespace detail {

inline bool symbolic_key(const std::string& key) {
    return key == "defender.strategy" || key == "diversity.initial_algo" || key == "defender.detection";
}

inline bool integer_key(const std::string& key) {
    return key == "diversity.x" || key == "attacker.m3" || key == "attacker.m4" ||
           key == "attacker.ini_comp" || key == "attacker.budget" || key == "run.t_max";
}

inline double parse_number(const std::string& text, const std::string& key) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw ConfigError("sweep " + key + ": '" + text + "' is not a number");
    return v;
}

inline long long parse_integer(const std::string& text, const std::string& key) {
    const double v = parse_number(text, key);
    if (v < 0 || v != std::floor(v)) throw ConfigError("sweep " + key + ": '" + text + "' is not a non-negative integer");
    return static_cast<long long>(v);
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline SweepAxis parse_sweep(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ConfigError("sweep '" + spec + "': expected key=grid");
    SweepAxis axis;
    axis.key = spec.substr(0, eq);
    const std::string grid = spec.substr(eq + 1);
    bool known = false;
    for (const auto& k : sweep_keys()) known = known || k == axis.key;
    if (!known) throw ConfigError("sweep: unknown key '" + axis.key + "'");
    if (grid.empty()) throw ConfigError("sweep " + axis.key + ": empty grid");

    const bool range = grid.find(':') != std::string::npos;
    if (range) {
        if (detail::symbolic_key(axis.key))
            throw ConfigError("sweep " + axis.key + ": ranges need a numeric key");
        const auto parts = detail::split(grid, ':');
        if (parts.size() != 3) throw ConfigError("sweep " + axis.key + ": expected start:stop:step");
        const double start = detail::parse_number(parts[0], axis.key);
        const double stop = detail::parse_number(parts[1], axis.key);
        const double step = detail::parse_number(parts[2], axis.key);
        if (!(step > 0) || stop < start) throw ConfigError("sweep " + axis.key + ": empty grid");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t k = 0; k < n; ++k) {
            double v = start + static_cast<double>(k) * step;
            v = std::round(v * 1e12) / 1e12;
            axis.values.push_back(detail::format_value(v));
        }
    } else {
        for (auto& v : detail::split(grid, ',')) {
            if (v.empty()) throw ConfigError("sweep " + axis.key + ": empty value in list");
            axis.values.push_back(v);
        }
    }
    for (const auto& v : axis.values) {
        if (detail::integer_key(axis.key))
            detail::parse_integer(v, axis.key);
        else if (!detail::symbolic_key(axis.key))
            detail::parse_number(v, axis.key);
    }
    return axis;
}

/// Keeps only the defender parameters the strategy uses.
inline DefenderSpec project_defender(DefenderSpec d, Strategy s) {
    d.strategy = s;
    const bool union_eta1 = s == Strategy::Hybrid && d.hybrid_union;
    if (s != Strategy::Proactive && !union_eta1) d.eta1.reset();
    if (s != Strategy::Proactive && s != Strategy::Hybrid) d.eta2.reset();
    if (s != Strategy::ReactiveAdaptive && s != Strategy::Hybrid) {
        d.fpr.reset();
        d.fnr.reset();
    }
    return d;
}

inline void apply_sweep_value(Scenario& sc, const std::string& key, const std::string& value) {
    using detail::parse_integer;
    using detail::parse_number;
    if (key == "defender.strategy") {
        auto s = parse_strategy(value);
        if (!s) throw ConfigError("sweep defender.strategy: unknown strategy '" + value + "'");
        sc.defender.strategy = *s;
    } else if (key == "diversity.initial_algo") {
        auto a = parse_initial_algorithm(value);
        if (!a) throw ConfigError("sweep diversity.initial_algo: unknown algorithm '" + value + "'");
        sc.defender.initial_algo = *a;
    } else if (key == "defender.detection") {
        if (value == "alert")
            sc.defender.detection = DetectionMode::Alert;
        else if (value == "snapshot")
            sc.defender.detection = DetectionMode::Snapshot;
        else
            throw ConfigError("sweep defender.detection: unknown mode '" + value + "'");
    } else if (key == "defender.tau") {
        sc.defender.tau = parse_number(value, key);
    } else if (key == "defender.eta1") {
        sc.defender.eta1 = parse_number(value, key);
    } else if (key == "defender.eta2") {
        sc.defender.eta2 = parse_number(value, key);
    } else if (key == "defender.fpr") {
        sc.defender.fpr = parse_number(value, key);
    } else if (key == "defender.fnr") {
        sc.defender.fnr = parse_number(value, key);
    } else if (key == "diversity.q") {
        sc.q = parse_number(value, key);
    } else if (key == "diversity.x") {
        sc.x = static_cast<std::uint32_t>(parse_integer(value, key));
    } else if (key == "attacker.m3") {
        sc.attacker.m3 = static_cast<std::size_t>(parse_integer(value, key));
    } else if (key == "attacker.m4") {
        sc.attacker.m4 = static_cast<std::size_t>(parse_integer(value, key));
    } else if (key == "attacker.ini_comp") {
        sc.attacker.ini_comp = static_cast<std::size_t>(parse_integer(value, key));
    } else if (key == "attacker.budget") {
        sc.attacker.budget = static_cast<std::size_t>(parse_integer(value, key));
        sc.attacker.coverage.reset();
    } else if (key == "attacker.coverage") {
        sc.attacker.coverage = parse_number(value, key);
        sc.attacker.budget.reset();
    } else if (key == "run.t_max") {
        sc.run.t_max = static_cast<int>(parse_integer(value, key));
    } else {
        throw ConfigError("sweep: unknown key '" + key + "'");
    }
}

struct SweepCell {
    Scenario scenario;
    std::vector<std::pair<std::string, std::string>> coords;  // axis order
    MetricsReport metrics;
};

/// Expands the grid into validated cell scenarios without running anything.
inline std::vector<SweepCell> expand_sweep(const Scenario& base, const std::vector<SweepAxis>& axes) {
    bool strategy_axis = false;
    for (const auto& a : axes) {
        if (a.values.empty()) throw ConfigError("sweep " + a.key + ": empty grid");
        strategy_axis = strategy_axis || a.key == "defender.strategy";
        for (const auto& b : axes) {
            if (&a != &b && a.key == b.key) throw ConfigError("sweep: key '" + a.key + "' given twice");
        }
    }
    std::vector<SweepCell> cells;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        SweepCell cell;
        cell.scenario = base;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            cell.coords.emplace_back(axes[k].key, axes[k].values[idx[k]]);
            apply_sweep_value(cell.scenario, axes[k].key, axes[k].values[idx[k]]);
        }
        if (strategy_axis)
            cell.scenario.defender = project_defender(cell.scenario.defender, cell.scenario.defender.strategy);
        cell.scenario.validate();
        cells.push_back(std::move(cell));
        std::size_t k = axes.size();
        while (k > 0) {
            --k;
            if (++idx[k] < axes[k].values.size()) break;
            idx[k] = 0;
            if (k == 0) return cells;
        }
        if (axes.empty()) return cells;
    }
}

/// The monoculture counterpart of a scenario, used as the ASD/AEC baseline.
inline Scenario monoculture_of(const Scenario& sc) {
    Scenario mono = sc;
    mono.defender = project_defender(sc.defender, Strategy::Monoculture);
    mono.defender.hybrid_union = false;
    return mono;
}

/// Runs (or reuses) ensemble-mean traces keyed on the scenario minus tau.
class TraceCache {
public:
    TraceCache(std::shared_ptr<const CommGraph> graph, std::size_t jobs) : graph_(std::move(graph)), jobs_(jobs) {}

    const MeanTrace& get(const Scenario& sc) {
        Scenario key_sc = sc;
        key_sc.defender.tau = 0.0;
        const auto key = scenario_to_json(key_sc).dump();
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        ++simulated_;
        return cache_.emplace(key, monte_carlo(Experiment(sc, graph_), jobs_)).first->second;
    }

    std::size_t simulated() const noexcept { return simulated_; }

private:
    std::shared_ptr<const CommGraph> graph_;
    std::size_t jobs_;
    std::map<std::string, MeanTrace> cache_;
    std::size_t simulated_ = 0;
};

struct DerivedRow {
    std::string metric;  // aec, aec_fraction, vt, aoc_min, aoc_max
    Strategy strategy = Strategy::Static;
    double tau = 0.0;
    std::string context;  // remaining coordinates, key=value;...
    std::optional<double> value;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<DerivedRow> derived;
    std::size_t simulated = 0;
};

namespace detail {

inline std::string context_of(const SweepCell& cell, const std::vector<std::string>& excluded) {
    std::string out;
    for (const auto& [k, v] : cell.coords) {
        bool skip = k == "defender.strategy" || k == "defender.tau";
        for (const auto& e : excluded) skip = skip || k == e;
        if (skip) continue;
        if (!out.empty()) out += ';';
        out += k + '=' + v;
    }
    return out;
}

inline std::string value_of(const SweepCell& cell, const std::string& key) {
    for (const auto& [k, v] : cell.coords) {
        if (k == key) return v;
    }
    return {};
}

/// Groups cell indices by (strategy, tau, context without `excluded`), in first-seen order.
inline std::vector<std::vector<std::size_t>> group_cells(const std::vector<SweepCell>& cells,
                                                         const std::vector<std::string>& excluded) {
    std::vector<std::string> keys;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& sc = cells[i].scenario;
        const auto key = std::string(to_string(sc.defender.strategy)) + '|' + format_value(sc.defender.tau) + '|' +
                         context_of(cells[i], excluded);
        std::size_t g = 0;
        while (g < keys.size() && keys[g] != key) ++g;
        if (g == keys.size()) {
            keys.push_back(key);
            groups.emplace_back();
        }
        groups[g].push_back(i);
    }
    return groups;
}

inline bool has_axis(const std::vector<SweepAxis>& axes, const std::string& key) {
    for (const auto& a : axes) {
        if (a.key == key) return true;
    }
    return false;
}

}  // namespace detail

inline SweepResult run_sweep(const Scenario& base, const std::vector<SweepAxis>& axes, std::size_t jobs = 1,
                             std::shared_ptr<const CommGraph> graph = nullptr) {
    SweepResult result;
    result.cells = expand_sweep(base, axes);
    if (!graph) graph = std::make_shared<const CommGraph>(load_graph(base.network));
    TraceCache cache(graph, jobs);

    for (auto& cell : result.cells) {
        const auto& sc = cell.scenario;
        const MeanTrace& trace = cache.get(sc);
        const MeanTrace& baseline = cache.get(monoculture_of(sc));
        cell.metrics = summarize(trace, &baseline, sc.defender.tau, sc.run.t_max);
    }

    using detail::group_cells;
    if (detail::has_axis(axes, "attacker.budget")) {
        for (const auto& group : group_cells(result.cells, {"attacker.budget"})) {
            AwdCurve own, mono;
            for (std::size_t i : group) {
                const auto& sc = result.cells[i].scenario;
                const double b = static_cast<double>(*sc.attacker.budget);
                own.push_back({b, result.cells[i].metrics.awd});
                mono.push_back({b, awd(cache.get(monoculture_of(sc)))});
            }
            const auto& first = result.cells[group.front()];
            const auto& sc = first.scenario;
            const double full = static_cast<double>(sc.hbar) * sc.x * sc.q;
            const auto extra = aec(own, mono, sc.defender.tau, full);
            const auto ctx = detail::context_of(first, {"attacker.budget"});
            result.derived.push_back({"aec", sc.defender.strategy, sc.defender.tau, ctx,
                                      extra ? std::optional<double>(extra->exploits) : std::nullopt});
            result.derived.push_back({"aec_fraction", sc.defender.strategy, sc.defender.tau, ctx,
                                      extra ? std::optional<double>(extra->fraction) : std::nullopt});
        }
    }
    if (detail::has_axis(axes, "diversity.q")) {
        for (const auto& group : group_cells(result.cells, {"diversity.q"})) {
            AwdCurve curve;
            for (std::size_t i : group) curve.push_back({result.cells[i].scenario.q, result.cells[i].metrics.awd});
            std::sort(curve.begin(), curve.end());
            const auto& first = result.cells[group.front()];
            result.derived.push_back({"vt", first.scenario.defender.strategy, first.scenario.defender.tau,
                                      detail::context_of(first, {"diversity.q"}), vt(curve, first.scenario.defender.tau)});
        }
    }
    const std::vector<std::string> family_keys = {"defender.eta1", "defender.eta2", "defender.fpr", "defender.fnr"};
    bool family = false;
    for (const auto& k : family_keys) family = family || detail::has_axis(axes, k);
    if (family) {
        for (const auto& group : group_cells(result.cells, family_keys)) {
            std::vector<CostPoint> points;
            for (std::size_t i : group) points.push_back({result.cells[i].metrics.aoc, result.cells[i].metrics.awd});
            const auto& first = result.cells[group.front()];
            const auto range = aoc_extrema(points, first.scenario.defender.tau);
            const auto ctx = detail::context_of(first, family_keys);
            result.derived.push_back({"aoc_min", first.scenario.defender.strategy, first.scenario.defender.tau, ctx,
                                      range ? std::optional<double>(range->min) : std::nullopt});
            result.derived.push_back({"aoc_max", first.scenario.defender.strategy, first.scenario.defender.tau, ctx,
                                      range ? std::optional<double>(range->max) : std::nullopt});
        }
    }
    result.simulated = cache.simulated();
    return result;
}

namespace detail {

template <class T>
std::string or_na(const std::optional<T>& v) {
    if (!v) return "NA";
    if constexpr (std::is_floating_point_v<T>)
        return format_value(*v);
    else
        return std::to_string(*v);
}

}  // namespace detail

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
    using detail::format_value;
    using detail::or_na;
    out << "strategy,initial_algo,detection,hybrid_union,hbar,x,q,m3,m4,ini_comp,budget,coverage,"
           "eta1,eta2,fpr,fnr,tau,t_max,runs,seed,attacker_first,tts,asd,asd_censored,awd,aoc\n";
    for (const auto& cell : cells) {
        const auto& sc = cell.scenario;
        const auto& d = sc.defender;
        const auto& m = cell.metrics;
        out << to_string(d.strategy) << ',' << to_string(d.initial_algo) << ',' << to_string(d.detection) << ','
            << (d.hybrid_union ? 1 : 0) << ',' << sc.hbar << ',' << sc.x << ',' << format_value(sc.q) << ','
            << sc.attacker.m3 << ',' << sc.attacker.m4 << ',' << sc.attacker.ini_comp << ','
            << or_na(sc.attacker.budget) << ',' << or_na(sc.attacker.coverage) << ',' << or_na(d.eta1) << ','
            << or_na(d.eta2) << ',' << or_na(d.fpr) << ',' << or_na(d.fnr) << ',' << fixed6(d.tau) << ','
            << sc.run.t_max << ',' << sc.run.runs << ',' << sc.run.seed << ',' << (sc.run.attacker_first ? 1 : 0)
            << ',' << or_na(m.tts) << ',' << (m.asd ? std::to_string(m.asd->steps) : "NA") << ','
            << (m.asd && m.asd->censored ? 1 : 0) << ',' << fixed6(m.awd) << ',' << fixed6(m.aoc) << '\n';
    }
}

inline void write_derived_csv(std::ostream& out, const std::vector<DerivedRow>& rows) {
    out << "metric,strategy,tau,context,value\n";
    for (const auto& r : rows) {
        out << r.metric << ',' << to_string(r.strategy) << ',' << fixed6(r.tau) << ',' << r.context << ','
            << (r.value ? fixed6(*r.value) : "NA") << '\n';
    }
}

}  // namespace netdiv
