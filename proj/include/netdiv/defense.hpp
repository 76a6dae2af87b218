/**
 * @file defense.hpp
 * @brief Defender model: the five diversity strategies, noisy detection and
 *        redeployment of implementations.
 *
 * Redeployment swaps a node's implementation for a different one of the same
 * program (reinstalling when X = 1). A replaced node is never compromised
 * afterwards; it is vulnerable or invulnerable according to the new
 * implementation, and any attack agent on it is destroyed.
 */
#pragma once

#include "netdiv/errors.hpp"
#include "netdiv/netmodel.hpp"
#include "netdiv/rng.hpp"
#include "netdiv/security_state.hpp"
#include "netdiv/threat.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace netdiv {

enum class Strategy { Monoculture, Static, Proactive, ReactiveAdaptive, Hybrid };

constexpr const char* to_string(Strategy s) noexcept {
    switch (s) {
        case Strategy::Monoculture: return "monoculture";
        case Strategy::Static: return "static";
        case Strategy::Proactive: return "proactive";
        case Strategy::ReactiveAdaptive: return "reactive";
        case Strategy::Hybrid: return "hybrid";
    }
    return "?";
}

inline std::optional<Strategy> parse_strategy(const std::string& s) {
    if (s == "monoculture") return Strategy::Monoculture;
    if (s == "static") return Strategy::Static;
    if (s == "proactive") return Strategy::Proactive;
    if (s == "reactive" || s == "reactive_adaptive" || s == "reactive-adaptive")
        return Strategy::ReactiveAdaptive;
    if (s == "hybrid") return Strategy::Hybrid;
    return std::nullopt;
}

/**
 * How reactive and hybrid defenders learn about compromises.
 *  Alert:    the detector runs every step. Each compromise event raises one
 *            alert with probability 1-fnr; a missed event stays hidden. Hybrid
 *            queues alerts and acts on them at its periodic instants.
 *  Snapshot: the detector runs when the strategy acts and re-flags every
 *            compromised node with probability 1-fnr.
 * Non-compromised nodes raise false alarms with probability fpr per invocation.
 */
enum class DetectionMode { Alert, Snapshot };

constexpr const char* to_string(DetectionMode m) noexcept {
    return m == DetectionMode::Alert ? "alert" : "snapshot";
}

struct DefenderSpec {
    Strategy strategy = Strategy::Static;
    std::optional<double> eta1;  // redeploy proportion
    std::optional<double> eta2;  // redeploy frequency; period = round(1/eta2)
    std::optional<double> fpr;
    std::optional<double> fnr;
    double tau = 1.0 / 3.0;
    InitialAlgorithm initial_algo = InitialAlgorithm::DegreePriority;
    /// Hybrid also redeploys an eta1 random sample on action steps.
    bool hybrid_union = false;
    DetectionMode detection = DetectionMode::Alert;

    int period() const { return std::max(1, static_cast<int>(std::lround(1.0 / eta2.value()))); }

    /// Throws ConfigError naming the first violated compatibility rule.
    void validate() const {
        const std::string who = std::string("defender strategy '") + to_string(strategy) + "'";
        auto require = [&](const std::optional<double>& v, const char* name) {
            if (!v) throw ConfigError(who + " requires " + name);
        };
        auto forbid = [&](const std::optional<double>& v, const char* name) {
            if (v) throw ConfigError(who + " requires " + name + " = null");
        };
        auto in_range = [&](const std::optional<double>& v, const char* name, bool open_low) {
            if (!v) return;
            const bool ok = open_low ? (*v > 0.0 && *v <= 1.0) : (*v >= 0.0 && *v <= 1.0);
            if (!ok)
                throw ConfigError(std::string(name) + " = " + std::to_string(*v) + " outside " +
                                  (open_low ? "(0,1]" : "[0,1]"));
        };
        in_range(eta1, "eta1", true);
        in_range(eta2, "eta2", true);
        in_range(fpr, "fpr", false);
        in_range(fnr, "fnr", false);
        if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau outside [0,1]");

        switch (strategy) {
            case Strategy::Monoculture:
                forbid(eta1, "eta1");
                forbid(eta2, "eta2");
                forbid(fpr, "fpr");
                forbid(fnr, "fnr");
                break;
            case Strategy::Static:
                // eta1 is the whole node set by definition; null or 1 are both accepted
                if (eta1 && *eta1 != 1.0) throw ConfigError(who + " requires eta1 = null (or 1)");
                forbid(eta2, "eta2");
                forbid(fpr, "fpr");
                forbid(fnr, "fnr");
                break;
            case Strategy::Proactive:
                require(eta1, "eta1");
                require(eta2, "eta2");
                forbid(fpr, "fpr");
                forbid(fnr, "fnr");
                break;
            case Strategy::ReactiveAdaptive:
                forbid(eta1, "eta1");
                forbid(eta2, "eta2");
                require(fpr, "fpr");
                require(fnr, "fnr");
                break;
            case Strategy::Hybrid:
                require(eta2, "eta2");
                require(fpr, "fpr");
                require(fnr, "fnr");
                if (hybrid_union)
                    require(eta1, "eta1 (hybrid_union)");
                else
                    forbid(eta1, "eta1");
                break;
        }
    }
};

struct Detector {
    double fpr = 0.0;
    double fnr = 0.0;
    bool perfect() const noexcept { return fpr == 0.0 && fnr == 0.0; }
};

/// Independent per-node flags: compromised with 1-fnr, others with fpr.
inline std::vector<NodeId> detect(const SecurityState& state, const Detector& detector, Rng& rng) {
    std::bernoulli_distribution hit(1.0 - detector.fnr);
    std::bernoulli_distribution false_alarm(detector.fpr);
    std::vector<NodeId> flagged;
    for (NodeId v = 0; v < state.size(); ++v) {
        const bool flag = state[v] == NodeState::Compromised ? hit(rng) : false_alarm(rng);
        if (flag) flagged.push_back(v);
    }
    return flagged;
}

/**
 * Alert-mode detection. A node with a compromise event since the previous
 * invocation that is still compromised is flagged with probability 1-fnr;
 * a non-compromised node raises a false alarm with probability fpr.
 * Compromises whose event was missed earlier stay hidden.
 */
inline std::vector<NodeId> detect_events(const SecurityState& state, std::vector<NodeId> events,
                                         const Detector& detector, Rng& rng) {
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end()), events.end());
    std::bernoulli_distribution hit(1.0 - detector.fnr);
    std::bernoulli_distribution false_alarm(detector.fpr);
    std::vector<NodeId> flagged;
    auto next = events.begin();
    for (NodeId v = 0; v < state.size(); ++v) {
        const bool event = next != events.end() && *next == v;
        if (event) ++next;
        if (state[v] == NodeState::Compromised) {
            if (event && hit(rng)) flagged.push_back(v);
        } else if (false_alarm(rng)) {
            flagged.push_back(v);
        }
    }
    return flagged;
}

struct DefensePlan {
    std::vector<NodeId> redeploy;  // ascending
};

/// Alert-mode bookkeeping carried between steps.
struct AlertFeed {
    std::vector<NodeId> unreported;  // compromise events not yet seen by the detector
    std::vector<NodeId> queued;      // alerts awaiting a hybrid action instant, ascending

    void record(std::span<const NodeId> compromised) {
        unreported.insert(unreported.end(), compromised.begin(), compromised.end());
    }
};

struct DefenseStreams {
    Rng detector;
    Rng proactive;
};

/// ceil(eta1 * |V|), robust to representation error in eta1.
inline std::size_t proactive_sample_size(double eta1, std::size_t nodes) {
    const double raw = eta1 * static_cast<double>(nodes);
    return std::min(nodes, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

inline std::vector<NodeId> uniform_node_sample(std::size_t nodes, std::size_t k, Rng& rng) {
    std::vector<NodeId> all(nodes);
    std::iota(all.begin(), all.end(), NodeId{0});
    std::vector<NodeId> out;
    out.reserve(k);
    std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
    return out;
}

inline std::vector<NodeId> merge_sorted(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    std::vector<NodeId> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Defense plan for step t. `feed` is only read and updated in alert mode.
inline DefensePlan plan(const DefenderSpec& spec, int t, const SecurityState& state,
                        const CommGraph& g, DefenseStreams& rng, AlertFeed& feed) {
    DefensePlan out;
    const Detector detector{spec.fpr.value_or(0.0), spec.fnr.value_or(0.0)};
    const bool alert = spec.detection == DetectionMode::Alert;
    auto alerts = [&] {
        auto flagged = detect_events(state, std::move(feed.unreported), detector, rng.detector);
        feed.unreported.clear();
        return flagged;
    };
    auto sample = [&] {
        return uniform_node_sample(g.num_nodes(), proactive_sample_size(*spec.eta1, g.num_nodes()),
                                   rng.proactive);
    };
    switch (spec.strategy) {
        case Strategy::Monoculture:
        case Strategy::Static: break;
        case Strategy::Proactive:
            if (t % spec.period() == 0) out.redeploy = sample();
            break;
        case Strategy::ReactiveAdaptive:
            out.redeploy = alert ? alerts() : detect(state, detector, rng.detector);
            break;
        case Strategy::Hybrid: {
            if (alert) feed.queued = merge_sorted(feed.queued, alerts());
            if (t % spec.period() != 0) break;
            if (alert) {
                out.redeploy = std::move(feed.queued);
                feed.queued.clear();
            } else {
                out.redeploy = detect(state, detector, rng.detector);
            }
            if (spec.hybrid_union) out.redeploy = merge_sorted(out.redeploy, sample());
            break;
        }
    }
    return out;
}

inline DefensePlan plan(const DefenderSpec& spec, int t, const SecurityState& state,
                        const CommGraph& g, DefenseStreams& rng) {
    AlertFeed none;
    return plan(spec, t, state, g, rng, none);
}

struct RedeployOutcome {
    double oc = 0.0;
    std::size_t replaced = 0;
};

inline RedeployOutcome redeploy(const DefensePlan& plan, const CommGraph& g, DiversityConfig& config,
                                const VulnerabilityMap& vuln, SecurityState& state,
                                AgentTable& agents, Rng& rng) {
    const auto x = vuln.pool().x;
    for (NodeId v : plan.redeploy) {
        if (x > 1) {
            std::uniform_int_distribution<ImplIndex> pick(0, x - 2);
            auto impl = pick(rng);
            if (impl >= config[v]) ++impl;
            config[v] = impl;
        }
        state[v] = intrinsic_state(g, config, vuln, v);
        agents[v].reset();
    }
    RedeployOutcome out;
    out.replaced = plan.redeploy.size();
    out.oc = g.num_nodes() == 0 ? 0.0
                                : static_cast<double>(out.replaced) / static_cast<double>(g.num_nodes());
    return out;
}

/// Unit cost per diversified implementation.
inline int defense_investment(const ImplementationPool& pool) {
    return static_cast<int>(pool.hbar * pool.x);
}

}  // namespace netdiv
