/**
 * @file threat.hpp
 * @brief Attacker model: exploit catalog, shared knowledge, per-node agents
 *        and the five-phase decision function.
 *
 * Phases cycle Install -> Discovery -> PrivEsc -> Lateral -> Damage ->
 * Discovery -> ... with one phase per time step. Targeting uses the
 * attacker's (possibly stale) knowledge; an exploit only lands if the node
 * still runs the observed implementation and is vulnerable.
 */
#pragma once

#include "netdiv/diversity.hpp"
#include "netdiv/netmodel.hpp"
#include "netdiv/rng.hpp"
#include "netdiv/security_state.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netdiv {

/// Exploits for the single-exploit phases: remote access, two discovery
/// procedures and damage.
inline constexpr int kFixedPhaseExploits = 4;

class ExploitCatalog {
public:
    ExploitCatalog() = default;
    explicit ExploitCatalog(ImplementationPool pool) : pool_(pool), targets_(pool.size(), 0) {}

    const ImplementationPool& pool() const noexcept { return pool_; }

    bool targets(ProgramId p, ImplIndex i) const { return targets_[pool_.slot(p, i)] != 0; }

    void add_target(ProgramId p, ImplIndex i) {
        if (p.index >= pool_.hbar || i >= pool_.x)
            throw std::out_of_range("ExploitCatalog: target outside the implementation pool");
        auto& slot = targets_[pool_.slot(p, i)];
        if (slot) return;
        slot = 1;
        (p == pool_.os_program() ? privesc_ : lateral_) += 1;
    }

    /// m3: privilege-escalation exploits against OS implementations.
    std::size_t privesc_count() const noexcept { return privesc_; }
    /// m4: lateral-movement exploits against application implementations.
    std::size_t lateral_count() const noexcept { return lateral_; }

    bool covers(const ExploitCatalog& other) const {
        for (std::size_t k = 0; k < targets_.size(); ++k) {
            if (other.targets_[k] && !targets_[k]) return false;
        }
        return true;
    }

    /// Every target must be a vulnerable implementation.
    void check_against(const VulnerabilityMap& vuln) const {
        for (std::uint32_t p = 0; p < pool_.hbar; ++p) {
            for (ImplIndex i = 0; i < pool_.x; ++i) {
                if (targets(ProgramId{p}, i) && !vuln.vulnerable(ProgramId{p}, i))
                    throw std::invalid_argument("ExploitCatalog: target (" + std::to_string(p) + "," +
                                                std::to_string(i) + ") is not vulnerable");
            }
        }
    }

private:
    ImplementationPool pool_;
    std::vector<std::uint8_t> targets_;
    std::size_t privesc_ = 0;
    std::size_t lateral_ = 0;
};

/// Unit cost per exploit, fixed-phase exploits included.
inline int attack_investment(const ExploitCatalog& catalog) {
    return static_cast<int>(catalog.privesc_count() + catalog.lateral_count()) + kFixedPhaseExploits;
}

/// Per-application share of m4: even split, remainder to lower program indices.
inline std::vector<std::size_t> split_lateral(std::size_t m4, std::uint32_t num_apps) {
    std::vector<std::size_t> share(num_apps, m4 / num_apps);
    for (std::size_t j = 0; j < m4 % num_apps; ++j) ++share[j];
    return share;
}

inline ExploitCatalog build_exploit_catalog(const ImplementationPool& pool,
                                            const VulnerabilityMap& vuln, std::size_t m3,
                                            std::size_t m4, std::uint64_t seed) {
    ExploitCatalog catalog(pool);
    Rng rng(seed);
    auto draw = [&](ProgramId p, std::size_t k) {
        auto candidates = vuln.vulnerable_impls(p);
        if (k > candidates.size())
            throw std::invalid_argument("build_exploit_catalog: insufficient vulnerable implementations "
                                        "for program " + std::to_string(p.index) + " (need " +
                                        std::to_string(k) + ", have " +
                                        std::to_string(candidates.size()) + ")");
        std::shuffle(candidates.begin(), candidates.end(), rng);
        for (std::size_t i = 0; i < k; ++i) catalog.add_target(p, candidates[i]);
    };
    const auto apps = pool.hbar - 1;
    const auto shares = split_lateral(m4, apps);
    // validate everything before drawing so errors don't depend on draw order
    if (m3 > vuln.count(pool.os_program()))
        throw std::invalid_argument("build_exploit_catalog: insufficient vulnerable OS implementations");
    for (std::uint32_t j = 0; j < apps; ++j) {
        if (shares[j] > vuln.count(ProgramId{j}))
            throw std::invalid_argument("build_exploit_catalog: insufficient vulnerable implementations "
                                        "for application " + std::to_string(j));
    }
    draw(pool.os_program(), m3);
    for (std::uint32_t j = 0; j < apps; ++j) draw(ProgramId{j}, shares[j]);
    return catalog;
}

enum class AttackPhase : std::uint8_t { Install, Discovery, PrivEsc, Lateral, Damage };

constexpr AttackPhase next_phase(AttackPhase p) noexcept {
    switch (p) {
        case AttackPhase::Install: return AttackPhase::Discovery;
        case AttackPhase::Discovery: return AttackPhase::PrivEsc;
        case AttackPhase::PrivEsc: return AttackPhase::Lateral;
        case AttackPhase::Lateral: return AttackPhase::Damage;
        case AttackPhase::Damage: return AttackPhase::Discovery;
    }
    return AttackPhase::Discovery;
}

constexpr const char* to_string(AttackPhase p) noexcept {
    switch (p) {
        case AttackPhase::Install: return "install";
        case AttackPhase::Discovery: return "discovery";
        case AttackPhase::PrivEsc: return "privesc";
        case AttackPhase::Lateral: return "lateral";
        case AttackPhase::Damage: return "damage";
    }
    return "?";
}

struct AttackAgent {
    NodeId host = 0;
    AttackPhase phase = AttackPhase::Install;
    int spawned_at = 0;
};

/// At most one agent per node, indexed by host.
using AgentTable = std::vector<std::optional<AttackAgent>>;

/// The master server's merged view of observed implementations.
class AttackerKnowledge {
public:
    static constexpr std::int64_t kUnknown = -1;

    AttackerKnowledge() = default;
    explicit AttackerKnowledge(std::size_t nodes) : impl_(nodes, kUnknown), observed_at_(nodes, -1) {}

    bool known(NodeId v) const { return impl_[v] != kUnknown; }
    ImplIndex impl(NodeId v) const { return static_cast<ImplIndex>(impl_[v]); }
    int observed_at(NodeId v) const { return observed_at_[v]; }
    std::size_t known_count() const noexcept { return known_; }

    void observe(NodeId v, ImplIndex impl, int t) {
        if (impl_[v] == kUnknown) ++known_;
        impl_[v] = impl;
        observed_at_[v] = t;
    }

private:
    std::vector<std::int64_t> impl_;
    std::vector<int> observed_at_;
    std::size_t known_ = 0;
};

struct ExploitAttempt {
    NodeId target = 0;
    ImplIndex expected_impl = 0;
};

struct AttackAction {
    AttackPhase phase = AttackPhase::Install;
    std::vector<NodeId> observe;
    std::vector<ExploitAttempt> attempts;
    bool damage = false;
};

/**
 * Decision for one agent's current phase. Discovery observes the host and its
 * neighbors; PrivEsc targets the host computer's OS from an app node; Lateral
 * targets every known, vulnerable application neighbor whose observed
 * implementation has an exploit.
 */
inline void agent_decide(const AttackAgent& agent, const AttackerKnowledge& knowledge,
                         const ExploitCatalog& catalog, const CommGraph& g,
                         const SecurityState& state, AttackAction& action) {
    action.phase = agent.phase;
    action.observe.clear();
    action.attempts.clear();
    action.damage = false;
    const NodeId host = agent.host;
    switch (agent.phase) {
        case AttackPhase::Install: break;
        case AttackPhase::Discovery: {
            action.observe.push_back(host);
            for (NodeId w : g.neighbors(host)) action.observe.push_back(w);
            break;
        }
        case AttackPhase::PrivEsc: {
            if (g.is_os(host)) break;
            const NodeId os = g.os_node(g.node(host).computer);
            if (state[os] == NodeState::Vulnerable && knowledge.known(os) &&
                catalog.targets(g.os_program(), knowledge.impl(os)))
                action.attempts.push_back({os, knowledge.impl(os)});
            break;
        }
        case AttackPhase::Lateral: {
            for (NodeId w : g.neighbors(host)) {
                if (g.is_os(w) || state[w] != NodeState::Vulnerable || !knowledge.known(w)) continue;
                if (catalog.targets(g.node(w).program, knowledge.impl(w)))
                    action.attempts.push_back({w, knowledge.impl(w)});
            }
            break;
        }
        case AttackPhase::Damage: action.damage = true; break;
    }
}

inline AttackAction agent_decide(const AttackAgent& agent, const AttackerKnowledge& knowledge,
                                 const ExploitCatalog& catalog, const CommGraph& g,
                                 const SecurityState& state) {
    AttackAction action;
    agent_decide(agent, knowledge, catalog, g, state, action);
    return action;
}

/// Applies an action against ground truth; appends landed compromises to `newly`.
inline std::size_t apply_action(const AttackAction& action, int t, AttackerKnowledge& knowledge,
                                const DiversityConfig& config, SecurityState& state,
                                std::vector<NodeId>& newly) {
    for (NodeId v : action.observe) knowledge.observe(v, config[v], t);
    std::size_t landed = 0;
    for (const auto& attempt : action.attempts) {
        const NodeId w = attempt.target;
        if (state[w] != NodeState::Vulnerable || config[w] != attempt.expected_impl) continue;
        state[w] = NodeState::Compromised;
        knowledge.observe(w, config[w], t);
        newly.push_back(w);
        ++landed;
    }
    return landed;
}

struct InitialCompromise {
    std::vector<NodeId> nodes;  // ascending
    std::size_t shortfall = 0;
};

/**
 * Uniform sample of `size` application nodes running an implementation the
 * catalog can exploit; tops up from other vulnerable application nodes when
 * too few exist and reports whatever is still missing.
 */
inline InitialCompromise initial_compromise(const CommGraph& g, const DiversityConfig& config,
                                            const VulnerabilityMap& vuln,
                                            const ExploitCatalog& catalog, std::size_t size,
                                            std::uint64_t seed) {
    Rng rng(seed);
    std::vector<NodeId> exploitable, fallback;
    for (const auto& nd : g.nodes()) {
        if (g.is_os(nd.id)) continue;
        if (catalog.targets(nd.program, config[nd.id]))
            exploitable.push_back(nd.id);
        else if (vuln.vulnerable(nd.program, config[nd.id]))
            fallback.push_back(nd.id);
    }
    InitialCompromise out;
    auto take = [&](std::vector<NodeId>& from, std::size_t k) {
        k = std::min(k, from.size());
        std::shuffle(from.begin(), from.end(), rng);
        out.nodes.insert(out.nodes.end(), from.begin(), from.begin() + static_cast<std::ptrdiff_t>(k));
    };
    take(exploitable, size);
    if (out.nodes.size() < size) take(fallback, size - out.nodes.size());
    out.shortfall = size - out.nodes.size();
    std::sort(out.nodes.begin(), out.nodes.end());
    return out;
}

}  // namespace netdiv
