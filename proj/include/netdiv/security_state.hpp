#pragma once

#include "netdiv/diversity.hpp"
#include "netdiv/netmodel.hpp"

#include <cstdint>
#include <vector>

namespace netdiv {

enum class NodeState : std::uint8_t { Vulnerable = 0, Compromised = 1, Invulnerable = 2 };

/// Program-level state vector; one entry per node.
using SecurityState = std::vector<NodeState>;

/// State implied by the installed implementation alone (nothing compromised).
inline NodeState intrinsic_state(const CommGraph& g, const DiversityConfig& config,
                                 const VulnerabilityMap& vuln, NodeId v) {
    return vuln.vulnerable(g.node(v).program, config[v]) ? NodeState::Vulnerable
                                                         : NodeState::Invulnerable;
}

inline SecurityState intrinsic_states(const CommGraph& g, const DiversityConfig& config,
                                      const VulnerabilityMap& vuln) {
    SecurityState s(g.num_nodes());
    for (NodeId v = 0; v < g.num_nodes(); ++v) s[v] = intrinsic_state(g, config, vuln, v);
    return s;
}

struct ComputerCounts {
    std::uint32_t compromised = 0;
    std::uint32_t vulnerable = 0;
    std::uint32_t invulnerable = 0;
};

/// Computer is compromised if any node is, else vulnerable if any node is,
/// else invulnerable.
inline NodeState computer_state(const CommGraph& g, const SecurityState& s, ComputerId c) {
    bool any_vulnerable = false;
    for (const auto& nd : g.computer_nodes(c)) {
        if (s[nd.id] == NodeState::Compromised) return NodeState::Compromised;
        if (s[nd.id] == NodeState::Vulnerable) any_vulnerable = true;
    }
    return any_vulnerable ? NodeState::Vulnerable : NodeState::Invulnerable;
}

inline ComputerCounts count_computers(const CommGraph& g, const SecurityState& s) {
    ComputerCounts counts;
    for (ComputerId c = 0; c < g.num_computers(); ++c) {
        switch (computer_state(g, s, c)) {
            case NodeState::Compromised: ++counts.compromised; break;
            case NodeState::Vulnerable: ++counts.vulnerable; break;
            case NodeState::Invulnerable: ++counts.invulnerable; break;
        }
    }
    return counts;
}

}  // namespace netdiv
