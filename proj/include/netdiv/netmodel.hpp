/**
 * @file netmodel.hpp
 * @brief Communication graph of programs, implementation pool and
 *        ground-truth vulnerability map.
 *
 * A computer is a set of nodes: one node per application it participates in
 * plus exactly one OS node. Program index hbar-1 is the OS; indices below it
 * are application kinds. Node ids are assigned computer-major with computers
 * sorted by user id; within a computer app nodes come first (by program index)
 * followed by the OS node.
 */
#pragma once

#include "netdiv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace netdiv {

using NodeId = std::uint32_t;
using ComputerId = std::uint32_t;
using UserId = std::uint64_t;
using ImplIndex = std::uint32_t;

struct ProgramId {
    std::uint32_t index = 0;
    friend constexpr auto operator<=>(ProgramId, ProgramId) = default;
};

struct Node {
    NodeId id = 0;
    ComputerId computer = 0;
    ProgramId program;
};

/// Social links of one application; `members` is the participation set.
struct Layer {
    std::vector<UserId> members;
    std::vector<std::pair<UserId, UserId>> links;
};

class CommGraph {
public:
    CommGraph() = default;

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_computers() const noexcept { return os_of_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    std::uint32_t hbar() const noexcept { return hbar_; }
    ProgramId os_program() const noexcept { return ProgramId{hbar_ - 1}; }

    const Node& node(NodeId v) const { return nodes_.at(v); }
    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::span<const std::pair<NodeId, NodeId>> edges() const noexcept { return edges_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

    bool is_os(NodeId v) const { return nodes_[v].program == os_program(); }
    NodeId os_node(ComputerId c) const { return os_of_.at(c); }
    UserId user_of(ComputerId c) const { return users_.at(c); }

    /// All nodes of computer c; the OS node is last.
    std::span<const Node> computer_nodes(ComputerId c) const {
        const auto first = c == 0 ? NodeId{0} : os_of_[c - 1] + 1;
        return {nodes_.data() + first, nodes_.data() + os_of_[c] + 1};
    }

    bool has_edge(NodeId a, NodeId b) const {
        auto nb = neighbors(a);
        return std::binary_search(nb.begin(), nb.end(), b);
    }

    /// Throws std::logic_error describing the first broken structural invariant.
    void validate() const;

    friend CommGraph build_graph(std::span<const Layer> layers, const std::set<UserId>& users);

private:
    void finalize(std::vector<std::pair<NodeId, NodeId>> edges);

    std::uint32_t hbar_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::pair<NodeId, NodeId>> edges_;
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> adj_;
    std::vector<NodeId> os_of_;
    std::vector<UserId> users_;
};

inline void CommGraph::finalize(std::vector<std::pair<NodeId, NodeId>> edges) {
    for (auto& [a, b] : edges) {
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::vector<std::size_t> deg(nodes_.size(), 0);
    for (auto [a, b] : edges_) {
        ++deg[a];
        ++deg[b];
    }
    offsets_.assign(nodes_.size() + 1, 0);
    for (std::size_t v = 0; v < nodes_.size(); ++v) offsets_[v + 1] = offsets_[v] + deg[v];
    adj_.assign(offsets_.back(), 0);
    auto cursor = offsets_;
    for (auto [a, b] : edges_) {
        adj_[cursor[a]++] = b;
        adj_[cursor[b]++] = a;
    }
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
        std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v]),
                  adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[v + 1]));
    }
}

inline void CommGraph::validate() const {
    auto fail = [](const std::string& what) { throw std::logic_error("CommGraph: " + what); };
    if (hbar_ < 2) fail("need at least one application kind plus the OS");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].id != i) fail("node ids are not contiguous");
    }
    for (ComputerId c = 0; c < num_computers(); ++c) {
        auto members = computer_nodes(c);
        std::size_t os_count = 0;
        for (const auto& nd : members) {
            if (nd.computer != c) fail("computer node range is inconsistent");
            if (nd.program == os_program()) ++os_count;
        }
        if (os_count != 1) fail("computer without exactly one OS node");
        if (members.size() < 2) fail("computer without an application node");
    }
    for (auto [a, b] : edges_) {
        if (a == b) fail("self-loop");
        const auto& na = nodes_[a];
        const auto& nb = nodes_[b];
        const bool os_a = is_os(a), os_b = is_os(b);
        if (os_a && os_b) fail("OS-OS edge");
        if (na.computer != nb.computer && (os_a || os_b)) fail("inter-computer edge touching an OS");
        if (na.computer != nb.computer && na.program != nb.program)
            fail("inter-computer edge between different applications");
    }
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (edges_[i] == edges_[i - 1]) fail("duplicate edge");
    }
    for (const auto& nd : nodes_) {
        if (is_os(nd.id)) continue;
        if (!has_edge(nd.id, os_of_[nd.computer])) fail("application without an edge to its OS");
    }
}

/**
 * Builds the program-level communication graph from per-application social
 * layers. Layer j drives application program j. Every user becomes a computer
 * and must participate in at least one layer.
 */
inline CommGraph build_graph(std::span<const Layer> layers, const std::set<UserId>& users) {
    if (users.empty()) throw std::invalid_argument("build_graph: empty user set");
    if (layers.empty()) throw std::invalid_argument("build_graph: no application layers");

    const auto num_apps = static_cast<std::uint32_t>(layers.size());
    std::vector<std::set<UserId>> participation(num_apps);
    for (std::uint32_t j = 0; j < num_apps; ++j) {
        for (UserId u : layers[j].members) {
            if (!users.contains(u))
                throw std::invalid_argument("build_graph: layer " + std::to_string(j) +
                                            " references absent user " + std::to_string(u));
            participation[j].insert(u);
        }
        for (auto [u, w] : layers[j].links) {
            for (UserId x : {u, w}) {
                if (!users.contains(x))
                    throw std::invalid_argument("build_graph: layer " + std::to_string(j) +
                                                " link references absent user " +
                                                std::to_string(x));
                participation[j].insert(x);
            }
        }
    }

    CommGraph g;
    g.hbar_ = num_apps + 1;
    // app_node[j][user] -> node id
    std::vector<std::map<UserId, NodeId>> app_node(num_apps);
    std::vector<std::pair<NodeId, NodeId>> edges;

    ComputerId c = 0;
    for (UserId u : users) {
        std::vector<NodeId> local;
        for (std::uint32_t j = 0; j < num_apps; ++j) {
            if (!participation[j].contains(u)) continue;
            const auto id = static_cast<NodeId>(g.nodes_.size());
            g.nodes_.push_back(Node{id, c, ProgramId{j}});
            app_node[j].emplace(u, id);
            local.push_back(id);
        }
        if (local.empty())
            throw std::invalid_argument("build_graph: user " + std::to_string(u) +
                                        " participates in no application");
        const auto os = static_cast<NodeId>(g.nodes_.size());
        g.nodes_.push_back(Node{os, c, ProgramId{num_apps}});
        g.os_of_.push_back(os);
        g.users_.push_back(u);
        for (std::size_t i = 0; i < local.size(); ++i) {
            edges.emplace_back(local[i], os);
            for (std::size_t k = i + 1; k < local.size(); ++k) edges.emplace_back(local[i], local[k]);
        }
        ++c;
    }

    for (std::uint32_t j = 0; j < num_apps; ++j) {
        for (auto [u, w] : layers[j].links) {
            if (u == w) continue;
            edges.emplace_back(app_node[j].at(u), app_node[j].at(w));
        }
    }
    g.finalize(std::move(edges));
    return g;
}

/// Union of all layer members and link endpoints.
inline std::set<UserId> users_of(std::span<const Layer> layers) {
    std::set<UserId> out;
    for (const auto& layer : layers) {
        out.insert(layer.members.begin(), layer.members.end());
        for (auto [u, w] : layer.links) {
            out.insert(u);
            out.insert(w);
        }
    }
    return out;
}

struct ImplementationPool {
    std::uint32_t hbar = 0;
    std::uint32_t x = 1;

    ImplementationPool() = default;
    ImplementationPool(std::uint32_t programs, std::uint32_t impls) : hbar(programs), x(impls) {
        if (hbar < 2) throw std::invalid_argument("ImplementationPool: hbar must be >= 2");
        if (x < 1) throw std::invalid_argument("ImplementationPool: X must be >= 1");
    }

    ProgramId os_program() const noexcept { return ProgramId{hbar - 1}; }
    std::size_t size() const noexcept { return std::size_t{hbar} * x; }
    std::size_t slot(ProgramId p, ImplIndex i) const noexcept {
        return std::size_t{p.index} * x + i;
    }
};

/// round(q * X), the per-program vulnerable implementation count.
inline std::uint32_t vulnerable_count(double q, std::uint32_t x) {
    return static_cast<std::uint32_t>(std::lround(q * static_cast<double>(x)));
}

class VulnerabilityMap {
public:
    VulnerabilityMap() = default;
    VulnerabilityMap(ImplementationPool pool, double q)
        : pool_(pool), q_(q), vulnerable_(pool.size(), 0) {}

    const ImplementationPool& pool() const noexcept { return pool_; }
    double q() const noexcept { return q_; }

    bool vulnerable(ProgramId p, ImplIndex i) const { return vulnerable_[pool_.slot(p, i)] != 0; }
    void set_vulnerable(ProgramId p, ImplIndex i, bool v) { vulnerable_[pool_.slot(p, i)] = v ? 1 : 0; }

    std::vector<ImplIndex> vulnerable_impls(ProgramId p) const {
        std::vector<ImplIndex> out;
        for (ImplIndex i = 0; i < pool_.x; ++i) {
            if (vulnerable(p, i)) out.push_back(i);
        }
        return out;
    }

    std::size_t count(ProgramId p) const { return vulnerable_impls(p).size(); }

private:
    ImplementationPool pool_;
    double q_ = 0.0;
    std::vector<std::uint8_t> vulnerable_;
};

/// Marks exactly round(q*X) uniformly chosen implementations of every program vulnerable.
inline VulnerabilityMap assign_vulnerabilities(const ImplementationPool& pool, double q,
                                               std::uint64_t seed) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("assign_vulnerabilities: q outside [0,1]");
    VulnerabilityMap map(pool, q);
    Rng rng(seed);
    const auto k = vulnerable_count(q, pool.x);
    std::vector<ImplIndex> order(pool.x);
    for (std::uint32_t p = 0; p < pool.hbar; ++p) {
        std::iota(order.begin(), order.end(), ImplIndex{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::uint32_t i = 0; i < k; ++i) map.set_vulnerable(ProgramId{p}, order[i], true);
    }
    return map;
}

}  // namespace netdiv
