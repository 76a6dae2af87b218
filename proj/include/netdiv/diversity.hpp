/**
 * @file diversity.hpp
 * @brief Initial diversity configurations and the defective-edge objective.
 *
 * Colors (implementation indices) are only comparable within one program kind,
 * so an edge is defective iff both endpoints run the same program and the same
 * implementation. App-OS and app-app edges on one computer never qualify.
 */
#pragma once

#include "netdiv/netmodel.hpp"
#include "netdiv/rng.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace netdiv {

struct DiversityConfig {
    std::vector<ImplIndex> installed;

    ImplIndex operator[](NodeId v) const { return installed[v]; }
    ImplIndex& operator[](NodeId v) { return installed[v]; }
    std::size_t size() const noexcept { return installed.size(); }
    friend bool operator==(const DiversityConfig&, const DiversityConfig&) = default;
};

struct ColoringReport {
    std::size_t defective_edges = 0;
    std::vector<std::size_t> per_program_defective;
    std::size_t iterations = 0;
};

struct LocalSearchStats {
    std::size_t sweeps = 0;
    std::size_t moves = 0;
};

enum class InitialAlgorithm { Random, ColorFlip, DegreePriority };

constexpr const char* to_string(InitialAlgorithm a) noexcept {
    switch (a) {
        case InitialAlgorithm::Random: return "random";
        case InitialAlgorithm::ColorFlip: return "color_flip";
        case InitialAlgorithm::DegreePriority: return "degree_priority";
    }
    return "?";
}

inline std::optional<InitialAlgorithm> parse_initial_algorithm(const std::string& s) {
    if (s == "random") return InitialAlgorithm::Random;
    if (s == "color_flip" || s == "color_flipping") return InitialAlgorithm::ColorFlip;
    if (s == "degree_priority") return InitialAlgorithm::DegreePriority;
    return std::nullopt;
}

inline ColoringReport count_defective_edges(const CommGraph& g, const DiversityConfig& config) {
    ColoringReport report;
    report.per_program_defective.assign(g.hbar(), 0);
    for (auto [a, b] : g.edges()) {
        const auto pa = g.node(a).program;
        if (pa == g.node(b).program && config[a] == config[b]) {
            ++report.per_program_defective[pa.index];
            ++report.defective_edges;
        }
    }
    return report;
}

/// Defective edges that node v would have if it ran `impl`.
inline std::size_t local_defective(const CommGraph& g, const DiversityConfig& config, NodeId v,
                                   ImplIndex impl) {
    const auto prog = g.node(v).program;
    std::size_t count = 0;
    for (NodeId w : g.neighbors(v)) {
        if (g.node(w).program == prog && config[w] == impl) ++count;
    }
    return count;
}

inline DiversityConfig random_coloring(const CommGraph& g, const ImplementationPool& pool,
                                       std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_int_distribution<ImplIndex> pick(0, pool.x - 1);
    DiversityConfig config{std::vector<ImplIndex>(g.num_nodes())};
    for (auto& impl : config.installed) impl = pick(rng);
    return config;
}

/// Best-response recoloring from a random start. Each node, in id order,
/// moves to the implementation with the fewest local defective edges when
/// that is strictly better than its current one (ties to the lowest index).
inline DiversityConfig color_flipping(const CommGraph& g, const ImplementationPool& pool,
                                      std::uint64_t seed, std::size_t max_sweeps,
                                      LocalSearchStats& stats) {
    if (max_sweeps < 1) throw std::invalid_argument("color_flipping: max_sweeps must be >= 1");
    auto config = random_coloring(g, pool, seed);
    stats = {};
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        ++stats.sweeps;
        bool changed = false;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            const auto current = local_defective(g, config, v, config[v]);
            if (current == 0) continue;
            auto best = current;
            auto best_impl = config[v];
            for (ImplIndex i = 0; i < pool.x; ++i) {
                const auto c = local_defective(g, config, v, i);
                if (c < best) {
                    best = c;
                    best_impl = i;
                }
            }
            if (best_impl != config[v]) {
                config[v] = best_impl;
                changed = true;
                ++stats.moves;
            }
        }
        if (!changed) break;
    }
    return config;
}

inline DiversityConfig color_flipping(const CommGraph& g, const ImplementationPool& pool,
                                      std::uint64_t seed, std::size_t max_sweeps) {
    LocalSearchStats stats;
    return color_flipping(g, pool, seed, max_sweeps, stats);
}

namespace detail {

inline constexpr ImplIndex kUncolored = static_cast<ImplIndex>(-1);

// Round-robin pre-assignment over `subset` (already in priority order).
// Only neighbors colored earlier count toward local defective edges.
inline void priority_coloring(const CommGraph& g, const ImplementationPool& pool,
                              const std::vector<NodeId>& subset, DiversityConfig& config) {
    const auto colored_conflicts = [&](NodeId v, ImplIndex impl) {
        const auto prog = g.node(v).program;
        std::size_t count = 0;
        for (NodeId w : g.neighbors(v)) {
            if (config[w] != kUncolored && g.node(w).program == prog && config[w] == impl) ++count;
        }
        return count;
    };

    std::size_t turn = 0;
    for (NodeId v : subset) {
        const auto pre = static_cast<ImplIndex>(turn++ % pool.x);
        if (colored_conflicts(v, pre) == 0) {
            config[v] = pre;
            continue;
        }
        std::vector<std::size_t> conflicts(pool.x);
        for (ImplIndex i = 0; i < pool.x; ++i) conflicts[i] = colored_conflicts(v, i);
        const auto least = *std::min_element(conflicts.begin(), conflicts.end());
        if (least == 0) {
            config[v] = static_cast<ImplIndex>(
                std::find(conflicts.begin(), conflicts.end(), 0) - conflicts.begin());
            continue;
        }
        // Several minimizers: follow the lowest-degree colored neighbor.
        std::vector<NodeId> colored;
        const auto prog = g.node(v).program;
        for (NodeId w : g.neighbors(v)) {
            if (config[w] != kUncolored && g.node(w).program == prog) colored.push_back(w);
        }
        std::sort(colored.begin(), colored.end(), [&](NodeId a, NodeId b) {
            return std::pair{g.degree(a), a} < std::pair{g.degree(b), b};
        });
        ImplIndex choice = static_cast<ImplIndex>(
            std::find(conflicts.begin(), conflicts.end(), least) - conflicts.begin());
        for (NodeId w : colored) {
            if (conflicts[config[w]] == least) {
                choice = config[w];
                break;
            }
        }
        config[v] = choice;
    }
}

// First-improvement single-node moves until no move lowers the total.
inline void switching(const CommGraph& g, const ImplementationPool& pool,
                      std::vector<NodeId> subset, DiversityConfig& config) {
    std::sort(subset.begin(), subset.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (NodeId v : subset) {
            const auto current = local_defective(g, config, v, config[v]);
            if (current == 0) continue;
            for (ImplIndex i = 0; i < pool.x; ++i) {
                if (i == config[v]) continue;
                if (local_defective(g, config, v, i) < current) {
                    config[v] = i;
                    changed = true;
                    break;
                }
            }
        }
    }
}

}  // namespace detail

/**
 * Degree-priority assignment. Per program subset (applications, then OS):
 * order by full-graph degree descending (ties: id ascending), pre-assign
 * implementations in turn and repair local conflicts, then local switching
 * (skipped when `local_switching` is false, exposing the starting point).
 */
inline DiversityConfig degree_priority_assignment(const CommGraph& g,
                                                  const ImplementationPool& pool,
                                                  bool local_switching = true) {
    DiversityConfig config{std::vector<ImplIndex>(g.num_nodes(), detail::kUncolored)};
    std::vector<std::vector<NodeId>> subsets(g.hbar());
    for (const auto& nd : g.nodes()) subsets[nd.program.index].push_back(nd.id);

    for (auto& subset : subsets) {
        std::stable_sort(subset.begin(), subset.end(), [&](NodeId a, NodeId b) {
            if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
            return a < b;
        });
        detail::priority_coloring(g, pool, subset, config);
        if (local_switching) detail::switching(g, pool, subset, config);
    }
    return config;
}

inline DiversityConfig initial_configuration(InitialAlgorithm algo, const CommGraph& g,
                                             const ImplementationPool& pool, std::uint64_t seed,
                                             std::size_t max_sweeps = 100) {
    switch (algo) {
        case InitialAlgorithm::Random: return random_coloring(g, pool, seed);
        case InitialAlgorithm::ColorFlip: return color_flipping(g, pool, seed, max_sweeps);
        case InitialAlgorithm::DegreePriority: return degree_priority_assignment(g, pool);
    }
    return random_coloring(g, pool, seed);
}

}  // namespace netdiv
