/**
 * @file network_io.hpp
 * @brief Synthetic two-layer social network generator and edge-list files.
 *
 * Edge-list format: one link per line, two whitespace-separated non-negative
 * integer user ids; lines starting with '#' and blank lines are ignored.
 */
#pragma once

#include "netdiv/netmodel.hpp"
#include "netdiv/rng.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace netdiv {

struct SyntheticParams {
    std::size_t n_layer1 = 570;
    std::size_t n_layer2 = 554;
    double overlap_fraction = 0.886;
    std::size_t attachment_degree = 3;
    std::uint64_t seed = 1;
};

struct SyntheticNetwork {
    std::vector<Layer> layers;
    std::set<UserId> users;
};

inline std::size_t overlap_count(const SyntheticParams& p) {
    const auto smaller = std::min(p.n_layer1, p.n_layer2);
    return static_cast<std::size_t>(std::lround(p.overlap_fraction * static_cast<double>(smaller)));
}

namespace detail {

// Barabasi-Albert growth over `members` in the given order: a clique on the
// first m+1 members, then each newcomer links to m distinct earlier members
// chosen proportionally to degree.
inline std::vector<std::pair<UserId, UserId>> preferential_attachment(
    const std::vector<UserId>& members, std::size_t m, Rng& rng) {
    std::vector<std::pair<UserId, UserId>> links;
    std::vector<UserId> endpoints;  // each user repeated once per incident link
    const std::size_t seed_size = m + 1;
    for (std::size_t i = 0; i < seed_size; ++i) {
        for (std::size_t k = i + 1; k < seed_size; ++k) {
            links.emplace_back(members[i], members[k]);
            endpoints.push_back(members[i]);
            endpoints.push_back(members[k]);
        }
    }
    std::vector<UserId> chosen;
    for (std::size_t i = seed_size; i < members.size(); ++i) {
        chosen.clear();
        std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
        while (chosen.size() < m) {
            const UserId target = endpoints[pick(rng)];
            if (std::find(chosen.begin(), chosen.end(), target) == chosen.end()) chosen.push_back(target);
        }
        for (UserId target : chosen) {
            links.emplace_back(members[i], target);
            endpoints.push_back(members[i]);
            endpoints.push_back(target);
        }
    }
    return links;
}

}  // namespace detail

/**
 * Two preferential-attachment layers. Layer 1 holds users [0, n1); layer 2
 * holds the last `overlap` users of layer 1 followed by fresh users. The
 * attachment order inside each layer is an independent shuffle.
 */
inline SyntheticNetwork generate_synthetic_network(const SyntheticParams& p) {
    if (!(p.overlap_fraction >= 0.0 && p.overlap_fraction <= 1.0))
        throw std::invalid_argument("overlap_fraction must lie in [0,1]");
    if (p.attachment_degree < 1) throw std::invalid_argument("attachment_degree must be >= 1");
    if (p.n_layer1 < p.attachment_degree + 1 || p.n_layer2 < p.attachment_degree + 1)
        throw std::invalid_argument("layer size must be at least attachment_degree + 1");

    const auto overlap = overlap_count(p);
    const UserId first2 = p.n_layer1 - overlap;

    SyntheticNetwork net;
    net.layers.resize(2);
    for (UserId u = 0; u < p.n_layer1; ++u) net.layers[0].members.push_back(u);
    for (UserId u = first2; u < first2 + p.n_layer2; ++u) net.layers[1].members.push_back(u);

    Rng rng(p.seed);
    for (auto& layer : net.layers) {
        auto order = layer.members;
        std::shuffle(order.begin(), order.end(), rng);
        layer.links = detail::preferential_attachment(order, p.attachment_degree, rng);
        for (UserId u : layer.members) net.users.insert(u);
    }
    return net;
}

/// Layer membership is the set of ids appearing in the file.
inline Layer read_edge_list(std::istream& in, const std::string& origin = "<stream>") {
    Layer layer;
    std::unordered_set<UserId> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream fields(line);
        long long a = -1, b = -1;
        if (!(fields >> a >> b) || a < 0 || b < 0)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": expected two non-negative user ids");
        std::string rest;
        if (fields >> rest)
            throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": trailing data");
        const auto u = static_cast<UserId>(a), w = static_cast<UserId>(b);
        layer.links.emplace_back(u, w);
        for (UserId x : {u, w}) {
            if (seen.insert(x).second) layer.members.push_back(x);
        }
    }
    return layer;
}

inline Layer read_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list " + path.string());
    return read_edge_list(in, path.string());
}

inline std::vector<UserId> read_user_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open user list " + path.string());
    std::vector<UserId> users;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream fields(line);
        long long u = -1;
        if (!(fields >> u) || u < 0)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected a non-negative user id");
        users.push_back(static_cast<UserId>(u));
    }
    return users;
}

inline void write_edge_list(std::ostream& out, const Layer& layer) {
    for (auto [u, w] : layer.links) out << u << ' ' << w << '\n';
}

inline void write_edge_list(const std::filesystem::path& path, const Layer& layer) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_edge_list(out, layer);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace netdiv
