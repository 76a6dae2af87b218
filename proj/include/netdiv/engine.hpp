/**
 * @file engine.hpp
 * @brief Discrete-time attack/defense loop, traces and Monte Carlo ensembles.
 *
 * Each step runs a fixed pipeline:
 *   1. defender plans and redeploys (records oc)
 *   2. attack agents act in ascending host order, effects applied immediately
 *   3. a compromised OS compromises every application on its computer
 *   4. agents spawn (phase Install) on nodes newly compromised this step
 *   5. computer-level (cc, vc, ic) is recorded
 * With `attacker_first` the defender sub-step moves after step 4.
 */
#pragma once

#include "netdiv/defense.hpp"
#include "netdiv/diversity.hpp"
#include "netdiv/errors.hpp"
#include "netdiv/netmodel.hpp"
#include "netdiv/network_io.hpp"
#include "netdiv/rng.hpp"
#include "netdiv/security_state.hpp"
#include "netdiv/threat.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace netdiv {

struct NetworkSource {
    std::optional<SyntheticParams> synthetic;
    std::vector<std::filesystem::path> layer_files;
    std::optional<std::filesystem::path> users_file;
};

struct AttackerSpec {
    std::size_t m3 = 5;
    std::size_t m4 = 10;
    std::size_t ini_comp = 10;
    /// Total exploit budget split evenly over all programs; overrides m3/m4.
    std::optional<std::size_t> budget;
    /// Fraction of the vulnerable implementations exploited; overrides m3/m4
    /// with round(c*X*Q) against the OS and round(c*(hbar-1)*X*Q) against apps.
    std::optional<double> coverage;
};

struct RunSpec {
    int t_max = 500;
    std::size_t runs = 100;
    std::uint64_t seed = 1;
    bool attacker_first = false;
    std::size_t flip_sweeps = 100;
};

struct Scenario {
    NetworkSource network;
    std::uint32_t hbar = 3;
    std::uint32_t x = 10;
    double q = 1.0;
    AttackerSpec attacker;
    DefenderSpec defender;
    RunSpec run;

    /// Implementations actually available: monoculture always has one.
    std::uint32_t effective_x() const { return defender.strategy == Strategy::Monoculture ? 1 : x; }

    /// (m3, m4) after budget/coverage resolution and the monoculture clamp.
    std::pair<std::size_t, std::size_t> exploit_counts() const {
        std::size_t m3 = attacker.m3, m4 = attacker.m4;
        const auto ex = effective_x();
        const auto available = vulnerable_count(q, ex);
        std::vector<std::size_t> per_app;
        if (attacker.budget) {
            std::vector<std::size_t> share(hbar, *attacker.budget / hbar);
            for (std::size_t k = 0; k < *attacker.budget % hbar; ++k) ++share[k];
            m3 = share[hbar - 1];
            per_app.assign(share.begin(), share.end() - 1);
        } else if (attacker.coverage) {
            const double c = *attacker.coverage;
            m3 = static_cast<std::size_t>(std::lround(c * x * q));
            m4 = static_cast<std::size_t>(std::lround(c * (hbar - 1) * x * q));
            per_app = split_lateral(m4, hbar - 1);
        } else {
            per_app = split_lateral(m4, hbar - 1);
        }
        const bool clamp = defender.strategy == Strategy::Monoculture || attacker.coverage.has_value();
        if (clamp) {
            m3 = std::min<std::size_t>(m3, available);
            for (auto& s : per_app) s = std::min<std::size_t>(s, available);
        }
        m4 = 0;
        for (auto s : per_app) m4 += s;
        return {m3, m4};
    }

    void validate() const {
        if (hbar < 2) throw ConfigError("diversity.hbar must be >= 2");
        if (x < 1) throw ConfigError("diversity.x must be >= 1");
        if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("diversity.q outside [0,1]");
        if (run.t_max < 0) throw ConfigError("run.t_max must be >= 0");
        if (run.runs < 1) throw ConfigError("run.runs must be >= 1");
        if (attacker.budget && attacker.coverage)
            throw ConfigError("attacker.budget and attacker.coverage are mutually exclusive");
        if (attacker.coverage && !(*attacker.coverage >= 0.0 && *attacker.coverage <= 1.0))
            throw ConfigError("attacker.coverage outside [0,1]");
        if (!network.synthetic && network.layer_files.empty())
            throw ConfigError("network needs either synthetic parameters or layer files");
        const auto layers = network.synthetic ? std::size_t{2} : network.layer_files.size();
        if (layers + 1 != hbar)
            throw ConfigError("diversity.hbar = " + std::to_string(hbar) + " but the network has " +
                              std::to_string(layers) + " application layers");
        defender.validate();
        const auto [m3, m4] = exploit_counts();
        const auto available = vulnerable_count(q, effective_x());
        if (m3 > available)
            throw ConfigError("attacker.m3 = " + std::to_string(m3) + " exceeds the " +
                              std::to_string(available) + " vulnerable OS implementations");
        for (auto share : split_lateral(m4, hbar - 1)) {
            if (share > available)
                throw ConfigError("attacker.m4 share " + std::to_string(share) + " exceeds the " +
                                  std::to_string(available) + " vulnerable implementations per application");
        }
    }
};

inline CommGraph load_graph(const NetworkSource& src) {
    if (src.synthetic) {
        auto net = generate_synthetic_network(*src.synthetic);
        return build_graph(net.layers, net.users);
    }
    std::vector<Layer> layers;
    for (const auto& path : src.layer_files) layers.push_back(read_edge_list(path));
    auto users = users_of(layers);
    if (src.users_file) {
        for (UserId u : read_user_list(*src.users_file)) users.insert(u);
    }
    return build_graph(layers, users);
}

struct TraceRecord {
    int t = 0;
    std::uint32_t computers = 0;
    std::uint32_t compromised = 0;
    std::uint32_t vulnerable = 0;
    std::uint32_t invulnerable = 0;
    double oc = 0.0;
    std::uint32_t new_compromised = 0;

    double cc() const { return static_cast<double>(compromised) / computers; }
    double vc() const { return static_cast<double>(vulnerable) / computers; }
    double ic() const { return static_cast<double>(invulnerable) / computers; }
};

using Trace = std::vector<TraceRecord>;

struct MeanRecord {
    int t = 0;
    double cc = 0.0;
    double vc = 0.0;
    double ic = 0.0;
    double oc = 0.0;
    double new_compromised = 0.0;
};

using MeanTrace = std::vector<MeanRecord>;

inline MeanTrace to_mean(const Trace& trace) {
    MeanTrace out;
    out.reserve(trace.size());
    for (const auto& r : trace)
        out.push_back({r.t, r.cc(), r.vc(), r.ic(), r.oc, static_cast<double>(r.new_compromised)});
    return out;
}

/// Everything a run needs, fully resolved. Tests may assemble one by hand.
struct RunSetup {
    std::shared_ptr<const CommGraph> graph;
    VulnerabilityMap vuln;
    ExploitCatalog catalog;
    DiversityConfig config;
    std::vector<NodeId> initial;
    DefenderSpec defender;
    std::uint64_t master_seed = 0;
    std::uint64_t run_index = 0;
    bool attacker_first = false;
};

class Simulation {
public:
    explicit Simulation(RunSetup setup)
        : graph_(std::move(setup.graph)),
          vuln_(std::move(setup.vuln)),
          catalog_(std::move(setup.catalog)),
          config_(std::move(setup.config)),
          defender_(setup.defender),
          attacker_first_(setup.attacker_first),
          defense_rng_{make_rng(setup.master_seed, setup.run_index, Stream::Detector),
                       make_rng(setup.master_seed, setup.run_index, Stream::ProactiveSample)},
          redeploy_rng_(make_rng(setup.master_seed, setup.run_index, Stream::RedeployChoice)) {
        const auto& g = *graph_;
        if (config_.size() != g.num_nodes())
            throw std::invalid_argument("Simulation: configuration does not cover the graph");
        state_ = intrinsic_states(g, config_, vuln_);
        agents_.assign(g.num_nodes(), std::nullopt);
        knowledge_ = AttackerKnowledge(g.num_nodes());
        for (NodeId v : setup.initial) {
            if (state_[v] != NodeState::Compromised) {
                state_[v] = NodeState::Compromised;
                newly_.push_back(v);
            }
        }
        propagate_os_compromise();
        spawn_agents();
        record(0.0);
    }

    int time() const noexcept { return t_; }
    const CommGraph& graph() const noexcept { return *graph_; }
    const SecurityState& state() const noexcept { return state_; }
    const DiversityConfig& config() const noexcept { return config_; }
    const AgentTable& agents() const noexcept { return agents_; }
    const AttackerKnowledge& knowledge() const noexcept { return knowledge_; }
    const ExploitCatalog& catalog() const noexcept { return catalog_; }
    const VulnerabilityMap& vulnerabilities() const noexcept { return vuln_; }
    const Trace& trace() const noexcept { return trace_; }
    std::size_t damage_events() const noexcept { return damage_events_; }
    const std::vector<NodeId>& last_redeployed() const noexcept { return last_plan_.redeploy; }

    void step() {
        begin_step();
        double oc = 0.0;
        if (!attacker_first_) oc = defend();
        attack();
        propagate_os_compromise();
        spawn_agents();
        if (attacker_first_) oc = defend();
        record(oc);
    }

    // Sub-steps, exposed so callers can inspect state between them.
    void begin_step() {
        ++t_;
        newly_.clear();
    }

    double defend() {
        last_plan_ = plan(defender_, t_, state_, *graph_, defense_rng_, alerts_);
        return redeploy(last_plan_, *graph_, config_, vuln_, state_, agents_, redeploy_rng_).oc;
    }

    void attack() {
        const auto& g = *graph_;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            auto& agent = agents_[v];
            if (!agent || agent->spawned_at >= t_) continue;
            agent_decide(*agent, knowledge_, catalog_, g, state_, action_);
            apply_action(action_, t_, knowledge_, config_, state_, newly_);
            if (action_.damage) ++damage_events_;
            agent->phase = next_phase(agent->phase);
        }
    }

    void propagate_os_compromise() {
        const auto& g = *graph_;
        for (ComputerId c = 0; c < g.num_computers(); ++c) {
            if (state_[g.os_node(c)] != NodeState::Compromised) continue;
            for (const auto& nd : g.computer_nodes(c)) {
                if (state_[nd.id] != NodeState::Compromised) {
                    state_[nd.id] = NodeState::Compromised;
                    newly_.push_back(nd.id);
                }
            }
        }
    }

    void spawn_agents() {
        // compromises present at t = 0 predate the detector
        if (t_ > 0) alerts_.record(newly_);
        for (NodeId v : newly_) {
            if (state_[v] != NodeState::Compromised || agents_[v]) continue;
            agents_[v] = AttackAgent{v, AttackPhase::Install, t_};
            knowledge_.observe(v, config_[v], t_);
        }
    }

    void record(double oc) {
        const auto counts = count_computers(*graph_, state_);
        TraceRecord r;
        r.t = t_;
        r.computers = static_cast<std::uint32_t>(graph_->num_computers());
        r.compromised = counts.compromised;
        r.vulnerable = counts.vulnerable;
        r.invulnerable = counts.invulnerable;
        r.oc = oc;
        r.new_compromised = static_cast<std::uint32_t>(newly_.size());
        trace_.push_back(r);
    }

private:
    std::shared_ptr<const CommGraph> graph_;
    VulnerabilityMap vuln_;
    ExploitCatalog catalog_;
    DiversityConfig config_;
    DefenderSpec defender_;
    bool attacker_first_ = false;
    DefenseStreams defense_rng_;
    Rng redeploy_rng_;

    SecurityState state_;
    AgentTable agents_;
    AttackerKnowledge knowledge_;
    AttackAction action_;
    DefensePlan last_plan_;
    std::vector<NodeId> newly_;
    AlertFeed alerts_;
    Trace trace_;
    int t_ = 0;
    std::size_t damage_events_ = 0;
};

/// A scenario with its (immutable, shared) graph loaded once.
class Experiment {
public:
    explicit Experiment(Scenario scenario)
        : scenario_(std::move(scenario)),
          graph_(std::make_shared<const CommGraph>(load_graph(scenario_.network))) {
        scenario_.validate();
    }

    Experiment(Scenario scenario, std::shared_ptr<const CommGraph> graph)
        : scenario_(std::move(scenario)), graph_(std::move(graph)) {
        scenario_.validate();
    }

    const Scenario& scenario() const noexcept { return scenario_; }
    const std::shared_ptr<const CommGraph>& graph() const noexcept { return graph_; }

    RunSetup setup(std::uint64_t run_index) const {
        const auto& sc = scenario_;
        const auto seed = sc.run.seed;
        const ImplementationPool pool(sc.hbar, sc.effective_x());
        const auto [m3, m4] = sc.exploit_counts();

        RunSetup s;
        s.graph = graph_;
        s.vuln = assign_vulnerabilities(pool, sc.q, derive_seed(seed, run_index, Stream::Vulnerability));
        s.catalog = build_exploit_catalog(pool, s.vuln, m3, m4,
                                          derive_seed(seed, run_index, Stream::Catalog));
        s.config = initial_configuration(sc.defender.initial_algo, *graph_, pool,
                                         derive_seed(seed, run_index, Stream::Coloring),
                                         sc.run.flip_sweeps);
        s.initial = initial_compromise(*graph_, s.config, s.vuln, s.catalog, sc.attacker.ini_comp,
                                       derive_seed(seed, run_index, Stream::InitialCompromise))
                        .nodes;
        s.defender = sc.defender;
        s.master_seed = seed;
        s.run_index = run_index;
        s.attacker_first = sc.run.attacker_first;
        return s;
    }

    Simulation init_run(std::uint64_t run_index) const { return Simulation(setup(run_index)); }

    Trace run(std::uint64_t run_index) const {
        auto sim = init_run(run_index);
        for (int t = 1; t <= scenario_.run.t_max; ++t) sim.step();
        return sim.trace();
    }

private:
    Scenario scenario_;
    std::shared_ptr<const CommGraph> graph_;
};

/// Runs `count` independent jobs on up to `jobs` threads; fn(i) must be
/// thread-safe across distinct i.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
    jobs = std::max<std::size_t>(1, std::min(jobs, count));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

/// Element-wise mean over a set of equally long traces, summed in index order.
inline MeanTrace mean_of(const std::vector<Trace>& traces) {
    if (traces.empty()) return {};
    const auto len = traces.front().size();
    MeanTrace out(len);
    for (std::size_t k = 0; k < len; ++k) out[k].t = traces.front()[k].t;
    for (const auto& tr : traces) {
        for (std::size_t k = 0; k < len; ++k) {
            out[k].cc += tr[k].cc();
            out[k].vc += tr[k].vc();
            out[k].ic += tr[k].ic();
            out[k].oc += tr[k].oc;
            out[k].new_compromised += tr[k].new_compromised;
        }
    }
    const double n = static_cast<double>(traces.size());
    for (auto& r : out) {
        r.cc /= n;
        r.vc /= n;
        r.ic /= n;
        r.oc /= n;
        r.new_compromised /= n;
    }
    return out;
}

inline std::vector<Trace> run_all(const Experiment& exp, std::size_t jobs = 1) {
    std::vector<Trace> traces(exp.scenario().run.runs);
    parallel_for(traces.size(), jobs, [&](std::size_t i) { traces[i] = exp.run(i); });
    return traces;
}

inline MeanTrace monte_carlo(const Experiment& exp, std::size_t jobs = 1) {
    return mean_of(run_all(exp, jobs));
}

}  // namespace netdiv
