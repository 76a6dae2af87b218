// netdiv: generate networks, run scenarios and sweep parameters.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include "netdiv/engine.hpp"
#include "netdiv/metrics.hpp"
#include "netdiv/network_io.hpp"
#include "netdiv/scenario_io.hpp"
#include "netdiv/sweep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace netdiv;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    std::size_t jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "scenario JSON file")->required();
    cmd->add_option("--out", c.out, "output directory")->required();
    cmd->add_option("--seed", c.seed, "override run.seed");
    cmd->add_option("--runs", c.runs, "override run.runs");
    cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
}

Scenario load_with_overrides(const Common& c) {
    Scenario sc = load_scenario(c.config);
    if (c.seed) sc.run.seed = *c.seed;
    if (c.runs) sc.run.runs = *c.runs;
    return sc;
}

int cmd_gen_network(const SyntheticParams& p, const std::string& out) {
    const auto net = generate_synthetic_network(p);
    prepare_dir(out);
    const fs::path dir(out);
    {
        auto f = open_output(dir / "layer1.txt");
        write_edge_list(f, net.layers[0]);
    }
    {
        auto f = open_output(dir / "layer2.txt");
        write_edge_list(f, net.layers[1]);
    }
    {
        auto f = open_output(dir / "users.txt");
        for (UserId u : net.users) f << u << '\n';
    }
    std::cout << "users " << net.users.size() << '\n'
              << "layer1 " << net.layers[0].members.size() << " users " << net.layers[0].links.size() << " links\n"
              << "layer2 " << net.layers[1].members.size() << " users " << net.layers[1].links.size() << " links\n"
              << "shared " << overlap_count(p) << '\n';
    return 0;
}

int cmd_run(const Common& c, bool snapshot) {
    const Scenario sc = load_with_overrides(c);
    sc.validate();
    auto graph = std::make_shared<const CommGraph>(load_graph(sc.network));
    const Experiment exp(sc, graph);
    const MeanTrace trace = monte_carlo(exp, c.jobs);
    MeanTrace baseline = trace;
    if (sc.defender.strategy != Strategy::Monoculture)
        baseline = monte_carlo(Experiment(monoculture_of(sc), graph), c.jobs);
    const auto report = summarize(trace, &baseline, sc.defender.tau, sc.run.t_max);

    prepare_dir(c.out);
    const fs::path dir(c.out);
    {
        auto f = open_output(dir / "trace.csv");
        write_trace_csv(f, trace);
    }
    {
        auto f = open_output(dir / "summary.csv");
        write_summary_header(f);
        write_summary_rows(f, sc.defender.strategy, sc.defender.tau, report);
    }
    {
        auto f = open_output(dir / "scenario.json");
        f << scenario_to_json(sc).dump(2) << '\n';
    }
    if (snapshot) {
        for (std::size_t r = 0; r < sc.run.runs; ++r) {
            auto sim = exp.init_run(r);
            for (int t = 1; t <= sc.run.t_max; ++t) sim.step();
            auto f = open_output(dir / ("snapshot_" + std::to_string(r) + ".csv"));
            write_snapshot(f, sim.graph(), sim.config(), sim.state());
        }
    }
    std::cout << to_string(sc.defender.strategy) << " tau=" << fixed6(sc.defender.tau)
              << " tts=" << (report.tts ? std::to_string(*report.tts) : "NA")
              << " asd=" << (report.asd ? std::to_string(report.asd->steps) + (report.asd->censored ? "(censored)" : "") : "NA")
              << " awd=" << fixed6(report.awd) << " aoc=" << fixed6(report.aoc) << '\n';
    return 0;
}

int cmd_sweep(const Common& c, const std::vector<std::string>& specs) {
    const Scenario sc = load_with_overrides(c);
    std::vector<SweepAxis> axes;
    for (const auto& s : specs) axes.push_back(parse_sweep(s));
    const auto result = run_sweep(sc, axes, c.jobs);

    prepare_dir(c.out);
    const fs::path dir(c.out);
    {
        auto f = open_output(dir / "sweep.csv");
        write_sweep_csv(f, result.cells);
    }
    if (!result.derived.empty()) {
        auto f = open_output(dir / "derived.csv");
        write_derived_csv(f, result.derived);
    }
    std::cout << result.cells.size() << " cells, " << result.simulated << " ensembles simulated\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic network diversity simulator"};
    app.require_subcommand(1);

    SyntheticParams gen;
    gen.n_layer1 = 5702;
    gen.n_layer2 = 5540;
    gen.overlap_fraction = 4917.0 / 5540.0;
    gen.attachment_degree = 3;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-network", "write a synthetic two-layer social network");
    gen_cmd->add_option("--out", gen_out, "output directory")->required();
    gen_cmd->add_option("--n1", gen.n_layer1, "users in layer 1")->capture_default_str();
    gen_cmd->add_option("--n2", gen.n_layer2, "users in layer 2")->capture_default_str();
    gen_cmd->add_option("--overlap", gen.overlap_fraction, "shared users as a fraction of the smaller layer")
        ->capture_default_str();
    gen_cmd->add_option("--attachment", gen.attachment_degree, "preferential attachment degree")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();

    Common run_opts;
    bool snapshot = false;
    auto* run_cmd = app.add_subcommand("run", "run a scenario ensemble");
    add_common(run_cmd, run_opts);
    run_cmd->add_flag("--snapshot", snapshot, "write the final per-node state of every run");

    Common sweep_opts;
    std::vector<std::string> sweep_specs;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a Cartesian parameter sweep");
    add_common(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--sweep", sweep_specs, "key=start:stop:step or key=v1,v2,...")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*gen_cmd) return cmd_gen_network(gen, gen_out);
        if (*run_cmd) return cmd_run(run_opts, snapshot);
        if (*sweep_cmd) return cmd_sweep(sweep_opts, sweep_specs);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return 0;
}
