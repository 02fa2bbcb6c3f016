#include "critmech/agents.hpp"
#include "critmech/discovery.hpp"
#include "critmech/engine.hpp"
#include "critmech/error.hpp"
#include "critmech/graph.hpp"
#include "critmech/harness.hpp"
#include "critmech/json_io.hpp"
#include "critmech/vgdl.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace critmech;

namespace {

// A game argument is either a bundled fixture name or a path to a .vgd file.
GameDescription load_description(const std::string& game, const std::string& root) {
    if (std::filesystem::path(game).extension() == ".vgd") return parse_game(read_file(game));
    return load_fixture(game, root).desc;
}

DiscoveryMethod method_arg(const std::string& s) {
    auto m = parse_method(s);
    if (!m) throw Error(ErrorCode::BadConfig, "method must be playtrace or baseline");
    return *m;
}

void emit(const std::string& text, const std::string& outPath) {
    if (outPath.empty()) std::cout << text;
    else write_file(outPath, text);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Critical mechanic discovery for grid games"};
    app.require_subcommand(1);
    std::string root = data_root();
    app.add_option("--data", root, "Directory holding games/ and configs/");

    std::string game, level, script, outPath, method = "playtrace", configPath, agentSpec = "vanilla";
    std::uint64_t seed = 0;
    bool dot = false, json = false, atomic = false, mechanic = false;
    int threads = 1, nodes = 1000, depth = 20;

    auto* parse = app.add_subcommand("parse", "Parse and validate a game description");
    parse->add_option("game", game)->required();

    auto* graph = app.add_subcommand("graph", "Export the mechanic or atomic graph");
    graph->add_option("game", game)->required();
    auto* dotFlag = graph->add_flag("--dot", dot, "DOT output (default)");
    graph->add_flag("--json", json, "JSON output")->excludes(dotFlag);
    auto* mechFlag = graph->add_flag("--mechanic", mechanic, "Mechanic graph (default)");
    graph->add_flag("--atomic", atomic, "Atomic interaction graph")->excludes(mechFlag);
    graph->add_option("-o,--out", outPath);

    auto* replayCmd = app.add_subcommand("replay", "Replay an action script into a playtrace");
    replayCmd->add_option("game", game)->required();
    replayCmd->add_option("level", level)->required();
    replayCmd->add_option("script", script)->required();
    replayCmd->add_option("--seed", seed);
    replayCmd->add_option("-o,--out", outPath);

    auto* discoverCmd = app.add_subcommand("discover", "Discover the critical mechanics of a game");
    discoverCmd->add_option("game", game)->required();
    discoverCmd->add_option("--method", method)->check(CLI::IsMember({"playtrace", "baseline"}));
    discoverCmd->add_option("-o,--out", outPath);

    auto* matchCmd = app.add_subcommand("matchrate", "Compare discovered mechanics with the human table");
    matchCmd->add_option("game", game)->required();
    matchCmd->add_option("--method", method)->check(CLI::IsMember({"playtrace", "baseline"}));

    auto* experimentCmd = app.add_subcommand("experiment", "Run an agent comparison");
    experimentCmd->add_option("--config", configPath)->required();
    experimentCmd->add_option("--csv", outPath, "Write result rows here");
    experimentCmd->add_option("--threads", threads, "Override worker count (0 = all cores)");

    auto* playCmd = app.add_subcommand("play", "Play one episode with an agent");
    playCmd->add_option("game", game)->required();
    playCmd->add_option("level", level)->required();
    playCmd->add_option("--agent", agentSpec, "vanilla or mech:<critical path json>");
    playCmd->add_option("--seed", seed);
    playCmd->add_option("--nodes", nodes);
    playCmd->add_option("--depth", depth);
    playCmd->add_option("-o,--out", outPath, "Write the episode playtrace here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse) {
            const auto desc = load_description(game, root);
            std::cout << to_text(desc);
            for (const auto& d : validate(desc))
                std::cerr << (d.severity == Severity::Error ? "error " : "warning ") << d.code << ": " << d.message
                          << "\n";
        } else if (*graph) {
            const auto desc = load_description(game, root);
            const auto atomicGraph = build_atomic_graph(desc);
            if (atomic) emit(json ? dump(to_json(atomicGraph)) : export_dot(atomicGraph), outPath);
            else {
                const auto mg = build_mechanic_graph(atomicGraph);
                emit(json ? dump(to_json(mg)) : export_dot(mg), outPath);
            }
        } else if (*replayCmd) {
            const auto fixture = load_fixture(game, root);
            const auto actions = parse_actions(read_file(script));
            const auto trace = replay(fixture.desc, fixture.level(level).grid, seed, actions, fixture.name, level);
            emit(dump(to_json(trace)), outPath);
        } else if (*discoverCmd) {
            const auto fixture = load_fixture(game, root);
            try {
                emit(dump(to_json(discover(fixture, method_arg(method)).path)), outPath);
            } catch (const NoWinPathError& e) {
                std::cerr << e.what() << "\npartial path:\n" << dump(to_json(e.partial()));
                return 1;
            }
        } else if (*matchCmd) {
            const auto fixture = load_fixture(game, root);
            const auto report = matchrate_report(fixture, method_arg(method));
            std::cout << format_report(report, *fixture.humanTable);
        } else if (*experimentCmd) {
            std::vector<ResultRow> all;
            for (auto cfg : load_experiment_configs(configPath)) {
                if (experimentCmd->count("--threads")) cfg.threads = threads;
                auto rows = run_experiment(cfg, root);
                all.insert(all.end(), rows.begin(), rows.end());
            }
            if (!outPath.empty()) write_file(outPath, to_csv(all));
            else std::cout << to_csv(all) << "\n";
            std::cout << format_summary(summarize(all));
        } else if (*playCmd) {
            const auto fixture = load_fixture(game, root);
            AgentConfig cfg;
            cfg.maxTreeNodes = nodes;
            cfg.rolloutDepth = depth;
            if (agentSpec.rfind("mech:", 0) == 0) {
                cfg.evaluator = EvaluatorKind::Mechanic;
                cfg.criticalSet = critical_path_from_json(read_json(agentSpec.substr(5))).id_set();
            } else if (agentSpec != "vanilla") {
                throw Error(ErrorCode::BadConfig, "agent must be vanilla or mech:<file>");
            }
            const auto compiled = Game::compile(fixture.desc, fixture.level(level).grid);
            const auto ep = play_episode(compiled, cfg, seed);
            std::cout << "outcome " << to_string(ep.outcome) << " score " << ep.score << " ticks " << ep.ticks << "\n";
            if (!outPath.empty()) {
                Playtrace trace;
                trace.gameName = fixture.name;
                trace.levelName = level;
                trace.seed = seed;
                trace.actions = ep.actions;
                for (const auto& e : ep.events) trace.events.push_back(to_trace_event(*compiled, e));
                trace.finalTick = ep.ticks;
                trace.finalScore = ep.score;
                trace.outcome = ep.outcome;
                write_file(outPath, dump(to_json(trace)));
            }
        }
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}
