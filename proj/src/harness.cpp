#include "critmech/harness.hpp"

#include "critmech/error.hpp"
#include "critmech/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace critmech {

namespace fs = std::filesystem;

const FixtureLevel& GameFixture::level(std::string_view levelName) const {
    for (const auto& l : levels)
        if (l.name == levelName) return l;
    throw Error(ErrorCode::MissingFixture, "game '" + name + "' has no level '" + std::string(levelName) + "'");
}

std::string data_root() {
    if (const char* env = std::getenv("CRITMECH_DATA")) return env;
#ifdef CRITMECH_DATA_DIR
    return CRITMECH_DATA_DIR;
#else
    return ".";
#endif
}

namespace {

ScoreMode parse_score_mode(const std::string& s) {
    if (s == "score") return ScoreMode::Score;
    if (s == "survival") return ScoreMode::Survival;
    if (s == "clamped") return ScoreMode::Clamped;
    throw Error(ErrorCode::BadConfig, "unknown scoreMode '" + s + "'");
}

std::string in_dir(const fs::path& dir, const std::string& file) { return (dir / file).string(); }

} // namespace

GameFixture load_fixture(const std::string& name, const std::string& root) {
    fs::path dir = fs::path(root) / "games" / name;
    if (!fs::is_directory(dir) && fs::is_directory(name)) dir = name;
    if (!fs::exists(dir / "manifest.json"))
        throw Error(ErrorCode::MissingFixture, "no fixture '" + name + "' (looked in " + dir.string() + ")");
    const Json manifest = read_json(in_dir(dir, "manifest.json"));
    if (manifest.value("schemaVersion", kSchemaVersion) != kSchemaVersion)
        throw Error(ErrorCode::BadConfig, "manifest of '" + name + "' has an unsupported schemaVersion");

    GameFixture f;
    try {
        f.name = manifest.at("game").get<std::string>();
        f.directory = dir.string();
        f.desc = parse_game(read_file(in_dir(dir, manifest.at("description").get<std::string>())));
        f.scoreMode = parse_score_mode(manifest.value("scoreMode", std::string("score")));
        for (const auto& lj : manifest.at("levels")) {
            FixtureLevel level;
            level.name = lj.at("name").get<std::string>();
            level.grid = parse_level(read_file(in_dir(dir, lj.at("file").get<std::string>())), f.desc);
            level.scoreMin = lj.at("scoreMin").get<double>();
            level.scoreMax = lj.at("scoreMax").get<double>();
            if (!(level.scoreMin < level.scoreMax))
                throw Error(ErrorCode::BadConfig, f.name + "/" + level.name + ": scoreMin must be below scoreMax");
            for (const auto& sj : lj.value("solutions", Json::array())) {
                SolutionScript script;
                script.file = sj.at("script").get<std::string>();
                script.seed = sj.value("seed", std::uint64_t{0});
                script.actions = parse_actions(read_file(in_dir(dir, script.file)));
                level.solutions.push_back(std::move(script));
            }
            f.levels.push_back(std::move(level));
        }
        if (manifest.contains("humanTable"))
            f.humanTable = human_table_from_json(read_json(in_dir(dir, manifest.at("humanTable").get<std::string>())));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadConfig, "manifest of '" + name + "': " + e.what());
    }
    return f;
}

std::vector<Playtrace> solution_traces(const GameFixture& fixture) {
    std::vector<Playtrace> out;
    for (const auto& level : fixture.levels)
        for (const auto& s : level.solutions)
            out.push_back(replay(fixture.desc, level.grid, s.seed, s.actions, fixture.name, level.name));
    return out;
}

DiscoveryResult discover(const GameFixture& fixture, DiscoveryMethod method) {
    const AtomicGraph atomic = build_atomic_graph(fixture.desc);
    DiscoveryResult result;
    if (method == DiscoveryMethod::Baseline) {
        result.path = atdelfi_baseline(atomic);
        return result;
    }
    const MechanicGraph graph = build_mechanic_graph(atomic);
    const auto traces = solution_traces(fixture);
    const Playtrace& chosen = select_playtrace(traces);
    const MechanicGraph annotated = annotate_frames(graph, chosen);
    result.path = expand_siblings(find_critical_path(annotated), fixture.desc, graph);
    result.selected = chosen;
    return result;
}

MatchRateReport matchrate_report(const GameFixture& fixture, DiscoveryMethod method) {
    if (!fixture.humanTable) throw Error(ErrorCode::MissingFixture, "game '" + fixture.name + "' has no human table");
    const auto& table = *fixture.humanTable;
    MatchRateReport r;
    r.game = fixture.name;
    r.method = method;
    const auto path = discover(fixture, method).path;
    r.discovered = path.mechanics;
    const auto ids = path.id_set();
    r.matchedRows = matched_rows(table, ids);
    r.computed = match_rate(table, ids);
    r.printed = method == DiscoveryMethod::Playtrace ? table.printedPlaytrace : table.printedBaseline;
    r.discrepancy = r.printed && std::abs(r.computed * 100.0 - *r.printed) > 0.1;
    return r;
}

std::string format_report(const MatchRateReport& report, const HumanMechanicTable& table) {
    std::ostringstream out;
    out << report.game << " (" << to_string(report.method) << ")\n";
    out << "discovered:\n";
    for (const auto& id : report.discovered) out << "  " << id << "\n";
    out << "rows:\n";
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const bool hit = std::find(report.matchedRows.begin(), report.matchedRows.end(), i) != report.matchedRows.end();
        const bool ref = report.method == DiscoveryMethod::Playtrace ? table.rows[i].playtraceMark
                                                                     : table.rows[i].baselineMark;
        char pct[32];
        std::snprintf(pct, sizeof pct, "%5.1f%%", table.rows[i].percentage);
        out << "  [" << (hit ? 'X' : ' ') << "|" << (ref ? 'X' : ' ') << "] " << pct << "  " << table.rows[i].label
            << "\n";
    }
    char line[160];
    std::snprintf(line, sizeof line, "match rate: %.1f%%", report.computed * 100.0);
    out << line;
    if (report.printed) {
        std::snprintf(line, sizeof line, "  printed: %.2f%%", *report.printed);
        out << line;
    }
    if (report.discrepancy) out << "  DISCREPANCY";
    out << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------------------------

std::string_view to_string(AgentKind kind) {
    switch (kind) {
    case AgentKind::Vanilla: return "vanilla";
    case AgentKind::BaselineAugmented: return "baseline";
    case AgentKind::PlaytraceAugmented: return "playtrace";
    }
    return "?";
}

std::optional<AgentKind> parse_agent_kind(std::string_view token) {
    if (token == "vanilla") return AgentKind::Vanilla;
    if (token == "baseline") return AgentKind::BaselineAugmented;
    if (token == "playtrace") return AgentKind::PlaytraceAugmented;
    return std::nullopt;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    if (!j.is_object()) throw Error(ErrorCode::BadConfig, "experiment config must be an object");
    if (j.value("schemaVersion", kSchemaVersion) != kSchemaVersion)
        throw Error(ErrorCode::BadConfig, "experiment config: unsupported schemaVersion");
    try {
        ExperimentConfig c;
        c.game = j.at("game").get<std::string>();
        c.levels = j.at("levels").get<std::vector<std::string>>();
        c.runsPerLevel = j.value("runsPerLevel", c.runsPerLevel);
        c.seed = j.value("seed", c.seed);
        c.scale = j.value("scale", c.scale);
        c.threads = j.value("threads", c.threads);
        AgentConfig defaults;
        if (c.scale == "desk") {
            defaults.maxTreeNodes = 1000;
            defaults.rolloutDepth = 20;
        } else if (c.scale != "full") {
            throw Error(ErrorCode::BadConfig, "scale must be 'desk' or 'full'");
        }
        if (j.contains("agentDefaults")) defaults = agent_config_from_json(j.at("agentDefaults"), defaults);
        for (const auto& aj : j.at("agents")) {
            AgentSpec a;
            auto kind = parse_agent_kind(aj.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::BadConfig, "unknown agent kind " + aj.at("kind").dump());
            a.kind = *kind;
            a.name = aj.value("name", std::string(to_string(a.kind)));
            a.config = agent_config_from_json(aj, defaults);
            c.agents.push_back(std::move(a));
        }
        if (c.levels.empty()) throw Error(ErrorCode::BadConfig, "experiment needs at least one level");
        if (c.runsPerLevel < 1) throw Error(ErrorCode::BadConfig, "runsPerLevel must be >= 1");
        if (c.agents.empty()) throw Error(ErrorCode::BadConfig, "experiment needs at least one agent");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string("experiment config: ") + e.what());
    }
}

std::vector<ExperimentConfig> load_experiment_configs(const std::string& path) {
    const Json j = read_json(path);
    std::vector<ExperimentConfig> out;
    if (j.is_array())
        for (const auto& e : j) out.push_back(experiment_config_from_json(e));
    else out.push_back(experiment_config_from_json(j));
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view game, std::string_view level, std::string_view agent,
                          int runIndex) {
    // FNV-1a over every key field in order; strings end with a separator so ("ab","c") and ("a","bc") differ.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto byte = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    auto word = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (8 * i)));
    };
    auto text = [&](std::string_view s) {
        for (unsigned char c : s) byte(c);
        byte(0xff);
    };
    word(base);
    text(game);
    text(level);
    text(agent);
    word(static_cast<std::uint64_t>(runIndex));
    return mix64(h);
}

double normalize_score(ScoreMode mode, const FixtureLevel& level, int rawScore) {
    double raw = rawScore;
    if (mode == ScoreMode::Clamped) raw = std::min(raw, level.scoreMax);
    const double v = (raw - level.scoreMin) / (level.scoreMax - level.scoreMin);
    return std::clamp(v, 0.0, 1.0);
}

EpisodeResult play_episode(const std::shared_ptr<const Game>& game, const AgentConfig& agent, std::uint64_t seed) {
    constexpr int kTickCap = 100000;
    GameState state = init(game, seed);
    EpisodeResult r;
    settle(state, r.events);
    AgentConfig cfg = agent;
    const std::uint64_t agentSeed = mix64(seed ^ 0x5bd1e995ULL);
    while (state.outcome() == Outcome::Ongoing) {
        if (state.tick() >= kTickCap)
            throw Error(ErrorCode::ContractViolation, "episode exceeded " + std::to_string(kTickCap) + " ticks");
        cfg.seed = agentSeed;
        Action a = decide(state, cfg, r.events);
        r.actions.push_back(a);
        advance(state, a, r.events);
    }
    r.outcome = state.outcome();
    r.score = state.score();
    r.ticks = state.tick();
    return r;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const std::string& root) {
    const GameFixture fixture = load_fixture(cfg.game, root);
    std::vector<AgentSpec> agents = cfg.agents;
    std::map<AgentKind, std::set<std::string>> sets;
    for (auto& a : agents) {
        if (a.kind == AgentKind::Vanilla) {
            a.config.evaluator = EvaluatorKind::Vanilla;
            continue;
        }
        const auto method = a.kind == AgentKind::PlaytraceAugmented ? DiscoveryMethod::Playtrace : DiscoveryMethod::Baseline;
        if (!sets.contains(a.kind)) {
            try {
                sets[a.kind] = discover(fixture, method).path.id_set();
            } catch (const Error& e) {
                throw Error(e.code(), "discovery for " + fixture.name + " (" + std::string(to_string(method)) +
                                          ") failed: " + e.what());
            }
        }
        a.config.evaluator = EvaluatorKind::Mechanic;
        a.config.criticalSet = sets[a.kind];
    }

    struct Job {
        size_t level;
        size_t agent;
        int run;
    };
    std::vector<Job> jobs;
    std::vector<std::shared_ptr<const Game>> games;
    for (size_t l = 0; l < cfg.levels.size(); ++l) {
        games.push_back(Game::compile(fixture.desc, fixture.level(cfg.levels[l]).grid));
        for (size_t a = 0; a < agents.size(); ++a)
            for (int r = 0; r < cfg.runsPerLevel; ++r) jobs.push_back({l, a, r});
    }

    std::vector<ResultRow> rows(jobs.size());
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failureMutex;
    auto worker = [&] {
        for (size_t k = next++; k < jobs.size(); k = next++) {
            try {
                const Job& job = jobs[k];
                const auto& level = fixture.level(cfg.levels[job.level]);
                const auto& agent = agents[job.agent];
                ResultRow row;
                row.game = fixture.name;
                row.level = level.name;
                row.agent = agent.name;
                row.runIndex = job.run;
                row.seed = derive_seed(cfg.seed, fixture.name, level.name, agent.name, job.run);
                const auto ep = play_episode(games[job.level], agent.config, row.seed);
                row.outcome = ep.outcome;
                row.ticks = ep.ticks;
                row.rawScore = fixture.scoreMode == ScoreMode::Survival ? ep.ticks
                               : fixture.scoreMode == ScoreMode::Clamped
                                   ? std::min(ep.score, static_cast<int>(level.scoreMax))
                                   : ep.score;
                row.normalizedScore = normalize_score(fixture.scoreMode, level, row.rawScore);
                rows[k] = std::move(row);
            } catch (...) {
                std::lock_guard lock(failureMutex);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
            }
        }
    };
    unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(1, jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out << "game,level,agent,runIndex,seed,outcome,rawScore,ticks,normalizedScore\n";
    for (const auto& r : rows) {
        char norm[32];
        std::snprintf(norm, sizeof norm, "%.6f", r.normalizedScore);
        out << r.game << ',' << r.level << ',' << r.agent << ',' << r.runIndex << ',' << r.seed << ','
            << to_string(r.outcome) << ',' << r.rawScore << ',' << r.ticks << ',' << norm << '\n';
    }
    return out.str();
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
    std::vector<SummaryRow> out;
    std::map<std::pair<std::string, std::string>, std::vector<const ResultRow*>> groups;
    for (const auto& r : rows) {
        auto key = std::make_pair(r.game, r.agent);
        if (!groups.contains(key)) out.push_back({r.game, r.agent});
        groups[key].push_back(&r);
    }
    for (auto& s : out) {
        const auto& g = groups[{s.game, s.agent}];
        s.runs = static_cast<int>(g.size());
        double sum = 0;
        for (const auto* r : g) {
            s.wins += r->outcome == Outcome::Win;
            sum += r->normalizedScore;
        }
        s.winRate = static_cast<double>(s.wins) / s.runs;
        s.meanNormalized = sum / s.runs;
        if (s.runs > 1) {
            double ss = 0;
            for (const auto* r : g) ss += (r->normalizedScore - s.meanNormalized) * (r->normalizedScore - s.meanNormalized);
            s.ciHalfWidth = 1.96 * std::sqrt(ss / (s.runs - 1)) / std::sqrt(static_cast<double>(s.runs));
        }
    }
    return out;
}

std::string format_summary(const std::vector<SummaryRow>& summary) {
    std::ostringstream out;
    char line[200];
    std::snprintf(line, sizeof line, "%-12s %-12s %5s %5s %8s %10s %8s\n", "game", "agent", "runs", "wins", "winRate",
                  "meanNorm", "ci95");
    out << line;
    for (const auto& s : summary) {
        std::snprintf(line, sizeof line, "%-12s %-12s %5d %5d %8.3f %10.3f %8.3f\n", s.game.c_str(), s.agent.c_str(),
                      s.runs, s.wins, s.winRate, s.meanNormalized, s.ciHalfWidth);
        out << line;
    }
    return out.str();
}

} // namespace critmech
