#include "critmech/error.hpp"
#include "critmech/harness.hpp"
#include "critmech/json_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

using namespace critmech;

namespace {

const std::vector<std::string> kGames{"zelda", "solarfox", "plants", "realportals"};

Json small_config(int runs, int threads) {
    Json j = Json::parse(R"({
        "schemaVersion": 1,
        "game": "zelda",
        "levels": ["lvl0", "lvl2"],
        "seed": 7,
        "scale": "desk",
        "agentDefaults": {"maxTreeNodes": 15, "rolloutDepth": 4},
        "agents": [{"kind": "vanilla"}, {"kind": "playtrace"}]
    })");
    j["runsPerLevel"] = runs;
    j["threads"] = threads;
    return j;
}

ErrorCode config_error(const Json& j) {
    try {
        experiment_config_from_json(j);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Io;
}

ResultRow row(std::string agent, Outcome outcome, double normalized) {
    ResultRow r;
    r.game = "g";
    r.level = "l";
    r.agent = std::move(agent);
    r.outcome = outcome;
    r.normalizedScore = normalized;
    return r;
}

} // namespace

TEST(Fixtures, LoadBundledGames) {
    for (const auto& g : kGames) {
        const auto f = load_fixture(g);
        EXPECT_EQ(f.name, g);
        EXPECT_EQ(f.levels.size(), 5u) << g;
        ASSERT_TRUE(f.humanTable) << g;
        EXPECT_FALSE(f.humanTable->rows.empty());
        for (const auto& lvl : f.levels) EXPECT_LT(lvl.scoreMin, lvl.scoreMax) << g << " " << lvl.name;
        EXPECT_FALSE(solution_traces(f).empty()) << g;
        for (const auto& t : solution_traces(f)) EXPECT_EQ(t.outcome, Outcome::Win) << g << " " << t.levelName;
    }
    EXPECT_EQ(load_fixture("plants").scoreMode, ScoreMode::Survival);
    EXPECT_EQ(load_fixture("realportals").scoreMode, ScoreMode::Clamped);
}

TEST(Fixtures, Missing) {
    try {
        load_fixture("pacman");
        FAIL() << "expected MISSING_FIXTURE";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingFixture);
    }
    EXPECT_THROW(load_fixture("zelda").level("lvl9"), Error);
}

TEST(Fixtures, HumanTableIdsExistInGraph) {
    for (const auto& g : kGames) {
        const auto f = load_fixture(g);
        const auto graph = build_mechanic_graph(build_atomic_graph(f.desc));
        for (const auto& r : f.humanTable->rows)
            for (const auto& id : r.ids) EXPECT_TRUE(graph.find(id)) << g << ": " << id;
    }
}

TEST(Discover, ReportsAgreeWithMatchRate) {
    for (const auto& g : kGames) {
        const auto f = load_fixture(g);
        for (auto method : {DiscoveryMethod::Playtrace, DiscoveryMethod::Baseline}) {
            const auto result = discover(f, method);
            const auto report = matchrate_report(f, method);
            EXPECT_EQ(report.discovered, result.path.mechanics);
            EXPECT_NEAR(report.computed, match_rate(*f.humanTable, result.path.id_set()), 1e-12);
            const auto printed = method == DiscoveryMethod::Playtrace ? f.humanTable->printedPlaytrace
                                                                       : f.humanTable->printedBaseline;
            if (printed) EXPECT_EQ(report.discrepancy, std::abs(report.computed * 100 - *printed) > 0.1);
            EXPECT_FALSE(format_report(report, *f.humanTable).empty());
        }
    }
}

TEST(Discover, JsonRoundTrip) {
    const auto f = load_fixture("zelda");
    const auto result = discover(f, DiscoveryMethod::Playtrace);
    const auto text = dump(to_json(result.path));
    EXPECT_EQ(critical_path_from_json(Json::parse(text)), result.path);
    EXPECT_EQ(dump(to_json(discover(f, DiscoveryMethod::Playtrace).path)), text);
    ASSERT_TRUE(result.selected);
    EXPECT_EQ(playtrace_from_json(to_json(*result.selected)), *result.selected);
}

TEST(Seeds, DerivedPerRun) {
    EXPECT_EQ(derive_seed(1, "zelda", "lvl0", "vanilla", 0), derive_seed(1, "zelda", "lvl0", "vanilla", 0));
    std::set<std::uint64_t> seen;
    for (std::uint64_t base : {0ULL, 1ULL})
        for (const auto* level : {"lvl0", "lvl1"})
            for (const auto* agent : {"vanilla", "playtrace"})
                for (int run = 0; run < 5; ++run) seen.insert(derive_seed(base, "zelda", level, agent, run));
    EXPECT_EQ(seen.size(), 40u);
    EXPECT_NE(derive_seed(0, "ab", "c", "x", 0), derive_seed(0, "a", "bc", "x", 0));
}

TEST(Normalize, Bounds) {
    FixtureLevel lvl;
    lvl.scoreMin = 0;
    lvl.scoreMax = 4;
    EXPECT_DOUBLE_EQ(normalize_score(ScoreMode::Score, lvl, 2), 0.5);
    EXPECT_DOUBLE_EQ(normalize_score(ScoreMode::Score, lvl, 9), 1.0);
    EXPECT_DOUBLE_EQ(normalize_score(ScoreMode::Score, lvl, -3), 0.0);
    EXPECT_DOUBLE_EQ(normalize_score(ScoreMode::Clamped, lvl, 6), 1.0);
    lvl.scoreMax = 1000;
    EXPECT_DOUBLE_EQ(normalize_score(ScoreMode::Survival, lvl, 250), 0.25);

    std::mt19937_64 rng(1);
    for (int i = 0; i < 1000; ++i) {
        lvl.scoreMin = static_cast<double>(static_cast<int>(rng() % 20) - 10);
        lvl.scoreMax = lvl.scoreMin + 1 + static_cast<double>(rng() % 50);
        const int raw = static_cast<int>(rng() % 200) - 100;
        for (auto mode : {ScoreMode::Score, ScoreMode::Survival, ScoreMode::Clamped}) {
            const double v = normalize_score(mode, lvl, raw);
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Config, BundledFilesLoad) {
    const auto desk = load_experiment_configs(data_root() + "/configs/desk.json");
    ASSERT_EQ(desk.size(), 2u);
    EXPECT_EQ(desk[0].agents.front().config.maxTreeNodes, 1000);
    EXPECT_EQ(desk[0].agents.front().config.rolloutDepth, 20);

    const auto full = load_experiment_configs(data_root() + "/configs/full.json");
    ASSERT_EQ(full.size(), 4u);
    for (const auto& c : full) {
        EXPECT_EQ(c.levels.size(), 5u);
        EXPECT_EQ(c.runsPerLevel, 20);
        ASSERT_EQ(c.agents.size(), 3u);
        for (const auto& a : c.agents) {
            EXPECT_EQ(a.config.maxTreeNodes, 5000);
            EXPECT_EQ(a.config.rolloutDepth, 50);
            EXPECT_DOUBLE_EQ(a.config.explorationC, 0.125);
        }
    }
}

TEST(Config, Errors) {
    auto base = small_config(1, 1);
    EXPECT_EQ(config_error(Json::array()), ErrorCode::BadConfig);
    auto j = base;
    j["scale"] = "huge";
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j["runsPerLevel"] = 0;
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j["agents"] = Json::array();
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j["agents"][0]["kind"] = "oracle";
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j.erase("game");
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j["schemaVersion"] = 99;
    EXPECT_EQ(config_error(j), ErrorCode::BadConfig);
    j = base;
    j["agentDefaults"]["maxTreeNodes"] = 0;
    EXPECT_THROW(experiment_config_from_json(j).agents[0].config.check(), Error);

    auto unknownGame = experiment_config_from_json(base);
    unknownGame.game = "pacman";
    EXPECT_THROW(run_experiment(unknownGame), Error);
}

TEST(Experiment, RowsAndDeterminism) {
    const auto cfg = experiment_config_from_json(small_config(2, 1));
    const auto rows = run_experiment(cfg);
    ASSERT_EQ(rows.size(), cfg.levels.size() * 2 * cfg.agents.size());
    size_t k = 0;
    for (const auto& level : cfg.levels)
        for (const auto& agent : cfg.agents)
            for (int run = 0; run < 2; ++run, ++k) {
                EXPECT_EQ(rows[k].level, level);
                EXPECT_EQ(rows[k].agent, agent.name);
                EXPECT_EQ(rows[k].runIndex, run);
                EXPECT_EQ(rows[k].seed, derive_seed(7, "zelda", level, agent.name, run));
                EXPECT_NE(rows[k].outcome, Outcome::Ongoing);
                EXPECT_GE(rows[k].normalizedScore, 0.0);
                EXPECT_LE(rows[k].normalizedScore, 1.0);
            }

    EXPECT_EQ(to_csv(run_experiment(cfg)), to_csv(rows));
    const auto threaded = experiment_config_from_json(small_config(2, 3));
    EXPECT_EQ(run_experiment(threaded), rows);
}

TEST(Experiment, SingleRunRepeats) {
    auto j = small_config(1, 1);
    j["agents"] = Json::array({Json{{"kind", "baseline"}}});
    const auto cfg = experiment_config_from_json(j);
    const auto a = run_experiment(cfg);
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(run_experiment(cfg), a);
}

TEST(Csv, Format) {
    auto r = row("vanilla", Outcome::Win, 0.25);
    r.runIndex = 3;
    r.seed = 42;
    r.rawScore = 1;
    r.ticks = 17;
    const auto csv = to_csv({r});
    EXPECT_EQ(csv, "game,level,agent,runIndex,seed,outcome,rawScore,ticks,normalizedScore\n"
                   "g,l,vanilla,3,42,Win,1,17,0.250000\n");
}

TEST(Summary, WinRateAndInterval) {
    const std::vector<double> scores{0.0, 0.5, 1.0, 1.0};
    std::vector<ResultRow> rows;
    for (size_t i = 0; i < scores.size(); ++i)
        rows.push_back(row("a", i % 2 ? Outcome::Win : Outcome::Loss, scores[i]));
    rows.push_back(row("b", Outcome::Win, 1.0));
    const auto summary = summarize(rows);
    ASSERT_EQ(summary.size(), 2u);
    EXPECT_EQ(summary[0].agent, "a");
    EXPECT_EQ(summary[0].runs, 4);
    EXPECT_EQ(summary[0].wins, 2);
    EXPECT_DOUBLE_EQ(summary[0].winRate, 0.5);
    const double mean = 0.625;
    EXPECT_DOUBLE_EQ(summary[0].meanNormalized, mean);
    double ss = 0;
    for (double s : scores) ss += (s - mean) * (s - mean);
    EXPECT_NEAR(summary[0].ciHalfWidth, 1.96 * std::sqrt(ss / 3.0) / 2.0, 1e-12);
    EXPECT_EQ(summary[1].runs, 1);
    EXPECT_EQ(summary[1].ciHalfWidth, 0.0);
    EXPECT_NE(format_summary(summary).find("a"), std::string::npos);
}
