#pragma once

#include "critmech/agents.hpp"
#include "critmech/discovery.hpp"
#include "critmech/engine.hpp"
#include "critmech/graph.hpp"
#include "critmech/vgdl.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace critmech {

/// How raw results map to the normalized score.
enum class ScoreMode {
    Score,    // game score
    Survival, // ticks survived
    Clamped,  // game score capped at the level maximum
};

struct SolutionScript {
    std::string file;
    std::uint64_t seed = 0;
    std::vector<Action> actions;
};

struct FixtureLevel {
    std::string name;
    LevelGrid grid;
    double scoreMin = 0;
    double scoreMax = 1;
    std::vector<SolutionScript> solutions;
};

struct GameFixture {
    std::string name;
    std::string directory;
    GameDescription desc;
    std::vector<FixtureLevel> levels;
    ScoreMode scoreMode = ScoreMode::Score;
    std::optional<HumanMechanicTable> humanTable;

    const FixtureLevel& level(std::string_view name) const;
};

/// Root holding the bundled `games/` and `configs/` directories.
std::string data_root();

/// Loads `games/<name>/` under `root` (or a directory path given directly).
GameFixture load_fixture(const std::string& name, const std::string& root = data_root());

/// Replays every bundled solution script.
std::vector<Playtrace> solution_traces(const GameFixture& fixture);

struct DiscoveryResult {
    CriticalPath path;
    /// Playtrace method: the trace the frames came from.
    std::optional<Playtrace> selected;
};

/// Full pipeline: graphs, then either trace replay + selection + search + siblings, or the baseline.
DiscoveryResult discover(const GameFixture& fixture, DiscoveryMethod method);

struct MatchRateReport {
    std::string game;
    DiscoveryMethod method = DiscoveryMethod::Playtrace;
    std::vector<std::string> discovered;
    std::vector<size_t> matchedRows;
    double computed = 0;         // fraction
    std::optional<double> printed; // percent
    /// Computed and printed differ by more than 0.1 percentage points.
    bool discrepancy = false;
};

MatchRateReport matchrate_report(const GameFixture& fixture, DiscoveryMethod method);
std::string format_report(const MatchRateReport& report, const HumanMechanicTable& table);

// ---------------------------------------------------------------------------------------------
// Experiments

enum class AgentKind { Vanilla, BaselineAugmented, PlaytraceAugmented };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> parse_agent_kind(std::string_view token);

struct AgentSpec {
    std::string name;
    AgentKind kind = AgentKind::Vanilla;
    AgentConfig config;
};

struct ExperimentConfig {
    std::string game;
    std::vector<std::string> levels;
    int runsPerLevel = 10;
    std::vector<AgentSpec> agents;
    std::uint64_t seed = 0;
    std::string scale = "desk";
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 1;
};

ExperimentConfig experiment_config_from_json(const nlohmann::ordered_json& j);
/// A config file holds one experiment object or an array of them.
std::vector<ExperimentConfig> load_experiment_configs(const std::string& path);

struct ResultRow {
    std::string game;
    std::string level;
    std::string agent;
    int runIndex = 0;
    std::uint64_t seed = 0;
    Outcome outcome = Outcome::Ongoing;
    int rawScore = 0;
    int ticks = 0;
    double normalizedScore = 0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

std::uint64_t derive_seed(std::uint64_t base, std::string_view game, std::string_view level, std::string_view agent,
                          int runIndex);

double normalize_score(ScoreMode mode, const FixtureLevel& level, int rawScore);

struct EpisodeResult {
    Outcome outcome = Outcome::Ongoing;
    int score = 0;
    int ticks = 0;
    std::vector<Action> actions;
    std::vector<GameEvent> events;
};

/// One episode of `agent` on a compiled level; the game seed and agent seeds derive from `seed`.
EpisodeResult play_episode(const std::shared_ptr<const Game>& game, const AgentConfig& agent, std::uint64_t seed);

/// Rows in canonical order (game, level, agent, run), whatever the completion order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg, const std::string& root = data_root());

std::string to_csv(const std::vector<ResultRow>& rows);

struct SummaryRow {
    std::string game;
    std::string agent;
    int runs = 0;
    int wins = 0;
    double winRate = 0;
    double meanNormalized = 0;
    /// 95% half-width, normal approximation.
    double ciHalfWidth = 0;
};

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
std::string format_summary(const std::vector<SummaryRow>& summary);

} // namespace critmech
