#pragma once

#include "critmech/engine.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace critmech {

enum class EvaluatorKind { Vanilla, Mechanic };

struct AgentConfig {
    double explorationC = 0.125;
    int maxTreeNodes = 5000;
    int rolloutDepth = 50;
    std::uint64_t seed = 0;
    EvaluatorKind evaluator = EvaluatorKind::Vanilla;
    /// Mechanic ids rewarded by the mechanic evaluator.
    std::set<std::string> criticalSet;
    double winBonus = 1000.0;
    double lossPenalty = -1000.0;
    double discountBase = 1.1;
    /// Whether occurrence counts include the episode so far, or only the current simulation.
    bool countHistory = true;

    /// Throws BadConfig when a field is out of range.
    void check() const;
};

/// Reward of one critical event: 1 / (frequency * base^(eventTick - rootTick)).
double mechanic_reward(int frequency, int ticksAhead, double discountBase = 1.1);

struct SimulationRecord {
    /// Events from the root tick through the selected path and the rollout.
    std::vector<GameEvent> events;
    Outcome terminalOutcome = Outcome::Ongoing;
    int rootTick = 0;
};

double vanilla_evaluate(const SimulationRecord& sim, const GameState& endState, const AgentConfig& cfg);

/// Sum of `mechanic_reward` over critical events plus the terminal bonus; the game score is
/// not part of it. `history` holds the episode events before the root.
double mechanic_evaluate(const SimulationRecord& sim, const Game& game, const std::vector<GameEvent>& history,
                         const AgentConfig& cfg);

struct SearchNode {
    /// Set on the root only; deeper nodes are re-simulated from it on every iteration.
    GameState state;
    Action incomingAction = Action::Nil;
    int visitCount = 0;
    double totalValue = 0.0;
    /// Tree indices per action, -1 when not expanded.
    std::array<int, 6> children{-1, -1, -1, -1, -1, -1};
    int parent = -1;
    int depthTick = 0;
    /// Events of the step into this node, as sampled when it was expanded.
    std::vector<GameEvent> events;
    std::vector<Action> legal;
    /// Terminal, or every action expanded and every child exhausted.
    bool exhausted = false;

    double mean() const { return visitCount ? totalValue / visitCount : 0.0; }
};

/// UCB1 with the mean already normalized to [0, 1].
double ucb1_score(double normalizedMean, int parentVisits, int childVisits, double explorationC);

/// UCB1 for `child` under `parent`, normalizing means with the observed return range.
double ucb1(const SearchNode& parent, const SearchNode& child, const AgentConfig& cfg, double minReturn,
            double maxReturn);

struct Decision {
    Action action = Action::Nil;
    int expansions = 0;
    int iterations = 0;
    std::array<int, 6> rootVisits{};
};

/// One MCTS decision from `state`; `state` is never modified.
Decision decide_detailed(const GameState& state, const AgentConfig& cfg, const std::vector<GameEvent>& history);

inline Action decide(const GameState& state, const AgentConfig& cfg, const std::vector<GameEvent>& history) {
    return decide_detailed(state, cfg, history).action;
}

} // namespace critmech
