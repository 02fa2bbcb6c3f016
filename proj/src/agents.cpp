#include "critmech/agents.hpp"

#include "critmech/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace critmech {

void AgentConfig::check() const {
    if (!(explorationC >= 0)) throw Error(ErrorCode::BadConfig, "explorationC must be >= 0");
    if (maxTreeNodes < 1) throw Error(ErrorCode::BadConfig, "maxTreeNodes must be >= 1");
    if (rolloutDepth < 0) throw Error(ErrorCode::BadConfig, "rolloutDepth must be >= 0");
    if (!(discountBase > 1)) throw Error(ErrorCode::BadConfig, "discountBase must be > 1");
}

double mechanic_reward(int frequency, int ticksAhead, double discountBase) {
    return 1.0 / (static_cast<double>(frequency) * std::pow(discountBase, ticksAhead));
}

namespace {

double terminal_bonus(Outcome outcome, const AgentConfig& cfg) {
    switch (outcome) {
    case Outcome::Win: return cfg.winBonus;
    case Outcome::Loss: return cfg.lossPenalty;
    default: return 0.0;
    }
}

} // namespace

double vanilla_evaluate(const SimulationRecord& sim, const GameState& endState, const AgentConfig& cfg) {
    return endState.score() + terminal_bonus(sim.terminalOutcome, cfg);
}

double mechanic_evaluate(const SimulationRecord& sim, const Game& game, const std::vector<GameEvent>& history,
                         const AgentConfig& cfg) {
    const auto& ids = game.mechanic_ids();
    std::vector<int> counts(ids.size(), 0);
    std::vector<char> critical(ids.size(), 0);
    for (size_t m = 0; m < ids.size(); ++m) critical[m] = cfg.criticalSet.contains(ids[m]);
    if (cfg.countHistory)
        for (const auto& e : history) ++counts[static_cast<size_t>(e.mechanic)];
    double reward = 0.0;
    for (const auto& e : sim.events) {
        const size_t m = static_cast<size_t>(e.mechanic);
        ++counts[m];
        if (critical[m]) reward += mechanic_reward(counts[m], e.tick - sim.rootTick, cfg.discountBase);
    }
    return reward + terminal_bonus(sim.terminalOutcome, cfg);
}

double ucb1_score(double normalizedMean, int parentVisits, int childVisits, double explorationC) {
    if (childVisits <= 0) return std::numeric_limits<double>::infinity();
    return normalizedMean + explorationC * std::sqrt(std::log(static_cast<double>(parentVisits)) / childVisits);
}

double ucb1(const SearchNode& parent, const SearchNode& child, const AgentConfig& cfg, double minReturn,
            double maxReturn) {
    const double range = maxReturn - minReturn;
    const double normalized = range > 0 ? (child.mean() - minReturn) / range : 0.0;
    return ucb1_score(normalized, parent.visitCount, child.visitCount, cfg.explorationC);
}

namespace {

class Search {
public:
    Search(const GameState& state, const AgentConfig& cfg, const std::vector<GameEvent>& history)
        : cfg_(cfg), history_(history), rng_(mix64(cfg.seed) ^ mix64(static_cast<std::uint64_t>(state.tick()))) {
        tree_.reserve(static_cast<size_t>(cfg.maxTreeNodes) + 1);
        SearchNode root;
        root.state = state;
        root.depthTick = state.tick();
        root.legal = legal_actions(root.state);
        tree_.push_back(std::move(root));
    }

    // Open loop: every iteration replays the tree actions on a freshly reseeded copy of the
    // root, so stochastic sprites are sampled anew instead of being frozen into the tree.
    Decision run() {
        Decision d;
        const int iterationCap = 20 * cfg_.maxTreeNodes;
        while (d.expansions < cfg_.maxTreeNodes && !tree_[0].exhausted && d.iterations < iterationCap) {
            SimulationRecord sim;
            sim.rootTick = tree_[0].depthTick;
            GameState state = tree_[0].state;
            state.reseed(rng_.next());
            std::vector<int> path{0};
            int node = 0;
            bool expanded = false;
            while (state.outcome() == Outcome::Ongoing) {
                if (!fully_expanded(node)) {
                    node = expand(node, state, sim.events);
                    path.push_back(node);
                    expanded = true;
                    break;
                }
                const int next = select(node);
                if (next < 0) break;
                advance(state, at(next).incomingAction, sim.events);
                node = next;
                path.push_back(node);
            }
            if (expanded) ++d.expansions;
            for (int depth = 0; depth < cfg_.rolloutDepth && state.outcome() == Outcome::Ongoing; ++depth) {
                const auto legal = legal_actions(state);
                advance(state, legal[rng_.below(legal.size())], sim.events);
            }
            sim.terminalOutcome = state.outcome();
            const double value = cfg_.evaluator == EvaluatorKind::Vanilla
                                     ? vanilla_evaluate(sim, state, cfg_)
                                     : mechanic_evaluate(sim, state.game(), history_, cfg_);
            minReturn_ = std::min(minReturn_, value);
            maxReturn_ = std::max(maxReturn_, value);
            for (int n : path) {
                at(n).visitCount += 1;
                at(n).totalValue += value;
            }
            for (auto it = path.rbegin(); it != path.rend(); ++it) refresh_exhausted(*it);
            ++d.iterations;
        }
        const auto& root = tree_[0];
        int bestVisits = -1;
        for (Action a : root.legal) {
            const int c = root.children[static_cast<size_t>(a)];
            const int visits = c < 0 ? 0 : tree_[static_cast<size_t>(c)].visitCount;
            d.rootVisits[static_cast<size_t>(a)] = visits;
            if (visits > bestVisits) {
                bestVisits = visits;
                d.action = a;
            }
        }
        return d;
    }

private:
    SearchNode& at(int i) { return tree_[static_cast<size_t>(i)]; }

    bool fully_expanded(int i) {
        const auto& n = at(i);
        return std::all_of(n.legal.begin(), n.legal.end(),
                           [&](Action a) { return n.children[static_cast<size_t>(a)] >= 0; });
    }

    int select(int i) {
        const SearchNode& parent = at(i);
        int best = -1;
        double bestScore = -std::numeric_limits<double>::infinity();
        for (Action a : parent.legal) {
            const int c = parent.children[static_cast<size_t>(a)];
            const double score = ucb1(parent, at(c), cfg_, minReturn_, maxReturn_);
            if (score > bestScore) {
                bestScore = score;
                best = c;
            }
        }
        return best;
    }

    int expand(int i, GameState& state, std::vector<GameEvent>& events) {
        Action action = Action::Nil;
        for (Action a : at(i).legal) {
            if (at(i).children[static_cast<size_t>(a)] < 0) {
                action = a;
                break;
            }
        }
        const size_t before = events.size();
        advance(state, action, events);
        SearchNode child;
        child.incomingAction = action;
        child.parent = i;
        child.depthTick = state.tick();
        child.events.assign(events.begin() + static_cast<long>(before), events.end());
        // Legal moves depend only on the avatar class, which every sample shares.
        if (state.outcome() == Outcome::Ongoing) child.legal = legal_actions(state);
        else child.exhausted = true;
        tree_.push_back(std::move(child));
        const int index = static_cast<int>(tree_.size() - 1);
        at(i).children[static_cast<size_t>(action)] = index;
        return index;
    }

    void refresh_exhausted(int i) {
        SearchNode& n = at(i);
        if (n.exhausted || !fully_expanded(i)) return;
        n.exhausted = std::all_of(n.legal.begin(), n.legal.end(),
                                  [&](Action a) { return at(n.children[static_cast<size_t>(a)]).exhausted; });
    }

    const AgentConfig& cfg_;
    const std::vector<GameEvent>& history_;
    SplitMix64 rng_;
    std::vector<SearchNode> tree_;
    double minReturn_ = std::numeric_limits<double>::infinity();
    double maxReturn_ = -std::numeric_limits<double>::infinity();
};

} // namespace

Decision decide_detailed(const GameState& state, const AgentConfig& cfg, const std::vector<GameEvent>& history) {
    cfg.check();
    if (state.outcome() != Outcome::Ongoing)
        throw Error(ErrorCode::ContractViolation, "decide called on a terminated state");
    return Search(state, cfg, history).run();
}

} // namespace critmech
