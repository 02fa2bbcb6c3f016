#pragma once

#include "critmech/vgdl.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace critmech {

struct Playtrace;

enum class ConditionKind { Collision, Input, SpriteCounter, SpriteCounterMore, MultiSpriteCounter, Timeout };

std::string_view to_string(ConditionKind kind);

enum class ActionKind { KillSprite, KillBoth, TransformTo, StepBack, TeleportToExit, BounceForward, Spawn, Win, Lose };

std::string_view to_string(ActionKind kind);

struct MechanicAction {
    ActionKind kind = ActionKind::KillSprite;
    /// transformTo target or spawned sprite.
    std::optional<std::string> stype;
    bool killSecond = false;
    int scoreChange = 0;

    friend bool operator==(const MechanicAction&, const MechanicAction&) = default;
};

enum class MechanicSource { Interaction, Shooter, Termination };

/// One condition-action pair of the game plus its participating objects.
struct MechanicNode {
    std::string id;
    ConditionKind conditionKind = ConditionKind::Collision;
    /// Condition operands in rule order: (first, second) for collisions, the shooter for
    /// input, the counted stypes for counters, empty for timeouts.
    std::vector<std::string> operands;
    int limit = 0;
    std::set<std::string> inputs;
    MechanicAction action;
    std::set<std::string> outputs;
    std::optional<int> frame;
    bool terminal = false;
    bool playerCentric = false;
    MechanicSource source = MechanicSource::Interaction;
    /// Index into the interaction, shooter or termination list named by `source`.
    size_t sourceIndex = 0;

    bool is_win() const { return action.kind == ActionKind::Win; }
    friend bool operator==(const MechanicNode&, const MechanicNode&) = default;
};

/// Canonical id such as `collision(nokey,key)->transformTo(withkey,killSecond)+1`.
std::string mechanic_id(ConditionKind kind, const std::vector<std::string>& operands, int limit,
                        const MechanicAction& action);

/// All mechanics of a game in canonical order: interactions, then USE capabilities, then
/// terminations, each in declaration order. Ids are unique.
std::vector<MechanicNode> enumerate_mechanics(const GameDescription& desc);

// ---------------------------------------------------------------------------------------------
// Atomic interaction graph

enum class AtomicKind { Object, Condition, Action };

struct AtomicNode {
    AtomicKind kind = AtomicKind::Object;
    /// Object: sprite name (or `time`). Condition/Action: the owning mechanic id.
    std::string label;
    /// For condition and action nodes, index of the mechanic in construction order.
    std::optional<size_t> mechanic;
};

struct AtomicGraph {
    std::vector<AtomicNode> nodes;
    /// Directed adjacency in construction order.
    std::vector<std::vector<size_t>> successors;
    /// Mechanics backing the condition/action pairs, in construction order.
    std::vector<MechanicNode> mechanics;
    std::set<std::string> avatarObjects;

    std::optional<size_t> object(std::string_view name) const;
    size_t condition_of(size_t mechanic) const;
    size_t action_of(size_t mechanic) const;
    size_t edge_count() const;
};

AtomicGraph build_atomic_graph(const GameDescription& desc);

// ---------------------------------------------------------------------------------------------
// Mechanic graph

class MechanicGraph {
public:
    MechanicGraph() = default;
    MechanicGraph(std::vector<MechanicNode> nodes, std::vector<std::vector<size_t>> successors);

    const std::vector<MechanicNode>& nodes() const { return nodes_; }
    const std::vector<std::vector<size_t>>& successors() const { return successors_; }
    const std::vector<size_t>& neighbors(size_t node) const { return successors_[node]; }
    bool has_edge(size_t from, size_t to) const;
    size_t edge_count() const;
    std::optional<size_t> find(std::string_view id) const;
    const MechanicNode& node(std::string_view id) const;

    /// Copy with frames replaced; the receiver is never modified.
    MechanicGraph with_frames(const std::map<std::string, int>& frames) const;

    friend bool operator==(const MechanicGraph&, const MechanicGraph&) = default;

private:
    std::vector<MechanicNode> nodes_;
    std::vector<std::vector<size_t>> successors_;
};

/// Shared-I/O edge predicate, including the timeout-terminal rule.
bool mechanic_edge(const MechanicNode& from, const MechanicNode& to);

MechanicGraph build_mechanic_graph(const AtomicGraph& atomic);

/// Earliest-frame annotation from a winning trace.
MechanicGraph annotate_frames(const MechanicGraph& graph, const Playtrace& trace);

std::string export_dot(const MechanicGraph& graph);
std::string export_dot(const AtomicGraph& graph);

} // namespace critmech
