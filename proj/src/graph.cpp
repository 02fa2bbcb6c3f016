#include "critmech/graph.hpp"

#include "critmech/engine.hpp"
#include "critmech/error.hpp"

#include <algorithm>
#include <sstream>

namespace critmech {

std::string_view to_string(ConditionKind kind) {
    switch (kind) {
    case ConditionKind::Collision: return "collision";
    case ConditionKind::Input: return "input";
    case ConditionKind::SpriteCounter: return "spriteCounter";
    case ConditionKind::SpriteCounterMore: return "spriteCounterMore";
    case ConditionKind::MultiSpriteCounter: return "multiSpriteCounter";
    case ConditionKind::Timeout: return "timeout";
    }
    return "?";
}

std::string_view to_string(ActionKind kind) {
    switch (kind) {
    case ActionKind::KillSprite: return "killSprite";
    case ActionKind::KillBoth: return "killBoth";
    case ActionKind::TransformTo: return "transformTo";
    case ActionKind::StepBack: return "stepBack";
    case ActionKind::TeleportToExit: return "teleportToExit";
    case ActionKind::BounceForward: return "bounceForward";
    case ActionKind::Spawn: return "spawn";
    case ActionKind::Win: return "win";
    case ActionKind::Lose: return "lose";
    }
    return "?";
}

namespace {

ActionKind action_kind(Effect effect) {
    switch (effect) {
    case Effect::KillSprite: return ActionKind::KillSprite;
    case Effect::KillBoth: return ActionKind::KillBoth;
    case Effect::TransformTo: return ActionKind::TransformTo;
    case Effect::StepBack: return ActionKind::StepBack;
    case Effect::TeleportToExit: return ActionKind::TeleportToExit;
    case Effect::BounceForward: return ActionKind::BounceForward;
    }
    return ActionKind::KillSprite;
}

ConditionKind condition_kind(TerminationKind kind) {
    switch (kind) {
    case TerminationKind::SpriteCounter: return ConditionKind::SpriteCounter;
    case TerminationKind::SpriteCounterMore: return ConditionKind::SpriteCounterMore;
    case TerminationKind::MultiSpriteCounter: return ConditionKind::MultiSpriteCounter;
    case TerminationKind::Timeout: return ConditionKind::Timeout;
    }
    return ConditionKind::Timeout;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ',';
        out += parts[i];
    }
    return out;
}

/// Concrete sprites a counter stype stands for.
std::set<std::string> counted(const GameDescription& desc, const std::string& stype) {
    if (desc.sprite(stype).cls != SpriteClass::Abstract) return {stype};
    std::set<std::string> out;
    for (const auto& s : desc.sprites)
        if (s.cls != SpriteClass::Abstract && desc.is_a(s.name, stype)) out.insert(s.name);
    return out;
}

std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace

std::string mechanic_id(ConditionKind kind, const std::vector<std::string>& operands, int limit,
                        const MechanicAction& action) {
    std::string out;
    switch (kind) {
    case ConditionKind::Collision: out = "collision(" + join(operands) + ")"; break;
    case ConditionKind::Input: out = "input(" + join(operands) + ")"; break;
    case ConditionKind::SpriteCounter:
    case ConditionKind::MultiSpriteCounter:
        out = std::string(to_string(kind)) + "(" + join(operands) + "<=" + std::to_string(limit) + ")";
        break;
    case ConditionKind::SpriteCounterMore:
        out = std::string(to_string(kind)) + "(" + join(operands) + ">=" + std::to_string(limit) + ")";
        break;
    case ConditionKind::Timeout: out = "timeout(>=" + std::to_string(limit) + ")"; break;
    }
    out += "->";
    out += to_string(action.kind);
    const std::string first = operands.empty() ? std::string() : operands.front();
    switch (action.kind) {
    case ActionKind::KillSprite:
    case ActionKind::StepBack:
    case ActionKind::TeleportToExit:
    case ActionKind::BounceForward: out += "(" + first + ")"; break;
    case ActionKind::KillBoth: out += "(" + join(operands) + ")"; break;
    case ActionKind::TransformTo:
        out += "(" + action.stype.value_or("") + (action.killSecond ? ",killSecond" : "") + ")";
        break;
    case ActionKind::Spawn: out += "(" + action.stype.value_or("") + ")"; break;
    case ActionKind::Win:
    case ActionKind::Lose: break;
    }
    if (action.scoreChange > 0) out += "+" + std::to_string(action.scoreChange);
    else if (action.scoreChange < 0) out += std::to_string(action.scoreChange);
    return out;
}

std::vector<MechanicNode> enumerate_mechanics(const GameDescription& desc) {
    std::vector<MechanicNode> out;
    const auto hierarchy = desc.avatar_hierarchy();
    const std::set<std::string> avatarSet(hierarchy.begin(), hierarchy.end());

    for (size_t i = 0; i < desc.interactions.size(); ++i) {
        const auto& r = desc.interactions[i];
        MechanicNode m;
        m.conditionKind = ConditionKind::Collision;
        m.operands = {r.first, r.second};
        m.inputs = {r.first, r.second};
        m.action.kind = action_kind(r.effect);
        m.action.stype = r.stype;
        m.action.killSecond = r.killSecond;
        m.action.scoreChange = r.scoreChange;
        switch (r.effect) {
        case Effect::KillBoth: m.outputs = {r.first, r.second}; break;
        case Effect::TransformTo:
            m.outputs = {*r.stype};
            if (r.killSecond) m.outputs.insert(r.second);
            break;
        default: m.outputs = {r.first}; break;
        }
        m.source = MechanicSource::Interaction;
        m.sourceIndex = i;
        out.push_back(std::move(m));
    }

    const auto shooters = desc.shooters();
    for (size_t i = 0; i < shooters.size(); ++i) {
        MechanicNode m;
        m.conditionKind = ConditionKind::Input;
        m.operands = {shooters[i]};
        m.inputs = {shooters[i]};
        m.action.kind = ActionKind::Spawn;
        m.action.stype = desc.sprite(shooters[i]).params.stype;
        m.outputs = {*m.action.stype};
        m.source = MechanicSource::Shooter;
        m.sourceIndex = i;
        out.push_back(std::move(m));
    }

    for (size_t i = 0; i < desc.terminations.size(); ++i) {
        const auto& t = desc.terminations[i];
        MechanicNode m;
        m.conditionKind = condition_kind(t.kind);
        m.operands = t.stypes;
        m.limit = t.limit;
        if (t.kind == TerminationKind::Timeout) m.inputs = avatarSet;
        else
            for (const auto& s : t.stypes) m.inputs.merge(counted(desc, s));
        m.action.kind = t.win ? ActionKind::Win : ActionKind::Lose;
        m.terminal = true;
        m.source = MechanicSource::Termination;
        m.sourceIndex = i;
        out.push_back(std::move(m));
    }

    std::map<std::string, int> seen;
    for (auto& m : out) {
        m.id = mechanic_id(m.conditionKind, m.operands, m.limit, m.action);
        if (int n = ++seen[m.id]; n > 1) m.id += "#" + std::to_string(n);
        m.playerCentric = m.conditionKind == ConditionKind::Input ||
                          std::any_of(m.inputs.begin(), m.inputs.end(),
                                      [&](const std::string& s) { return avatarSet.contains(s); });
    }
    return out;
}

std::optional<size_t> AtomicGraph::object(std::string_view name) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].kind == AtomicKind::Object && nodes[i].label == name) return i;
    return std::nullopt;
}

size_t AtomicGraph::condition_of(size_t mechanic) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].kind == AtomicKind::Condition && nodes[i].mechanic == mechanic) return i;
    throw Error(ErrorCode::ContractViolation, "no condition node for mechanic " + std::to_string(mechanic));
}

size_t AtomicGraph::action_of(size_t mechanic) const {
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].kind == AtomicKind::Action && nodes[i].mechanic == mechanic) return i;
    throw Error(ErrorCode::ContractViolation, "no action node for mechanic " + std::to_string(mechanic));
}

size_t AtomicGraph::edge_count() const {
    size_t n = 0;
    for (const auto& s : successors) n += s.size();
    return n;
}

AtomicGraph build_atomic_graph(const GameDescription& desc) {
    AtomicGraph g;
    g.mechanics = enumerate_mechanics(desc);
    for (const auto& name : desc.avatar_hierarchy()) g.avatarObjects.insert(name);

    auto add = [&](AtomicKind kind, std::string label, std::optional<size_t> mechanic) {
        g.nodes.push_back({kind, std::move(label), mechanic});
        g.successors.emplace_back();
        return g.nodes.size() - 1;
    };
    std::map<std::string, size_t> objects;
    for (const auto& s : desc.sprites)
        if (s.cls != SpriteClass::Abstract) objects[s.name] = add(AtomicKind::Object, s.name, std::nullopt);
    const size_t time = add(AtomicKind::Object, "time", std::nullopt);

    for (size_t m = 0; m < g.mechanics.size(); ++m) {
        const auto& mech = g.mechanics[m];
        size_t cond = add(AtomicKind::Condition, mech.id, m);
        size_t act = add(AtomicKind::Action, mech.id, m);
        for (const auto& in : mech.inputs) g.successors[objects.at(in)].push_back(cond);
        if (mech.conditionKind == ConditionKind::Timeout) g.successors[time].push_back(cond);
        g.successors[cond].push_back(act);
        for (const auto& outName : mech.outputs) g.successors[act].push_back(objects.at(outName));
    }
    return g;
}

MechanicGraph::MechanicGraph(std::vector<MechanicNode> nodes, std::vector<std::vector<size_t>> successors)
    : nodes_(std::move(nodes)), successors_(std::move(successors)) {}

bool MechanicGraph::has_edge(size_t from, size_t to) const {
    const auto& s = successors_[from];
    return std::find(s.begin(), s.end(), to) != s.end();
}

size_t MechanicGraph::edge_count() const {
    size_t n = 0;
    for (const auto& s : successors_) n += s.size();
    return n;
}

std::optional<size_t> MechanicGraph::find(std::string_view id) const {
    for (size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i].id == id) return i;
    return std::nullopt;
}

const MechanicNode& MechanicGraph::node(std::string_view id) const {
    auto i = find(id);
    if (!i) throw Error(ErrorCode::TraceGraphMismatch, "unknown mechanic '" + std::string(id) + "'");
    return nodes_[*i];
}

MechanicGraph MechanicGraph::with_frames(const std::map<std::string, int>& frames) const {
    MechanicGraph out = *this;
    for (auto& n : out.nodes_) {
        auto it = frames.find(n.id);
        n.frame = it == frames.end() ? std::nullopt : std::optional<int>(it->second);
    }
    return out;
}

bool mechanic_edge(const MechanicNode& from, const MechanicNode& to) {
    if (from.id == to.id) return false;
    if (to.conditionKind == ConditionKind::Timeout && to.terminal && from.playerCentric) return true;
    return std::any_of(from.outputs.begin(), from.outputs.end(),
                       [&](const std::string& s) { return to.inputs.contains(s); });
}

MechanicGraph build_mechanic_graph(const AtomicGraph& atomic) {
    // Read the pairs back off the atomic structure so the two graphs cannot drift apart.
    std::vector<MechanicNode> nodes;
    for (size_t m = 0; m < atomic.mechanics.size(); ++m) {
        MechanicNode node = atomic.mechanics[m];
        const size_t cond = atomic.condition_of(m);
        const size_t act = atomic.action_of(m);
        node.inputs.clear();
        for (size_t v = 0; v < atomic.nodes.size(); ++v) {
            const auto& succ = atomic.successors[v];
            if (atomic.nodes[v].kind == AtomicKind::Object && atomic.nodes[v].label != "time" &&
                std::find(succ.begin(), succ.end(), cond) != succ.end())
                node.inputs.insert(atomic.nodes[v].label);
        }
        node.outputs.clear();
        for (size_t o : atomic.successors[act]) node.outputs.insert(atomic.nodes[o].label);
        node.frame.reset();
        nodes.push_back(std::move(node));
    }
    std::vector<std::vector<size_t>> succ(nodes.size());
    for (size_t a = 0; a < nodes.size(); ++a)
        for (size_t b = 0; b < nodes.size(); ++b)
            if (a != b && mechanic_edge(nodes[a], nodes[b])) succ[a].push_back(b);
    return MechanicGraph(std::move(nodes), std::move(succ));
}

MechanicGraph annotate_frames(const MechanicGraph& graph, const Playtrace& trace) {
    if (trace.outcome != Outcome::Win)
        throw Error(ErrorCode::ContractViolation, "frames must come from a winning trace");
    std::map<std::string, int> frames;
    for (const auto& e : trace.events) {
        if (!graph.find(e.mechanicId))
            throw Error(ErrorCode::TraceGraphMismatch, "trace mechanic '" + e.mechanicId + "' is not in the graph");
        auto [it, fresh] = frames.emplace(e.mechanicId, e.tick);
        if (!fresh) it->second = std::min(it->second, e.tick);
    }
    // The win that ended the episode is stamped with the final tick.
    for (auto it = trace.events.rbegin(); it != trace.events.rend(); ++it) {
        if (graph.node(it->mechanicId).is_win()) {
            frames[it->mechanicId] = trace.finalTick;
            break;
        }
    }
    return graph.with_frames(frames);
}

std::string export_dot(const MechanicGraph& graph) {
    std::ostringstream out;
    out << "digraph {\n";
    for (size_t i = 0; i < graph.nodes().size(); ++i) {
        const auto& n = graph.nodes()[i];
        out << "  n" << i << " [label=\"" << dot_escape(n.id);
        if (n.frame) out << "\\nframe " << *n.frame;
        out << "\"";
        if (n.terminal) out << ", shape=doubleoctagon";
        else out << ", shape=box";
        if (n.playerCentric) out << ", style=filled, fillcolor=lightblue";
        out << "];\n";
    }
    for (size_t a = 0; a < graph.nodes().size(); ++a)
        for (size_t b : graph.neighbors(a)) out << "  n" << a << " -> n" << b << ";\n";
    out << "}\n";
    return out.str();
}

std::string export_dot(const AtomicGraph& graph) {
    std::ostringstream out;
    out << "digraph {\n";
    for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        out << "  a" << i << " [label=\"";
        switch (n.kind) {
        case AtomicKind::Object:
            out << dot_escape(n.label) << "\", shape=ellipse";
            if (graph.avatarObjects.contains(n.label)) out << ", style=filled, fillcolor=lightblue";
            break;
        case AtomicKind::Condition: {
            const auto& id = n.label;
            out << dot_escape(id.substr(0, id.find("->"))) << "\", shape=diamond";
            break;
        }
        case AtomicKind::Action: {
            const auto& id = n.label;
            auto arrow = id.find("->");
            out << dot_escape(arrow == std::string::npos ? id : id.substr(arrow + 2)) << "\", shape=box";
            break;
        }
        }
        out << "];\n";
    }
    for (size_t a = 0; a < graph.nodes.size(); ++a)
        for (size_t b : graph.successors[a]) out << "  a" << a << " -> a" << b << ";\n";
    out << "}\n";
    return out.str();
}

} // namespace critmech
