#include "critmech/discovery.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace critmech {

std::string_view to_string(DiscoveryMethod method) {
    return method == DiscoveryMethod::Playtrace ? "playtrace" : "baseline";
}

std::optional<DiscoveryMethod> parse_method(std::string_view token) {
    if (token == "playtrace") return DiscoveryMethod::Playtrace;
    if (token == "baseline") return DiscoveryMethod::Baseline;
    return std::nullopt;
}

const Playtrace& select_playtrace(std::span<const Playtrace> traces) {
    const Playtrace* best = nullptr;
    size_t bestUnique = 0;
    for (const auto& t : traces) {
        if (t.outcome != Outcome::Win) continue;
        const size_t unique = t.unique_mechanics().size();
        if (best) {
            auto key = [](const Playtrace& p, const size_t& u) {
                return std::tie(u, p.finalTick, p.gameName, p.levelName, p.seed, p.actions);
            };
            if (!(key(t, unique) < key(*best, bestUnique))) continue;
        }
        best = &t;
        bestUnique = unique;
    }
    if (!best) throw Error(ErrorCode::NoWinningTrace, "none of " + std::to_string(traces.size()) + " traces is a win");
    return *best;
}

CriticalPath find_critical_path(const MechanicGraph& annotated) {
    const auto& nodes = annotated.nodes();
    CriticalPath path;
    path.method = DiscoveryMethod::Playtrace;

    std::vector<size_t> searchList;
    for (size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].playerCentric && nodes[i].frame) searchList.push_back(i);
    std::vector<char> visited(nodes.size(), 0);
    auto before = [&](size_t a, size_t b) {
        return std::tie(*nodes[a].frame, nodes[a].id) < std::tie(*nodes[b].frame, nodes[b].id);
    };

    while (!searchList.empty()) {
        std::sort(searchList.begin(), searchList.end(), before);
        const size_t current = searchList.front();
        searchList.erase(searchList.begin());
        visited[current] = 1;
        path.mechanics.push_back(nodes[current].id);
        path.frames[nodes[current].id] = *nodes[current].frame;
        if (nodes[current].is_win()) {
            path.terminalId = nodes[current].id;
            return path;
        }
        for (size_t n : annotated.neighbors(current)) {
            if (visited[n] || !nodes[n].frame) continue;
            if (std::find(searchList.begin(), searchList.end(), n) != searchList.end()) continue;
            searchList.push_back(n);
        }
    }
    throw NoWinPathError(std::move(path));
}

namespace {

bool same_family(const GameDescription& desc, const std::string& a, const std::string& b) {
    if (a == b) return true;
    const auto& pa = desc.sprite(a).parent;
    const auto& pb = desc.sprite(b).parent;
    return pa && pb && *pa == *pb;
}

bool is_sibling(const GameDescription& desc, const MechanicNode& origin, const MechanicNode& other) {
    if (other.conditionKind != ConditionKind::Collision || other.id == origin.id) return false;
    if (!(other.action == origin.action) || other.operands.size() != origin.operands.size()) return false;
    bool differs = false;
    for (size_t i = 0; i < origin.operands.size(); ++i) {
        if (!same_family(desc, origin.operands[i], other.operands[i])) return false;
        differs = differs || origin.operands[i] != other.operands[i];
    }
    return differs;
}

} // namespace

CriticalPath expand_siblings(const CriticalPath& path, const GameDescription& desc, const MechanicGraph& graph) {
    CriticalPath out = path;
    out.mechanics.clear();
    std::set<std::string> present(path.mechanics.begin(), path.mechanics.end());
    for (const auto& id : path.mechanics) {
        out.mechanics.push_back(id);
        const MechanicNode& origin = graph.node(id);
        if (origin.conditionKind != ConditionKind::Collision) continue;
        for (const auto& other : graph.nodes()) {
            if (present.contains(other.id) || !is_sibling(desc, origin, other)) continue;
            present.insert(other.id);
            out.mechanics.push_back(other.id);
        }
    }
    return out;
}

CriticalPath atdelfi_baseline(const AtomicGraph& atomic) {
    CriticalPath best;
    best.method = DiscoveryMethod::Baseline;

    auto is_win_action = [&](size_t v) {
        const auto& n = atomic.nodes[v];
        return n.kind == AtomicKind::Action && atomic.mechanics[*n.mechanic].is_win();
    };
    std::optional<size_t> firstWin;
    for (size_t m = 0; m < atomic.mechanics.size() && !firstWin; ++m)
        if (atomic.mechanics[m].is_win()) firstWin = m;
    if (!firstWin) throw Error(ErrorCode::NoWinCondition, "the game has no win termination");

    std::optional<std::vector<size_t>> longest;
    for (size_t v = 0; v < atomic.nodes.size(); ++v) {
        const auto& n = atomic.nodes[v];
        if (n.kind != AtomicKind::Condition) continue;
        const auto& mech = atomic.mechanics[*n.mechanic];
        if (mech.terminal) continue;
        const bool playerDriven =
            mech.conditionKind == ConditionKind::Input ||
            std::any_of(mech.inputs.begin(), mech.inputs.end(),
                        [&](const std::string& s) { return atomic.avatarObjects.contains(s); });
        if (!playerDriven) continue;

        std::vector<long> parent(atomic.nodes.size(), -2);
        std::deque<size_t> queue{v};
        parent[v] = -1;
        std::optional<size_t> goal;
        while (!queue.empty() && !goal) {
            size_t u = queue.front();
            queue.pop_front();
            if (is_win_action(u)) {
                goal = u;
                break;
            }
            for (size_t w : atomic.successors[u]) {
                if (parent[w] != -2) continue;
                parent[w] = static_cast<long>(u);
                queue.push_back(w);
            }
        }
        if (!goal) continue;
        std::vector<size_t> route;
        for (long u = static_cast<long>(*goal); u >= 0; u = parent[static_cast<size_t>(u)])
            route.push_back(static_cast<size_t>(u));
        std::reverse(route.begin(), route.end());
        if (!longest || route.size() > longest->size()) longest = std::move(route);
    }

    if (!longest) {
        best.fallback = true;
        best.mechanics = {atomic.mechanics[*firstWin].id};
        best.terminalId = best.mechanics.front();
        return best;
    }
    for (size_t u : *longest)
        if (atomic.nodes[u].kind == AtomicKind::Condition) best.mechanics.push_back(atomic.nodes[u].label);
    best.terminalId = best.mechanics.back();
    return best;
}

std::vector<size_t> matched_rows(const HumanMechanicTable& table, const std::set<std::string>& discovered) {
    std::vector<size_t> out;
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& ids = table.rows[i].ids;
        if (std::any_of(ids.begin(), ids.end(), [&](const std::string& id) { return discovered.contains(id); }))
            out.push_back(i);
    }
    return out;
}

double match_rate(const HumanMechanicTable& table, const std::set<std::string>& discovered) {
    double total = 0;
    for (const auto& r : table.rows) total += r.percentage;
    if (table.rows.empty() || total <= 0)
        throw Error(ErrorCode::DegenerateTable, "table for '" + table.game + "' has no positive percentages");
    double hit = 0;
    for (size_t i : matched_rows(table, discovered)) hit += table.rows[i].percentage;
    return hit / total;
}

} // namespace critmech
