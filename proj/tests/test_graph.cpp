#include "critmech/engine.hpp"
#include "critmech/error.hpp"
#include "critmech/graph.hpp"
#include "critmech/harness.hpp"
#include "critmech/vgdl.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace critmech;

namespace {

const std::vector<std::string> kGames{"zelda", "solarfox", "plants", "realportals"};

const std::string kKeyRule = "collision(nokey,key)->transformTo(withkey,killSecond)+1";
const std::string kDoorRule = "collision(goal,withkey)->killSprite(goal)+1";
const std::string kGoalWin = "spriteCounter(goal<=0)->win";

GameDescription zelda() { return load_fixture("zelda").desc; }

// Inputs and outputs recomputed from the description alone, one entry per mechanic in
// canonical order.
struct OracleMechanic {
    std::set<std::string> inputs;
    std::set<std::string> outputs;
    bool timeout = false;
    bool input = false;
};

std::vector<OracleMechanic> oracle_mechanics(const GameDescription& desc) {
    std::vector<OracleMechanic> out;
    for (const auto& r : desc.interactions) {
        OracleMechanic m;
        m.inputs = {r.first, r.second};
        if (r.effect == Effect::KillBoth) m.outputs = {r.first, r.second};
        else if (r.effect == Effect::TransformTo) {
            m.outputs = {*r.stype};
            if (r.killSecond) m.outputs.insert(r.second);
        } else m.outputs = {r.first};
        out.push_back(m);
    }
    for (const auto& s : desc.sprites) {
        const bool leaf = desc.children_of(s.name).empty();
        if (leaf && s.cls == SpriteClass::ShootAvatar) {
            OracleMechanic m;
            m.inputs = {s.name};
            m.outputs = {*s.params.stype};
            m.input = true;
            out.push_back(m);
        }
    }
    const auto hierarchy = desc.avatar_hierarchy();
    for (const auto& t : desc.terminations) {
        OracleMechanic m;
        if (t.kind == TerminationKind::Timeout) {
            m.inputs.insert(hierarchy.begin(), hierarchy.end());
            m.timeout = true;
        }
        for (const auto& stype : t.stypes) {
            for (const auto& s : desc.sprites)
                if (s.cls != SpriteClass::Abstract && desc.is_a(s.name, stype) &&
                    (s.name == stype || desc.sprite(stype).cls == SpriteClass::Abstract))
                    m.inputs.insert(s.name);
        }
        out.push_back(m);
    }
    return out;
}

bool oracle_player_centric(const GameDescription& desc, const OracleMechanic& m) {
    if (m.input) return true;
    const auto hierarchy = desc.avatar_hierarchy();
    return std::any_of(m.inputs.begin(), m.inputs.end(), [&](const std::string& s) {
        return std::find(hierarchy.begin(), hierarchy.end(), s) != hierarchy.end();
    });
}

Playtrace synthetic_trace(std::vector<TraceEvent> events, int finalTick) {
    Playtrace t;
    t.gameName = "zelda";
    t.levelName = "synthetic";
    t.events = std::move(events);
    t.finalTick = finalTick;
    t.outcome = Outcome::Win;
    return t;
}

} // namespace

TEST(MechanicId, Formats) {
    const auto mechs = enumerate_mechanics(zelda());
    std::vector<std::string> ids;
    for (const auto& m : mechs) ids.push_back(m.id);
    EXPECT_NE(std::find(ids.begin(), ids.end(), kKeyRule), ids.end());
    EXPECT_NE(std::find(ids.begin(), ids.end(), kDoorRule), ids.end());
    EXPECT_NE(std::find(ids.begin(), ids.end(), "input(nokey)->spawn(sword)"), ids.end());
    EXPECT_NE(std::find(ids.begin(), ids.end(), kGoalWin), ids.end());

    MechanicAction win;
    win.kind = ActionKind::Win;
    EXPECT_EQ(mechanic_id(ConditionKind::Timeout, {}, 1000, win), "timeout(>=1000)->win");
}

TEST(MechanicId, ScoreChangeDistinguishes) {
    MechanicAction plain;
    plain.kind = ActionKind::KillSprite;
    MechanicAction scored = plain;
    scored.scoreChange = 3;
    MechanicAction penalty = plain;
    penalty.scoreChange = -1;
    const std::vector<std::string> ops{"gem", "ship"};
    const auto a = mechanic_id(ConditionKind::Collision, ops, 0, plain);
    const auto b = mechanic_id(ConditionKind::Collision, ops, 0, scored);
    const auto c = mechanic_id(ConditionKind::Collision, ops, 0, penalty);
    EXPECT_NE(a, b);
    EXPECT_NE(a, c);
    EXPECT_NE(b, c);
    EXPECT_EQ(b, "collision(gem,ship)->killSprite(gem)+3");
    EXPECT_EQ(c, "collision(gem,ship)->killSprite(gem)-1");
}

TEST(MechanicId, UniqueWithinEveryGame) {
    for (const auto& g : kGames) {
        const auto mechs = enumerate_mechanics(load_fixture(g).desc);
        std::set<std::string> ids;
        for (const auto& m : mechs) EXPECT_TRUE(ids.insert(m.id).second) << g << " " << m.id;
    }
}

TEST(AtomicGraph, ZeldaKeyRule) {
    const auto atomic = build_atomic_graph(zelda());
    size_t key = atomic.mechanics.size();
    for (size_t m = 0; m < atomic.mechanics.size(); ++m)
        if (atomic.mechanics[m].id == kKeyRule) key = m;
    ASSERT_LT(key, atomic.mechanics.size());

    const size_t cond = atomic.condition_of(key);
    const size_t act = atomic.action_of(key);
    for (const auto* name : {"nokey", "key", "withkey"}) ASSERT_TRUE(atomic.object(name)) << name;
    const auto edge = [&](size_t a, size_t b) {
        const auto& s = atomic.successors[a];
        return std::find(s.begin(), s.end(), b) != s.end();
    };
    EXPECT_TRUE(edge(*atomic.object("nokey"), cond));
    EXPECT_TRUE(edge(*atomic.object("key"), cond));
    EXPECT_EQ(atomic.successors[cond], std::vector<size_t>{act});
    EXPECT_TRUE(edge(act, *atomic.object("withkey")));
    EXPECT_TRUE(edge(act, *atomic.object("key")));
    EXPECT_EQ(atomic.mechanics[key].action.kind, ActionKind::TransformTo);
    EXPECT_FALSE(atomic.object("enemy")) << "abstract sprites are not objects";
}

TEST(AtomicGraph, TimeoutOnlyGame) {
    const auto desc = parse_game(R"(BasicGame
  SpriteSet
    avatar > MovingAvatar
  TerminationSet
    Timeout limit=5 win=True
  LevelMapping
    A > avatar
)");
    const auto atomic = build_atomic_graph(desc);
    ASSERT_EQ(atomic.mechanics.size(), 1u);
    EXPECT_TRUE(atomic.object("avatar"));
    const size_t cond = atomic.condition_of(0);
    const size_t act = atomic.action_of(0);
    EXPECT_EQ(atomic.nodes[cond].kind, AtomicKind::Condition);
    EXPECT_EQ(atomic.nodes[act].kind, AtomicKind::Action);
    EXPECT_TRUE(atomic.mechanics[0].is_win());
    EXPECT_EQ(atomic.successors[cond], std::vector<size_t>{act});
}

// Pellets are spawned by sprite behavior, never by a mechanic.
TEST(AtomicGraph, PlantsPeaHasNoCreatingAction) {
    const auto atomic = build_atomic_graph(load_fixture("plants").desc);
    size_t peaZombie = atomic.mechanics.size();
    for (size_t m = 0; m < atomic.mechanics.size(); ++m)
        if (atomic.mechanics[m].id == "collision(pea,zombie)->killBoth(pea,zombie)+1") peaZombie = m;
    ASSERT_LT(peaZombie, atomic.mechanics.size());
    const size_t cond = atomic.condition_of(peaZombie);
    for (size_t v = 0; v < atomic.nodes.size(); ++v) {
        const auto& s = atomic.successors[v];
        if (std::find(s.begin(), s.end(), cond) != s.end()) EXPECT_EQ(atomic.nodes[v].kind, AtomicKind::Object);
    }
    const size_t pea = *atomic.object("pea");
    for (size_t v = 0; v < atomic.nodes.size(); ++v) {
        if (atomic.nodes[v].kind != AtomicKind::Action) continue;
        const auto& s = atomic.successors[v];
        if (std::find(s.begin(), s.end(), pea) == s.end()) continue;
        // Only rules that consume a pea may list it as an output.
        EXPECT_TRUE(atomic.mechanics[*atomic.nodes[v].mechanic].inputs.contains("pea")) << atomic.nodes[v].label;
    }
}

TEST(AtomicGraph, ConditionNodeShape) {
    for (const auto& g : kGames) {
        const auto atomic = build_atomic_graph(load_fixture(g).desc);
        std::vector<int> incomingObjects(atomic.nodes.size(), 0);
        for (size_t v = 0; v < atomic.nodes.size(); ++v)
            for (size_t w : atomic.successors[v])
                if (atomic.nodes[v].kind == AtomicKind::Object) ++incomingObjects[w];
        for (size_t v = 0; v < atomic.nodes.size(); ++v) {
            if (atomic.nodes[v].kind != AtomicKind::Condition) continue;
            EXPECT_GE(incomingObjects[v], 1) << g << " " << atomic.nodes[v].label;
            ASSERT_EQ(atomic.successors[v].size(), 1u);
            EXPECT_EQ(atomic.nodes[atomic.successors[v][0]].kind, AtomicKind::Action);
        }
    }
}

TEST(MechanicGraph, ZeldaEdges) {
    const auto graph = build_mechanic_graph(build_atomic_graph(zelda()));
    const size_t key = *graph.find(kKeyRule);
    const size_t door = *graph.find(kDoorRule);
    const size_t win = *graph.find(kGoalWin);
    EXPECT_TRUE(graph.node(kKeyRule).outputs.contains("withkey"));
    EXPECT_TRUE(graph.node(kDoorRule).inputs.contains("withkey"));
    EXPECT_TRUE(graph.has_edge(key, door));
    EXPECT_TRUE(graph.has_edge(door, win));
    EXPECT_FALSE(graph.has_edge(door, key));

    const size_t spiderWall = *graph.find("collision(spider,wall)->stepBack(spider)");
    EXPECT_FALSE(graph.has_edge(spiderWall, key));
    EXPECT_FALSE(graph.has_edge(key, spiderWall));
}

TEST(MechanicGraph, DisjointMechanicsUnlinked) {
    const auto desc = parse_game(R"(BasicGame
  SpriteSet
    a > Immovable
    b > Immovable
    c > Immovable
    d > Immovable
    avatar > MovingAvatar
  InteractionSet
    a b > killSprite
    c d > killSprite
  TerminationSet
    SpriteCounter stype=a limit=0 win=True
  LevelMapping
    A > avatar
)");
    const auto graph = build_mechanic_graph(build_atomic_graph(desc));
    const size_t ab = *graph.find("collision(a,b)->killSprite(a)");
    const size_t cd = *graph.find("collision(c,d)->killSprite(c)");
    EXPECT_FALSE(graph.has_edge(ab, cd));
    EXPECT_FALSE(graph.has_edge(cd, ab));
}

TEST(MechanicGraph, NodeCountLaw) {
    for (const auto& g : kGames) {
        const auto desc = load_fixture(g).desc;
        size_t shooters = 0;
        for (const auto& s : desc.sprites)
            if (s.cls == SpriteClass::ShootAvatar && desc.children_of(s.name).empty()) ++shooters;
        const auto graph = build_mechanic_graph(build_atomic_graph(desc));
        EXPECT_EQ(graph.nodes().size(), desc.interactions.size() + shooters + desc.terminations.size()) << g;
    }
}

TEST(MechanicGraph, EdgeLawAgainstOracle) {
    for (const auto& g : kGames) {
        const auto desc = load_fixture(g).desc;
        const auto graph = build_mechanic_graph(build_atomic_graph(desc));
        const auto oracle = oracle_mechanics(desc);
        ASSERT_EQ(oracle.size(), graph.nodes().size()) << g;
        size_t edges = 0;
        for (size_t a = 0; a < oracle.size(); ++a) {
            EXPECT_EQ(graph.nodes()[a].inputs, oracle[a].inputs) << g << " " << graph.nodes()[a].id;
            EXPECT_EQ(graph.nodes()[a].outputs, oracle[a].outputs) << g << " " << graph.nodes()[a].id;
            EXPECT_EQ(graph.nodes()[a].playerCentric, oracle_player_centric(desc, oracle[a]));
            for (size_t b = 0; b < oracle.size(); ++b) {
                if (a == b) continue;
                bool shared = false;
                for (const auto& s : oracle[a].outputs) shared = shared || oracle[b].inputs.contains(s);
                const bool expected = shared || (oracle[b].timeout && oracle_player_centric(desc, oracle[a]));
                EXPECT_EQ(graph.has_edge(a, b), expected)
                    << g << ": " << graph.nodes()[a].id << " -> " << graph.nodes()[b].id;
                edges += expected;
            }
        }
        EXPECT_EQ(graph.edge_count(), edges) << g;
    }
}

TEST(MechanicGraph, TerminalAndPureConstruction) {
    for (const auto& g : kGames) {
        const auto desc = load_fixture(g).desc;
        const auto graph = build_mechanic_graph(build_atomic_graph(desc));
        EXPECT_EQ(graph, build_mechanic_graph(build_atomic_graph(desc)));
        for (const auto& n : graph.nodes())
            EXPECT_EQ(n.terminal, n.action.kind == ActionKind::Win || n.action.kind == ActionKind::Lose);
    }
}

TEST(AnnotateFrames, MinimumTick) {
    const auto graph = build_mechanic_graph(build_atomic_graph(zelda()));
    const auto trace = synthetic_trace({{12, kKeyRule, {}, 1}, {30, kKeyRule, {}, 1}, {40, kDoorRule, {}, 1},
                                        {40, kGoalWin, {}, 0}},
                                       40);
    const auto annotated = annotate_frames(graph, trace);
    EXPECT_EQ(annotated.node(kKeyRule).frame, 12);
    EXPECT_EQ(annotated.node(kDoorRule).frame, 40);
    EXPECT_EQ(annotated.node(kGoalWin).frame, 40);
    EXPECT_FALSE(annotated.node("collision(avatar,bat)->killSprite(avatar)").frame);
    EXPECT_FALSE(graph.node(kKeyRule).frame) << "annotation must not modify the source graph";
}

TEST(AnnotateFrames, Errors) {
    const auto graph = build_mechanic_graph(build_atomic_graph(zelda()));
    auto unknown = synthetic_trace({{3, "collision(ghost,key)->killSprite(ghost)", {}, 0}}, 3);
    try {
        annotate_frames(graph, unknown);
        FAIL() << "expected TRACE_GRAPH_MISMATCH";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TraceGraphMismatch);
    }
    auto lost = synthetic_trace({}, 5);
    lost.outcome = Outcome::Loss;
    EXPECT_THROW(annotate_frames(graph, lost), Error);
}

TEST(AnnotateFrames, ZeldaSolutionWinFrame) {
    const auto f = load_fixture("zelda");
    const auto graph = build_mechanic_graph(build_atomic_graph(f.desc));
    for (const auto& trace : solution_traces(f)) {
        const auto annotated = annotate_frames(graph, trace);
        EXPECT_EQ(annotated.node(kGoalWin).frame, trace.finalTick);
        std::map<std::string, int> firsts;
        for (const auto& e : trace.events) firsts.emplace(e.mechanicId, e.tick);
        for (const auto& n : annotated.nodes()) {
            if (n.id == kGoalWin) continue;
            auto it = firsts.find(n.id);
            if (it == firsts.end()) EXPECT_FALSE(n.frame) << n.id;
            else EXPECT_EQ(n.frame, it->second) << n.id;
        }
    }
}

TEST(ExportDot, EmptyGraph) {
    const auto dot = export_dot(MechanicGraph{});
    EXPECT_EQ(dot.rfind("digraph {", 0), 0u);
    EXPECT_EQ(dot.find("->"), std::string::npos);
    EXPECT_NE(dot.find('}'), std::string::npos);
}

TEST(ExportDot, NodeAndEdgeLines) {
    const auto desc = zelda();
    const auto graph = build_mechanic_graph(build_atomic_graph(desc));
    const auto dot = export_dot(graph);
    size_t nodeLines = 0, edgeLines = 0;
    std::istringstream in(dot);
    for (std::string line; std::getline(in, line);) {
        if (line.find(" -> ") != std::string::npos) ++edgeLines;
        else if (line.find("[label=") != std::string::npos) ++nodeLines;
    }
    EXPECT_EQ(nodeLines, desc.interactions.size() + 2 + desc.terminations.size());
    EXPECT_EQ(edgeLines, graph.edge_count());
    EXPECT_NE(dot.find("doubleoctagon"), std::string::npos);
    EXPECT_EQ(dot.find("frame"), std::string::npos);

    const auto annotated = graph.with_frames({{kKeyRule, 7}});
    EXPECT_NE(export_dot(annotated).find("frame 7"), std::string::npos);
}

TEST(ExportDot, AtomicGraph) {
    const auto atomic = build_atomic_graph(zelda());
    const auto dot = export_dot(atomic);
    EXPECT_NE(dot.find("diamond"), std::string::npos);
    EXPECT_NE(dot.find("ellipse"), std::string::npos);
    size_t edgeLines = 0;
    std::istringstream in(dot);
    for (std::string line; std::getline(in, line);) edgeLines += line.find(" -> ") != std::string::npos;
    EXPECT_EQ(edgeLines, atomic.edge_count());
}
