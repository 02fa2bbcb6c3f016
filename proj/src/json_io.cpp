#include "critmech/json_io.hpp"

#include "critmech/error.hpp"

#include <fstream>
#include <sstream>

namespace critmech {

namespace {

void require_schema(const Json& j, std::string_view what) {
    if (!j.is_object()) throw Error(ErrorCode::BadConfig, std::string(what) + ": expected a JSON object");
    if (j.contains("schemaVersion") && j.at("schemaVersion").get<int>() != kSchemaVersion)
        throw Error(ErrorCode::BadConfig, std::string(what) + ": unsupported schemaVersion " +
                                              j.at("schemaVersion").dump());
}

template <class F>
auto guarded(std::string_view what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadConfig, std::string(what) + ": " + e.what());
    }
}

Json node_json(const MechanicNode& n) {
    Json j;
    j["id"] = n.id;
    j["conditionKind"] = to_string(n.conditionKind);
    j["operands"] = n.operands;
    j["limit"] = n.limit;
    j["inputs"] = n.inputs;
    Json action;
    action["kind"] = to_string(n.action.kind);
    if (n.action.stype) action["stype"] = *n.action.stype;
    action["killSecond"] = n.action.killSecond;
    action["scoreChange"] = n.action.scoreChange;
    j["action"] = action;
    j["outputs"] = n.outputs;
    j["frame"] = n.frame ? Json(*n.frame) : Json(nullptr);
    j["terminal"] = n.terminal;
    j["playerCentric"] = n.playerCentric;
    return j;
}

} // namespace

Json to_json(const Playtrace& trace) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["meta"] = {{"game", trace.gameName},
                 {"level", trace.levelName},
                 {"seed", trace.seed},
                 {"engineVersion", std::string(kEngineVersion)}};
    Json actions = Json::array();
    for (Action a : trace.actions) actions.push_back(std::string(to_string(a)));
    j["actions"] = actions;
    Json events = Json::array();
    for (const auto& e : trace.events)
        events.push_back({{"tick", e.tick},
                          {"mechanicId", e.mechanicId},
                          {"participants", e.participants},
                          {"scoreDelta", e.scoreDelta}});
    j["events"] = events;
    j["outcome"] = std::string(to_string(trace.outcome));
    j["finalTick"] = trace.finalTick;
    j["finalScore"] = trace.finalScore;
    return j;
}

Playtrace playtrace_from_json(const Json& j) {
    require_schema(j, "playtrace");
    return guarded("playtrace", [&] {
        Playtrace t;
        const auto& meta = j.at("meta");
        t.gameName = meta.at("game").get<std::string>();
        t.levelName = meta.at("level").get<std::string>();
        t.seed = meta.at("seed").get<std::uint64_t>();
        for (const auto& a : j.at("actions")) {
            auto action = parse_action(a.get<std::string>());
            if (!action) throw Error(ErrorCode::BadConfig, "playtrace: unknown action " + a.dump());
            t.actions.push_back(*action);
        }
        for (const auto& e : j.at("events")) {
            TraceEvent ev;
            ev.tick = e.at("tick").get<int>();
            ev.mechanicId = e.at("mechanicId").get<std::string>();
            ev.participants = e.at("participants").get<std::vector<int>>();
            ev.scoreDelta = e.at("scoreDelta").get<int>();
            t.events.push_back(std::move(ev));
        }
        auto outcome = parse_outcome(j.at("outcome").get<std::string>());
        if (!outcome) throw Error(ErrorCode::BadConfig, "playtrace: unknown outcome");
        t.outcome = *outcome;
        t.finalTick = j.at("finalTick").get<int>();
        t.finalScore = j.at("finalScore").get<int>();
        return t;
    });
}

Json to_json(const MechanicGraph& graph) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "mechanic";
    Json nodes = Json::array();
    for (const auto& n : graph.nodes()) nodes.push_back(node_json(n));
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (size_t a = 0; a < graph.nodes().size(); ++a)
        for (size_t b : graph.neighbors(a)) edges.push_back({graph.nodes()[a].id, graph.nodes()[b].id});
    j["edges"] = edges;
    return j;
}

Json to_json(const AtomicGraph& graph) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["kind"] = "atomic";
    Json nodes = Json::array();
    for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const auto& n = graph.nodes[i];
        Json node;
        node["index"] = i;
        node["kind"] = n.kind == AtomicKind::Object ? "object" : n.kind == AtomicKind::Condition ? "condition" : "action";
        node["label"] = n.label;
        nodes.push_back(node);
    }
    j["nodes"] = nodes;
    Json edges = Json::array();
    for (size_t a = 0; a < graph.nodes.size(); ++a)
        for (size_t b : graph.successors[a]) edges.push_back({a, b});
    j["edges"] = edges;
    return j;
}

Json to_json(const CriticalPath& path) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["method"] = std::string(to_string(path.method));
    j["mechanics"] = path.mechanics;
    j["terminalId"] = path.terminalId ? Json(*path.terminalId) : Json(nullptr);
    Json frames = Json::object();
    for (const auto& id : path.mechanics)
        if (auto it = path.frames.find(id); it != path.frames.end()) frames[id] = it->second;
    j["frames"] = frames;
    j["fallback"] = path.fallback;
    return j;
}

CriticalPath critical_path_from_json(const Json& j) {
    require_schema(j, "critical path");
    return guarded("critical path", [&] {
        CriticalPath p;
        auto method = parse_method(j.at("method").get<std::string>());
        if (!method) throw Error(ErrorCode::BadConfig, "critical path: unknown method");
        p.method = *method;
        p.mechanics = j.at("mechanics").get<std::vector<std::string>>();
        if (j.contains("terminalId") && !j.at("terminalId").is_null())
            p.terminalId = j.at("terminalId").get<std::string>();
        if (j.contains("frames"))
            for (const auto& [id, frame] : j.at("frames").items()) p.frames[id] = frame.get<int>();
        p.fallback = j.value("fallback", false);
        return p;
    });
}

Json to_json(const HumanMechanicTable& table) {
    Json j;
    j["schemaVersion"] = kSchemaVersion;
    j["game"] = table.game;
    Json rows = Json::array();
    for (const auto& r : table.rows)
        rows.push_back({{"label", r.label},
                        {"percentage", r.percentage},
                        {"ids", r.ids},
                        {"playtrace", r.playtraceMark},
                        {"baseline", r.baselineMark}});
    j["rows"] = rows;
    j["printed"] = {{"playtrace", table.printedPlaytrace ? Json(*table.printedPlaytrace) : Json(nullptr)},
                    {"baseline", table.printedBaseline ? Json(*table.printedBaseline) : Json(nullptr)}};
    return j;
}

HumanMechanicTable human_table_from_json(const Json& j) {
    require_schema(j, "human table");
    return guarded("human table", [&] {
        HumanMechanicTable t;
        t.game = j.at("game").get<std::string>();
        for (const auto& r : j.at("rows")) {
            HumanMechanicRow row;
            row.label = r.at("label").get<std::string>();
            row.percentage = r.at("percentage").get<double>();
            row.ids = r.at("ids").get<std::vector<std::string>>();
            row.playtraceMark = r.value("playtrace", false);
            row.baselineMark = r.value("baseline", false);
            if (row.percentage < 0 || row.percentage > 100)
                throw Error(ErrorCode::BadConfig, "human table: percentage out of range in '" + row.label + "'");
            t.rows.push_back(std::move(row));
        }
        if (j.contains("printed")) {
            const auto& p = j.at("printed");
            if (p.contains("playtrace") && !p.at("playtrace").is_null()) t.printedPlaytrace = p.at("playtrace").get<double>();
            if (p.contains("baseline") && !p.at("baseline").is_null()) t.printedBaseline = p.at("baseline").get<double>();
        }
        return t;
    });
}

Json to_json(const AgentConfig& cfg) {
    Json j;
    j["explorationC"] = cfg.explorationC;
    j["maxTreeNodes"] = cfg.maxTreeNodes;
    j["rolloutDepth"] = cfg.rolloutDepth;
    j["seed"] = cfg.seed;
    j["evaluator"] = cfg.evaluator == EvaluatorKind::Vanilla ? "vanilla" : "mechanic";
    j["criticalSet"] = cfg.criticalSet;
    j["winBonus"] = cfg.winBonus;
    j["lossPenalty"] = cfg.lossPenalty;
    j["discountBase"] = cfg.discountBase;
    j["countHistory"] = cfg.countHistory;
    return j;
}

AgentConfig agent_config_from_json(const Json& j, AgentConfig base) {
    return guarded("agent config", [&] {
        AgentConfig c = std::move(base);
        c.explorationC = j.value("explorationC", c.explorationC);
        c.maxTreeNodes = j.value("maxTreeNodes", c.maxTreeNodes);
        c.rolloutDepth = j.value("rolloutDepth", c.rolloutDepth);
        c.seed = j.value("seed", c.seed);
        if (j.contains("evaluator")) {
            auto e = j.at("evaluator").get<std::string>();
            if (e == "vanilla") c.evaluator = EvaluatorKind::Vanilla;
            else if (e == "mechanic") c.evaluator = EvaluatorKind::Mechanic;
            else throw Error(ErrorCode::BadConfig, "agent config: unknown evaluator '" + e + "'");
        }
        if (j.contains("criticalSet")) c.criticalSet = j.at("criticalSet").get<std::set<std::string>>();
        c.winBonus = j.value("winBonus", c.winBonus);
        c.lossPenalty = j.value("lossPenalty", c.lossPenalty);
        c.discountBase = j.value("discountBase", c.discountBase);
        c.countHistory = j.value("countHistory", c.countHistory);
        c.check();
        return c;
    });
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    out << text;
}

Json read_json(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadConfig, path + ": " + e.what());
    }
}

} // namespace critmech
