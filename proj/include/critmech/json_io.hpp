#pragma once

#include "critmech/agents.hpp"
#include "critmech/discovery.hpp"
#include "critmech/engine.hpp"
#include "critmech/graph.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace critmech {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const Playtrace& trace);
Playtrace playtrace_from_json(const Json& j);

Json to_json(const MechanicGraph& graph);
Json to_json(const AtomicGraph& graph);

Json to_json(const CriticalPath& path);
CriticalPath critical_path_from_json(const Json& j);

Json to_json(const HumanMechanicTable& table);
HumanMechanicTable human_table_from_json(const Json& j);

Json to_json(const AgentConfig& cfg);
/// Fields missing from `j` keep the values of `base`.
AgentConfig agent_config_from_json(const Json& j, AgentConfig base = {});

/// Pretty-printed with a trailing newline; identical values give identical text.
std::string dump(const Json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

} // namespace critmech
