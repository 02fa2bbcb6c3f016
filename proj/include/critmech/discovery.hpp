#pragma once

#include "critmech/engine.hpp"
#include "critmech/error.hpp"
#include "critmech/graph.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace critmech {

enum class DiscoveryMethod { Playtrace, Baseline };

std::string_view to_string(DiscoveryMethod method);
std::optional<DiscoveryMethod> parse_method(std::string_view token);

struct CriticalPath {
    /// Mechanic ids in discovery order.
    std::vector<std::string> mechanics;
    /// The win mechanic, present when the path reached one.
    std::optional<std::string> terminalId;
    DiscoveryMethod method = DiscoveryMethod::Playtrace;
    /// Frames of the listed mechanics (playtrace method only).
    std::map<std::string, int> frames;
    /// Baseline only: no player-driven start reached a win action.
    bool fallback = false;

    std::set<std::string> id_set() const { return {mechanics.begin(), mechanics.end()}; }
    friend bool operator==(const CriticalPath&, const CriticalPath&) = default;
};

/// NO_WIN_PATH with the path popped so far.
class NoWinPathError : public Error {
public:
    explicit NoWinPathError(CriticalPath partial)
        : Error(ErrorCode::NoWinPath, "search exhausted after " + std::to_string(partial.mechanics.size()) +
                                          " mechanics without reaching a win"),
          partial_(std::move(partial)) {}

    const CriticalPath& partial() const noexcept { return partial_; }

private:
    CriticalPath partial_;
};

/// Fewest unique mechanics among winning traces; then shorter, then the smaller
/// (game, level, seed, actions) tuple.
const Playtrace& select_playtrace(std::span<const Playtrace> traces);

/// Greedy best-first search by frame from the annotated player-centric mechanics.
/// Every popped mechanic is recorded; the search stops at the first win popped.
CriticalPath find_critical_path(const MechanicGraph& annotated);

/// Adds, right after each collision mechanic, the mechanics of identical shape whose
/// operands differ only by sprites sharing an immediate parent.
CriticalPath expand_siblings(const CriticalPath& path, const GameDescription& desc, const MechanicGraph& graph);

/// Longest of the per-start shortest paths from player-driven conditions to a win action.
CriticalPath atdelfi_baseline(const AtomicGraph& atomic);

struct HumanMechanicRow {
    std::string label;
    std::vector<std::string> ids;
    double percentage = 0;
    /// Reference marks for the two methods.
    bool playtraceMark = false;
    bool baselineMark = false;
};

struct HumanMechanicTable {
    std::string game;
    std::vector<HumanMechanicRow> rows;
    /// Reference match rates in percent, as published.
    std::optional<double> printedPlaytrace;
    std::optional<double> printedBaseline;
};

/// Indices of rows whose ids intersect `discovered`.
std::vector<size_t> matched_rows(const HumanMechanicTable& table, const std::set<std::string>& discovered);

/// Percentage-weighted share of rows hit by `discovered`, in [0, 1].
double match_rate(const HumanMechanicTable& table, const std::set<std::string>& discovered);

} // namespace critmech
