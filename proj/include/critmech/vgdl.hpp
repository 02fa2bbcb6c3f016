#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace critmech {

struct GridPos {
    int x = 0;
    int y = 0;

    friend constexpr GridPos operator+(GridPos a, GridPos b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr GridPos operator-(GridPos a, GridPos b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr auto operator<=>(const GridPos&, const GridPos&) = default;
};

namespace dir {
inline constexpr GridPos none{0, 0};
inline constexpr GridPos up{0, -1};
inline constexpr GridPos down{0, 1};
inline constexpr GridPos left{-1, 0};
inline constexpr GridPos right{1, 0};
} // namespace dir

std::optional<GridPos> parse_direction(std::string_view token);
std::string_view direction_name(GridPos d);

enum class SpriteClass {
    Immovable,
    Passive,
    Missile,
    RandomNPC,
    Bomber,
    SpawnPoint,
    Flicker,
    Portal,
    MovingAvatar,
    ShootAvatar,
    OngoingAvatar,
    Abstract,
};

std::string_view to_string(SpriteClass cls);
std::optional<SpriteClass> parse_sprite_class(std::string_view token);
constexpr bool is_avatar_class(SpriteClass cls) {
    return cls == SpriteClass::MovingAvatar || cls == SpriteClass::ShootAvatar ||
           cls == SpriteClass::OngoingAvatar;
}

struct SpriteParams {
    std::optional<GridPos> orientation;
    std::optional<int> speedPeriod;
    std::optional<std::string> stype;
    std::optional<double> prob;
    std::optional<int> limit;
    std::optional<std::string> exitName;

    friend bool operator==(const SpriteParams&, const SpriteParams&) = default;
};

/// A sprite declaration with inherited class and parameters already resolved.
struct SpriteDef {
    std::string name;
    std::optional<std::string> parent;
    SpriteClass cls = SpriteClass::Immovable;
    SpriteParams params;

    friend bool operator==(const SpriteDef&, const SpriteDef&) = default;
};

enum class Effect { KillSprite, KillBoth, TransformTo, StepBack, TeleportToExit, BounceForward };

std::string_view to_string(Effect effect);
std::optional<Effect> parse_effect(std::string_view token);

/// `first second > effect`; the effect applies to `first`.
struct InteractionRule {
    std::string first;
    std::string second;
    Effect effect = Effect::KillSprite;
    std::optional<std::string> stype;
    bool killSecond = false;
    int scoreChange = 0;

    friend bool operator==(const InteractionRule&, const InteractionRule&) = default;
};

enum class TerminationKind { SpriteCounter, SpriteCounterMore, MultiSpriteCounter, Timeout };

std::string_view to_string(TerminationKind kind);
std::optional<TerminationKind> parse_termination_kind(std::string_view token);

struct TerminationRule {
    TerminationKind kind = TerminationKind::Timeout;
    std::vector<std::string> stypes;
    int limit = 0;
    bool win = false;

    friend bool operator==(const TerminationRule&, const TerminationRule&) = default;
};

struct GameDescription {
    std::string name;
    std::vector<SpriteDef> sprites;
    std::vector<InteractionRule> interactions;
    std::vector<TerminationRule> terminations;
    std::map<char, std::vector<std::string>> levelMapping;

    friend bool operator==(const GameDescription&, const GameDescription&) = default;

    const SpriteDef* find_sprite(std::string_view name) const;
    const SpriteDef& sprite(std::string_view name) const;

    /// True when `name` equals `ancestor` or descends from it.
    bool is_a(std::string_view name, std::string_view ancestor) const;

    /// Name of the avatar-class sprite with no avatar-class parent, if unique.
    std::optional<std::string> avatar_root() const;

    /// Non-Abstract sprites of the avatar hierarchy, in declaration order.
    std::vector<std::string> avatar_hierarchy() const;
    bool in_avatar_hierarchy(std::string_view name) const;

    /// Avatar-hierarchy leaves of class ShootAvatar; each owns one USE capability.
    std::vector<std::string> shooters() const;

    std::vector<std::string> children_of(std::string_view name) const;
};

struct LevelGrid {
    int width = 0;
    int height = 0;
    /// Row-major, `height * width` entries.
    std::vector<std::vector<std::string>> cells;

    const std::vector<std::string>& at(int x, int y) const { return cells[static_cast<size_t>(y * width + x)]; }
    friend bool operator==(const LevelGrid&, const LevelGrid&) = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
    std::string code;
    Severity severity = Severity::Error;
    std::string message;
};

GameDescription parse_game(std::string_view text);
LevelGrid parse_level(std::string_view text, const GameDescription& desc);

/// Cross-reference checks. Empty iff the description is clean.
std::vector<Diagnostic> validate(const GameDescription& desc);

/// Canonical text form; `parse_game(to_text(d)) == d` for every parsed `d`.
std::string to_text(const GameDescription& desc);

} // namespace critmech
