#pragma once

#include "critmech/vgdl.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace critmech {

inline constexpr std::string_view kEngineVersion = "1";

enum class Action : std::uint8_t { Nil, Up, Down, Left, Right, Use };

inline constexpr std::array<Action, 6> kAllActions{Action::Nil, Action::Up,    Action::Down,
                                                   Action::Left, Action::Right, Action::Use};

std::string_view to_string(Action action);
std::optional<Action> parse_action(std::string_view token);
GridPos action_direction(Action action);

enum class Outcome { Ongoing, Win, Loss };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view token);

/// SplitMix64; small, fast and identical on every platform.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t state = 0) : state_(state) {}

    constexpr std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
    constexpr std::uint64_t state() const { return state_; }

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

/// A description compiled against one level: type indices, the is-a table and the
/// mechanic id table. Immutable and shared by every state of the game.
class Game {
public:
    static std::shared_ptr<const Game> compile(GameDescription desc, LevelGrid level);

    const GameDescription& description() const { return desc_; }
    const LevelGrid& level() const { return level_; }
    int width() const { return level_.width; }
    int height() const { return level_.height; }

    int type_count() const { return static_cast<int>(desc_.sprites.size()); }
    int type_index(std::string_view name) const;
    const std::string& type_name(int type) const { return desc_.sprites[static_cast<size_t>(type)].name; }
    const SpriteDef& type_def(int type) const { return desc_.sprites[static_cast<size_t>(type)]; }
    bool is_a(int type, int ancestor) const { return isA_[static_cast<size_t>(type * type_count() + ancestor)]; }
    bool is_avatar_type(int type) const { return avatarType_[static_cast<size_t>(type)] != 0; }

    const std::vector<std::string>& mechanic_ids() const { return mechanicIds_; }
    int interaction_mechanic(size_t rule) const { return static_cast<int>(rule); }
    /// Mechanic index of the USE capability of `type`, or -1.
    int shooter_mechanic(int type) const { return shooterMechanic_[static_cast<size_t>(type)]; }
    int termination_mechanic(size_t rule) const {
        return static_cast<int>(desc_.interactions.size() + shooterCount_ + rule);
    }

    struct CompiledRule {
        int first;
        int second;
        Effect effect;
        int stype;
        bool killSecond;
        int scoreChange;
        int exitType; // exit of the Portal `second`, for teleportToExit
    };
    const std::vector<CompiledRule>& rules() const { return rules_; }

private:
    Game() = default;

    GameDescription desc_;
    LevelGrid level_;
    std::vector<char> isA_;
    std::vector<char> avatarType_;
    std::vector<std::string> mechanicIds_;
    std::vector<int> shooterMechanic_;
    size_t shooterCount_ = 0;
    std::vector<CompiledRule> rules_;
};

struct SpriteInstance {
    int id = 0;
    int type = 0;
    GridPos pos;
    GridPos orientation = dir::up;
    int age = 0;
    /// Position at the start of the current tick; the target of stepBack.
    GridPos prevPos;
    bool alive = true;

    friend bool operator==(const SpriteInstance&, const SpriteInstance&) = default;
};

/// A fired mechanic. `mechanic` indexes `Game::mechanic_ids()`.
struct GameEvent {
    int tick = 0;
    int mechanic = 0;
    int first = -1;
    int second = -1;
    int scoreDelta = 0;

    friend bool operator==(const GameEvent&, const GameEvent&) = default;
};

class GameState {
public:
    const Game& game() const { return *game_; }
    const std::shared_ptr<const Game>& game_ptr() const { return game_; }

    int tick() const { return tick_; }
    int score() const { return score_; }
    Outcome outcome() const { return outcome_; }
    std::uint64_t rng_state() const { return rng_; }
    const std::vector<SpriteInstance>& sprites() const { return sprites_; }
    const SpriteInstance* avatar() const;
    const std::string& stype(const SpriteInstance& s) const { return game_->type_name(s.type); }
    int count_of(std::string_view name) const;
    /// Replaces the generator state; forward-model samples use this to decorrelate from the real game.
    void reseed(std::uint64_t seed) { rng_ = mix64(seed); }

    friend bool operator==(const GameState& a, const GameState& b) {
        return a.game_ == b.game_ && a.tick_ == b.tick_ && a.score_ == b.score_ && a.outcome_ == b.outcome_ &&
               a.rng_ == b.rng_ && a.nextId_ == b.nextId_ && a.sprites_ == b.sprites_;
    }

private:
    friend class Stepper;
    friend GameState init(std::shared_ptr<const Game> game, std::uint64_t seed);

    std::shared_ptr<const Game> game_;
    int tick_ = 0;
    int score_ = 0;
    Outcome outcome_ = Outcome::Ongoing;
    std::uint64_t rng_ = 0;
    int nextId_ = 0;
    std::vector<SpriteInstance> sprites_;
};

GameState init(std::shared_ptr<const Game> game, std::uint64_t seed);
GameState init(const GameDescription& desc, const LevelGrid& level, std::uint64_t seed);

/// Advances `state` one tick in place, appending fired mechanics to `events`.
/// Throws ContractViolation when the state has already terminated.
void advance(GameState& state, Action action, std::vector<GameEvent>& events);

/// Value form of `advance`.
std::pair<GameState, std::vector<GameEvent>> step(const GameState& state, Action action);

/// Evaluates terminations without advancing time; used before the first step so that
/// degenerate games (e.g. a zero tick timeout) end immediately.
void settle(GameState& state, std::vector<GameEvent>& events);

inline GameState clone_state(const GameState& state) { return state; }

/// Actions the avatar can take: arrows and NIL, plus USE for shooters.
std::vector<Action> legal_actions(const GameState& state);

struct TraceEvent {
    int tick = 0;
    std::string mechanicId;
    std::vector<int> participants;
    int scoreDelta = 0;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

TraceEvent to_trace_event(const Game& game, const GameEvent& event);

struct Playtrace {
    std::string gameName;
    std::string levelName;
    std::uint64_t seed = 0;
    std::vector<Action> actions;
    std::vector<TraceEvent> events;
    int finalTick = 0;
    int finalScore = 0;
    Outcome outcome = Outcome::Ongoing;

    std::set<std::string> unique_mechanics() const;
    friend bool operator==(const Playtrace&, const Playtrace&) = default;
};

/// Steps `actions` from a fresh state until termination. Trailing actions after the end
/// are dropped from the trace; running out of actions first raises IncompleteTrace.
Playtrace replay(const GameDescription& desc, const LevelGrid& level, std::uint64_t seed,
                 std::span<const Action> actions, std::string gameName = {}, std::string levelName = {});

std::vector<Action> parse_actions(std::string_view text);
std::string format_actions(std::span<const Action> actions);

} // namespace critmech
