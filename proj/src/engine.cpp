#include "critmech/engine.hpp"

#include "critmech/error.hpp"
#include "critmech/graph.hpp"

#include <algorithm>
#include <sstream>

namespace critmech {

namespace {

constexpr std::array<std::string_view, 6> kActionNames{"NIL", "UP", "DOWN", "LEFT", "RIGHT", "USE"};

int default_period(const SpriteDef& def) { return def.params.speedPeriod.value_or(1); }

} // namespace

std::string_view to_string(Action action) { return kActionNames[static_cast<size_t>(action)]; }

std::optional<Action> parse_action(std::string_view token) {
    for (size_t i = 0; i < kActionNames.size(); ++i)
        if (kActionNames[i] == token) return static_cast<Action>(i);
    return std::nullopt;
}

GridPos action_direction(Action action) {
    switch (action) {
    case Action::Up: return dir::up;
    case Action::Down: return dir::down;
    case Action::Left: return dir::left;
    case Action::Right: return dir::right;
    default: return dir::none;
    }
}

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
    case Outcome::Ongoing: return "Ongoing";
    case Outcome::Win: return "Win";
    case Outcome::Loss: return "Loss";
    }
    return "?";
}

std::optional<Outcome> parse_outcome(std::string_view token) {
    if (token == "Ongoing") return Outcome::Ongoing;
    if (token == "Win") return Outcome::Win;
    if (token == "Loss") return Outcome::Loss;
    return std::nullopt;
}

std::uint64_t mix64(std::uint64_t x) { return SplitMix64(x).next(); }

std::shared_ptr<const Game> Game::compile(GameDescription desc, LevelGrid level) {
    for (const auto& d : validate(desc))
        if (d.severity == Severity::Error) throw Error(ErrorCode::InvalidDescription, d.code + ": " + d.message);

    std::shared_ptr<Game> game(new Game());
    game->desc_ = std::move(desc);
    game->level_ = std::move(level);
    const auto& dsc = game->desc_;
    const int n = game->type_count();

    game->isA_.assign(static_cast<size_t>(n * n), 0);
    for (int t = 0; t < n; ++t)
        for (int a = 0; a < n; ++a)
            game->isA_[static_cast<size_t>(t * n + a)] = dsc.is_a(dsc.sprites[static_cast<size_t>(t)].name,
                                                                  dsc.sprites[static_cast<size_t>(a)].name);
    game->avatarType_.assign(static_cast<size_t>(n), 0);
    for (int t = 0; t < n; ++t)
        game->avatarType_[static_cast<size_t>(t)] = dsc.in_avatar_hierarchy(dsc.sprites[static_cast<size_t>(t)].name);

    for (const auto& node : enumerate_mechanics(dsc)) game->mechanicIds_.push_back(node.id);
    game->shooterMechanic_.assign(static_cast<size_t>(n), -1);
    auto shooters = dsc.shooters();
    game->shooterCount_ = shooters.size();
    for (size_t i = 0; i < shooters.size(); ++i)
        game->shooterMechanic_[static_cast<size_t>(game->type_index(shooters[i]))] =
            static_cast<int>(dsc.interactions.size() + i);

    for (const auto& r : dsc.interactions) {
        CompiledRule c{};
        c.first = game->type_index(r.first);
        c.second = game->type_index(r.second);
        c.effect = r.effect;
        c.stype = r.stype ? game->type_index(*r.stype) : -1;
        c.killSecond = r.killSecond;
        c.scoreChange = r.scoreChange;
        c.exitType = -1;
        const auto& secondDef = dsc.sprite(r.second);
        if (secondDef.params.exitName) c.exitType = game->type_index(*secondDef.params.exitName);
        game->rules_.push_back(c);
    }

    for (const auto& cell : game->level_.cells)
        for (const auto& name : cell)
            if (dsc.sprite(name).cls == SpriteClass::Abstract)
                throw Error(ErrorCode::InvalidDescription, "Abstract sprite '" + name + "' placed in level");
    return game;
}

int Game::type_index(std::string_view name) const {
    for (size_t i = 0; i < desc_.sprites.size(); ++i)
        if (desc_.sprites[i].name == name) return static_cast<int>(i);
    throw Error(ErrorCode::UndeclaredSprite, "undeclared sprite '" + std::string(name) + "'");
}

const SpriteInstance* GameState::avatar() const {
    for (const auto& s : sprites_)
        if (s.alive && game_->is_avatar_type(s.type)) return &s;
    return nullptr;
}

int GameState::count_of(std::string_view name) const {
    int type = game_->type_index(name);
    return static_cast<int>(std::count_if(sprites_.begin(), sprites_.end(), [&](const SpriteInstance& s) {
        return s.alive && game_->is_a(s.type, type);
    }));
}

/// The in-place step. Scratch buffers are reused across calls on the same thread.
class Stepper {
public:
    Stepper(GameState& state, std::vector<GameEvent>& events)
        : s_(state), game_(*state.game_), events_(events) {}

    void step(Action action) {
        if (s_.outcome_ != Outcome::Ongoing)
            throw Error(ErrorCode::ContractViolation, "step called on a terminated state");
        ++s_.tick_;
        SplitMix64 master(s_.rng_);
        stepKey_ = master.next();
        s_.rng_ = master.state();
        for (auto& sp : s_.sprites_) {
            sp.prevPos = sp.pos;
            ++sp.age;
        }

        int avatarIndex = find_avatar();
        const size_t existing = s_.sprites_.size();
        if (avatarIndex >= 0) move_avatar(static_cast<size_t>(avatarIndex), action);
        for (size_t i = 0; i < existing; ++i)
            if (static_cast<int>(i) != avatarIndex && s_.sprites_[i].alive) act(i);
        interactions();
        if (action == Action::Use) use();
        terminations();
        compact();
    }

    void terminations() {
        const auto& desc = game_.description();
        std::vector<int> counts(static_cast<size_t>(game_.type_count()), 0);
        for (const auto& sp : s_.sprites_)
            if (sp.alive) ++counts[static_cast<size_t>(sp.type)];
        auto count = [&](const std::string& name) {
            int target = game_.type_index(name);
            int total = 0;
            for (int t = 0; t < game_.type_count(); ++t)
                if (game_.is_a(t, target)) total += counts[static_cast<size_t>(t)];
            return total;
        };
        for (size_t k = 0; k < desc.terminations.size(); ++k) {
            const auto& t = desc.terminations[k];
            bool fired = false;
            switch (t.kind) {
            case TerminationKind::SpriteCounter: fired = count(t.stypes.front()) <= t.limit; break;
            case TerminationKind::SpriteCounterMore: fired = count(t.stypes.front()) >= t.limit; break;
            case TerminationKind::MultiSpriteCounter: {
                int total = 0;
                for (const auto& name : t.stypes) total += count(name);
                fired = total <= t.limit;
                break;
            }
            case TerminationKind::Timeout: fired = s_.tick_ >= t.limit; break;
            }
            if (fired) {
                s_.outcome_ = t.win ? Outcome::Win : Outcome::Loss;
                events_.push_back({s_.tick_, game_.termination_mechanic(k), -1, -1, 0});
                return;
            }
        }
        // The avatar is gone but no rule noticed: the episode is lost without an event.
        if (find_avatar() < 0) s_.outcome_ = Outcome::Loss;
    }

private:
    int find_avatar() const {
        for (size_t i = 0; i < s_.sprites_.size(); ++i)
            if (s_.sprites_[i].alive && game_.is_avatar_type(s_.sprites_[i].type)) return static_cast<int>(i);
        return -1;
    }

    bool in_bounds(GridPos p) const { return p.x >= 0 && p.y >= 0 && p.x < game_.width() && p.y < game_.height(); }

    GridPos clamp(GridPos p) const {
        return {std::clamp(p.x, 0, game_.width() - 1), std::clamp(p.y, 0, game_.height() - 1)};
    }

    SplitMix64 sprite_rng(int id) const { return SplitMix64(stepKey_ ^ mix64(static_cast<std::uint64_t>(id) + 1)); }

    void move_avatar(size_t index, Action action) {
        auto& av = s_.sprites_[index];
        const SpriteDef& def = game_.type_def(av.type);
        GridPos d = action_direction(action);
        if (d != dir::none) av.orientation = d;
        if (def.cls == SpriteClass::OngoingAvatar) av.pos = clamp(av.pos + av.orientation);
        else if (d != dir::none) av.pos = clamp(av.pos + d);
    }

    void act(size_t index) {
        SpriteInstance& sp = s_.sprites_[index];
        const SpriteDef& def = game_.type_def(sp.type);
        const bool moveTick = sp.age % default_period(def) == 0;
        switch (def.cls) {
        case SpriteClass::Missile:
            if (moveTick) sp.pos = clamp(sp.pos + sp.orientation);
            break;
        case SpriteClass::RandomNPC:
            if (moveTick) {
                std::array<GridPos, 4> options{};
                size_t n = 0;
                for (GridPos d : {dir::up, dir::down, dir::left, dir::right})
                    if (in_bounds(sp.pos + d)) options[n++] = d;
                if (n > 0) {
                    auto rng = sprite_rng(sp.id);
                    GridPos d = options[rng.below(n)];
                    sp.orientation = d;
                    sp.pos = sp.pos + d;
                }
            }
            break;
        case SpriteClass::Bomber:
            if (moveTick) {
                if (!in_bounds(sp.pos + sp.orientation)) sp.orientation = GridPos{-sp.orientation.x, -sp.orientation.y};
                sp.pos = clamp(sp.pos + sp.orientation);
            }
            maybe_spawn(index);
            break;
        case SpriteClass::SpawnPoint: maybe_spawn(index); break;
        case SpriteClass::Flicker:
            if (sp.age >= def.params.limit.value_or(0)) sp.alive = false;
            break;
        default: break;
        }
    }

    void maybe_spawn(size_t index) {
        const SpriteInstance& sp = s_.sprites_[index];
        const SpriteDef& def = game_.type_def(sp.type);
        auto rng = sprite_rng(sp.id);
        rng.next(); // the first draw belongs to movement
        if (rng.uniform() >= def.params.prob.value_or(1.0)) return;
        int type = game_.type_index(*def.params.stype);
        GridPos orientation = game_.type_def(type).params.orientation.value_or(sp.orientation);
        create(type, sp.pos, orientation);
    }

    size_t create(int type, GridPos pos, GridPos orientation) {
        SpriteInstance sp;
        sp.id = s_.nextId_++;
        sp.type = type;
        sp.pos = pos;
        sp.prevPos = pos;
        sp.orientation = orientation;
        sp.age = 0;
        s_.sprites_.push_back(sp);
        size_t index = s_.sprites_.size() - 1;
        if (indexed_) cells_[cell(pos)].push_back(index);
        return index;
    }

    size_t cell(GridPos p) const { return static_cast<size_t>(p.y * game_.width() + p.x); }

    void relocate(size_t index, GridPos to) {
        auto& sp = s_.sprites_[index];
        if (sp.pos == to) return;
        auto& from = cells_[cell(sp.pos)];
        from.erase(std::find(from.begin(), from.end(), index));
        sp.pos = to;
        cells_[cell(to)].push_back(index);
    }

    void interactions() {
        const auto& rules = game_.rules();
        if (rules.empty()) return;
        cells_.resize(static_cast<size_t>(game_.width() * game_.height()));
        for (auto& c : cells_) c.clear();
        for (size_t i = 0; i < s_.sprites_.size(); ++i)
            if (s_.sprites_[i].alive) cells_[cell(s_.sprites_[i].pos)].push_back(i);
        indexed_ = true;

        for (size_t r = 0; r < rules.size(); ++r) {
            const auto& rule = rules[r];
            for (size_t i = 0; i < s_.sprites_.size(); ++i) {
                if (!s_.sprites_[i].alive || !game_.is_a(s_.sprites_[i].type, rule.first)) continue;
                const GridPos origin = s_.sprites_[i].pos;
                const size_t c = cell(origin);
                for (size_t k = 0; k < cells_[c].size(); ++k) {
                    size_t j = cells_[c][k];
                    if (j == i) continue;
                    const auto& b = s_.sprites_[j];
                    if (!b.alive || b.pos != origin || !game_.is_a(b.type, rule.second)) continue;
                    apply(r, i, j);
                    const auto& a = s_.sprites_[i];
                    if (!a.alive || a.pos != origin) break;
                }
            }
        }
        indexed_ = false;
    }

    void apply(size_t ruleIndex, size_t i, size_t j) {
        const auto& rule = game_.rules()[ruleIndex];
        events_.push_back({s_.tick_, game_.interaction_mechanic(ruleIndex), s_.sprites_[i].id, s_.sprites_[j].id,
                           rule.scoreChange});
        s_.score_ += rule.scoreChange;
        switch (rule.effect) {
        case Effect::KillSprite: s_.sprites_[i].alive = false; break;
        case Effect::KillBoth:
            s_.sprites_[i].alive = false;
            s_.sprites_[j].alive = false;
            break;
        case Effect::TransformTo: {
            s_.sprites_[i].alive = false;
            if (rule.killSecond) s_.sprites_[j].alive = false;
            GridPos pos = s_.sprites_[i].pos;
            GridPos orientation = s_.sprites_[i].orientation;
            size_t created = create(rule.stype, pos, orientation);
            s_.sprites_[created].prevPos = s_.sprites_[i].prevPos;
            break;
        }
        case Effect::StepBack: relocate(i, s_.sprites_[i].prevPos); break;
        case Effect::TeleportToExit: {
            // The newest live exit wins; without one the portal does nothing.
            const SpriteInstance* exit = nullptr;
            for (const auto& sp : s_.sprites_)
                if (sp.alive && game_.is_a(sp.type, rule.exitType)) exit = &sp;
            if (exit) relocate(i, exit->pos);
            break;
        }
        case Effect::BounceForward: {
            const auto& pusher = s_.sprites_[j];
            GridPos d = pusher.pos - pusher.prevPos;
            if (d == dir::none) d = pusher.orientation;
            s_.sprites_[i].orientation = d;
            relocate(i, clamp(s_.sprites_[i].pos + d));
            break;
        }
        }
    }

    void use() {
        int index = find_avatar();
        if (index < 0) return;
        const SpriteInstance av = s_.sprites_[static_cast<size_t>(index)];
        int mechanic = game_.shooter_mechanic(av.type);
        if (mechanic < 0) return;
        GridPos target = av.pos + av.orientation;
        if (!in_bounds(target)) return;
        int type = game_.type_index(*game_.type_def(av.type).params.stype);
        size_t created = create(type, target, av.orientation);
        events_.push_back({s_.tick_, mechanic, av.id, s_.sprites_[created].id, 0});
    }

    void compact() {
        std::erase_if(s_.sprites_, [](const SpriteInstance& sp) { return !sp.alive; });
    }

    GameState& s_;
    const Game& game_;
    std::vector<GameEvent>& events_;
    std::uint64_t stepKey_ = 0;
    bool indexed_ = false;
    static thread_local std::vector<std::vector<size_t>> cells_;
};

thread_local std::vector<std::vector<size_t>> Stepper::cells_;

GameState init(std::shared_ptr<const Game> game, std::uint64_t seed) {
    GameState state;
    state.game_ = std::move(game);
    state.rng_ = mix64(seed);
    const Game& g = *state.game_;
    for (int y = 0; y < g.height(); ++y) {
        for (int x = 0; x < g.width(); ++x) {
            for (const auto& name : g.level().at(x, y)) {
                SpriteInstance sp;
                sp.id = state.nextId_++;
                sp.type = g.type_index(name);
                sp.pos = {x, y};
                sp.prevPos = sp.pos;
                sp.orientation = g.type_def(sp.type).params.orientation.value_or(dir::up);
                state.sprites_.push_back(sp);
            }
        }
    }
    return state;
}

GameState init(const GameDescription& desc, const LevelGrid& level, std::uint64_t seed) {
    return init(Game::compile(desc, level), seed);
}

void advance(GameState& state, Action action, std::vector<GameEvent>& events) {
    Stepper(state, events).step(action);
}

std::pair<GameState, std::vector<GameEvent>> step(const GameState& state, Action action) {
    std::pair<GameState, std::vector<GameEvent>> out{state, {}};
    advance(out.first, action, out.second);
    return out;
}

void settle(GameState& state, std::vector<GameEvent>& events) {
    if (state.outcome() != Outcome::Ongoing) return;
    Stepper(state, events).terminations();
}

std::vector<Action> legal_actions(const GameState& state) {
    const SpriteInstance* av = state.avatar();
    std::vector<Action> out{Action::Nil, Action::Up, Action::Down, Action::Left, Action::Right};
    if (av && state.game().type_def(av->type).cls == SpriteClass::ShootAvatar) out.push_back(Action::Use);
    return out;
}

TraceEvent to_trace_event(const Game& game, const GameEvent& event) {
    TraceEvent out;
    out.tick = event.tick;
    out.mechanicId = game.mechanic_ids()[static_cast<size_t>(event.mechanic)];
    if (event.first >= 0) out.participants.push_back(event.first);
    if (event.second >= 0) out.participants.push_back(event.second);
    out.scoreDelta = event.scoreDelta;
    return out;
}

std::set<std::string> Playtrace::unique_mechanics() const {
    std::set<std::string> out;
    for (const auto& e : events) out.insert(e.mechanicId);
    return out;
}

Playtrace replay(const GameDescription& desc, const LevelGrid& level, std::uint64_t seed,
                 std::span<const Action> actions, std::string gameName, std::string levelName) {
    GameState state = init(desc, level, seed);
    std::vector<GameEvent> events;
    Playtrace trace;
    trace.gameName = std::move(gameName);
    trace.levelName = std::move(levelName);
    trace.seed = seed;
    settle(state, events);
    for (Action a : actions) {
        if (state.outcome() != Outcome::Ongoing) break;
        trace.actions.push_back(a);
        advance(state, a, events);
    }
    if (state.outcome() == Outcome::Ongoing)
        throw Error(ErrorCode::IncompleteTrace, "action script ended at tick " + std::to_string(state.tick()) +
                                                    " before the game terminated");
    for (const auto& e : events) trace.events.push_back(to_trace_event(state.game(), e));
    trace.finalTick = state.tick();
    trace.finalScore = state.score();
    trace.outcome = state.outcome();
    return trace;
}

std::vector<Action> parse_actions(std::string_view text) {
    std::vector<Action> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        std::string token = line.substr(b, e - b + 1);
        auto a = parse_action(token);
        if (!a) throw ParseError(ErrorCode::SyntaxError, number, static_cast<int>(b) + 1, "unknown action '" + token + "'");
        out.push_back(*a);
    }
    return out;
}

std::string format_actions(std::span<const Action> actions) {
    std::string out;
    for (Action a : actions) {
        out += to_string(a);
        out += '\n';
    }
    return out;
}

} // namespace critmech
