#include "critmech/vgdl.hpp"

#include "critmech/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <set>
#include <span>
#include <sstream>
#include <utility>

namespace critmech {

namespace {

constexpr std::array<std::pair<std::string_view, SpriteClass>, 12> kClasses{{
    {"Immovable", SpriteClass::Immovable},
    {"Passive", SpriteClass::Passive},
    {"Missile", SpriteClass::Missile},
    {"RandomNPC", SpriteClass::RandomNPC},
    {"Bomber", SpriteClass::Bomber},
    {"SpawnPoint", SpriteClass::SpawnPoint},
    {"Flicker", SpriteClass::Flicker},
    {"Portal", SpriteClass::Portal},
    {"MovingAvatar", SpriteClass::MovingAvatar},
    {"ShootAvatar", SpriteClass::ShootAvatar},
    {"OngoingAvatar", SpriteClass::OngoingAvatar},
    {"Abstract", SpriteClass::Abstract},
}};

constexpr std::array<std::pair<std::string_view, Effect>, 6> kEffects{{
    {"killSprite", Effect::KillSprite},
    {"killBoth", Effect::KillBoth},
    {"transformTo", Effect::TransformTo},
    {"stepBack", Effect::StepBack},
    {"teleportToExit", Effect::TeleportToExit},
    {"bounceForward", Effect::BounceForward},
}};

constexpr std::array<std::pair<std::string_view, TerminationKind>, 4> kTerminations{{
    {"SpriteCounter", TerminationKind::SpriteCounter},
    {"SpriteCounterMore", TerminationKind::SpriteCounterMore},
    {"MultiSpriteCounter", TerminationKind::MultiSpriteCounter},
    {"Timeout", TerminationKind::Timeout},
}};

template <typename T, size_t N>
std::optional<T> lookup(const std::array<std::pair<std::string_view, T>, N>& table, std::string_view key) {
    for (const auto& [name, value] : table)
        if (name == key) return value;
    return std::nullopt;
}

template <typename T, size_t N>
std::string_view reverse_lookup(const std::array<std::pair<std::string_view, T>, N>& table, T value) {
    for (const auto& [name, v] : table)
        if (v == value) return name;
    return "?";
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(s.front())) return false;
    return std::all_of(s.begin(), s.end(), [&](char c) { return alpha(c) || digit(c); });
}

struct Token {
    std::string_view text;
    int column; // 1-based
};

struct Line {
    int number;
    int indent;
    std::vector<Token> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
    std::vector<Line> lines;
    int number = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        ++number;
        pos = end + 1;
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);

        Line line{number, 0, {}};
        size_t i = 0;
        while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t')) {
            if (raw[i] == '\t')
                throw ParseError(ErrorCode::SyntaxError, number, static_cast<int>(i) + 1,
                                 "tab characters are not allowed in indentation");
            ++i;
        }
        line.indent = static_cast<int>(i);
        while (i < raw.size()) {
            if (raw[i] == ' ' || raw[i] == '\t') {
                ++i;
                continue;
            }
            size_t start = i;
            while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t') ++i;
            line.tokens.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
        }
        if (!line.tokens.empty()) lines.push_back(std::move(line));
        if (end == text.size()) break;
    }
    return lines;
}

struct KeyValue {
    std::string_view key;
    std::string_view value;
    Token token;
};

KeyValue split_param(const Line& line, const Token& tok) {
    auto eq = tok.text.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.text.size())
        throw ParseError(ErrorCode::SyntaxError, line.number, tok.column,
                         "expected key=value, got '" + std::string(tok.text) + "'");
    return {tok.text.substr(0, eq), tok.text.substr(eq + 1), tok};
}

int parse_int(const Line& line, const KeyValue& kv) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), value);
    if (ec != std::errc{} || ptr != kv.value.data() + kv.value.size())
        throw ParseError(ErrorCode::SyntaxError, line.number, kv.token.column,
                         "expected integer for '" + std::string(kv.key) + "'");
    return value;
}

double parse_double(const Line& line, const KeyValue& kv) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), value);
    if (ec != std::errc{} || ptr != kv.value.data() + kv.value.size())
        throw ParseError(ErrorCode::SyntaxError, line.number, kv.token.column,
                         "expected number for '" + std::string(kv.key) + "'");
    return value;
}

bool parse_bool(const Line& line, const KeyValue& kv) {
    if (kv.value == "True" || kv.value == "true") return true;
    if (kv.value == "False" || kv.value == "false") return false;
    throw ParseError(ErrorCode::SyntaxError, line.number, kv.token.column,
                     "expected True or False for '" + std::string(kv.key) + "'");
}

std::string parse_name(const Line& line, const Token& tok) {
    if (!is_identifier(tok.text))
        throw ParseError(ErrorCode::SyntaxError, line.number, tok.column,
                         "invalid identifier '" + std::string(tok.text) + "'");
    return std::string(tok.text);
}

size_t find_arrow(const Line& line) {
    for (size_t i = 0; i < line.tokens.size(); ++i)
        if (line.tokens[i].text == ">") return i;
    throw ParseError(ErrorCode::SyntaxError, line.number, line.tokens.front().column, "expected '>'");
}

// Where a sprite name was referenced, for error reporting after the whole file is read.
struct Reference {
    std::string name;
    int line;
    int column;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lines_(tokenize(text)) {}

    GameDescription run() {
        if (lines_.empty()) throw ParseError(ErrorCode::SyntaxError, 1, 1, "empty game description");
        const Line& header = lines_.front();
        if (header.tokens.front().text != "BasicGame")
            throw ParseError(ErrorCode::UnknownKeyword, header.number, header.tokens.front().column,
                             "expected 'BasicGame'");
        for (size_t i = 1; i < header.tokens.size(); ++i) {
            auto kv = split_param(header, header.tokens[i]);
            if (kv.key != "name")
                throw ParseError(ErrorCode::UnknownKeyword, header.number, kv.token.column,
                                 "unknown game parameter '" + std::string(kv.key) + "'");
            desc_.name = std::string(kv.value);
        }

        std::optional<int> blockIndent;
        std::string_view block;
        size_t i = 1;
        while (i < lines_.size()) {
            const Line& line = lines_[i];
            if (!blockIndent) {
                if (line.indent == 0)
                    throw ParseError(ErrorCode::SyntaxError, line.number, 1, "block header must be indented");
                blockIndent = line.indent;
            }
            if (line.indent != *blockIndent)
                throw ParseError(ErrorCode::SyntaxError, line.number, line.indent + 1,
                                 "expected a block header at this indentation");
            if (line.tokens.size() != 1)
                throw ParseError(ErrorCode::SyntaxError, line.number, line.tokens[1].column,
                                 "unexpected tokens after block header");
            block = line.tokens.front().text;
            size_t begin = ++i;
            while (i < lines_.size() && lines_[i].indent > *blockIndent) ++i;
            std::span<const Line> body(lines_.data() + begin, i - begin);
            if (block == "SpriteSet") sprite_block(body);
            else if (block == "InteractionSet") interaction_block(body);
            else if (block == "TerminationSet") termination_block(body);
            else if (block == "LevelMapping") mapping_block(body);
            else
                throw ParseError(ErrorCode::UnknownKeyword, line.number, line.tokens.front().column,
                                 "unknown block '" + std::string(block) + "'");
        }
        resolve_references();
        return std::move(desc_);
    }

private:
    void sprite_block(std::span<const Line> body) {
        // (indent, sprite index) of the open ancestors.
        std::vector<std::pair<int, size_t>> stack;
        for (const Line& line : body) {
            while (!stack.empty() && stack.back().first >= line.indent) stack.pop_back();
            size_t arrow = find_arrow(line);
            if (arrow != 1)
                throw ParseError(ErrorCode::SyntaxError, line.number, line.tokens.front().column,
                                 "expected 'name > Class params'");
            SpriteDef def;
            def.name = parse_name(line, line.tokens[0]);
            if (desc_.find_sprite(def.name))
                throw ParseError(ErrorCode::DuplicateSprite, line.number, line.tokens[0].column,
                                 "duplicate sprite '" + def.name + "'");
            const SpriteDef* parent = nullptr;
            if (!stack.empty()) {
                parent = &desc_.sprites[stack.back().second];
                def.parent = parent->name;
                def.cls = parent->cls;
                def.params = parent->params;
            }
            size_t next = arrow + 1;
            if (next < line.tokens.size() && line.tokens[next].text.find('=') == std::string_view::npos) {
                auto cls = parse_sprite_class(line.tokens[next].text);
                if (!cls)
                    throw ParseError(ErrorCode::UnknownKeyword, line.number, line.tokens[next].column,
                                     "unknown sprite class '" + std::string(line.tokens[next].text) + "'");
                def.cls = *cls;
                ++next;
            } else if (!parent) {
                throw ParseError(ErrorCode::SyntaxError, line.number, line.tokens.front().column,
                                 "top-level sprite '" + def.name + "' needs a class");
            }
            for (; next < line.tokens.size(); ++next) {
                auto kv = split_param(line, line.tokens[next]);
                if (kv.key == "orientation") {
                    auto d = parse_direction(kv.value);
                    if (!d)
                        throw ParseError(ErrorCode::SyntaxError, line.number, kv.token.column,
                                         "orientation must be UP, DOWN, LEFT or RIGHT");
                    def.params.orientation = *d;
                } else if (kv.key == "speedPeriod") {
                    def.params.speedPeriod = parse_int(line, kv);
                } else if (kv.key == "stype") {
                    def.params.stype = std::string(kv.value);
                    refs_.push_back({std::string(kv.value), line.number, kv.token.column});
                } else if (kv.key == "prob") {
                    def.params.prob = parse_double(line, kv);
                } else if (kv.key == "limit") {
                    def.params.limit = parse_int(line, kv);
                } else if (kv.key == "exitName") {
                    def.params.exitName = std::string(kv.value);
                    refs_.push_back({std::string(kv.value), line.number, kv.token.column});
                } else {
                    throw ParseError(ErrorCode::UnknownKeyword, line.number, kv.token.column,
                                     "unknown sprite parameter '" + std::string(kv.key) + "'");
                }
            }
            desc_.sprites.push_back(std::move(def));
            stack.emplace_back(line.indent, desc_.sprites.size() - 1);
        }
    }

    void interaction_block(std::span<const Line> body) {
        for (const Line& line : body) {
            size_t arrow = find_arrow(line);
            if (arrow != 2 || arrow + 1 >= line.tokens.size())
                throw ParseError(ErrorCode::SyntaxError, line.number, line.tokens.front().column,
                                 "expected 'first second > effect params'");
            InteractionRule rule;
            rule.first = parse_name(line, line.tokens[0]);
            rule.second = parse_name(line, line.tokens[1]);
            refs_.push_back({rule.first, line.number, line.tokens[0].column});
            refs_.push_back({rule.second, line.number, line.tokens[1].column});
            const Token& effectTok = line.tokens[arrow + 1];
            auto effect = parse_effect(effectTok.text);
            if (!effect)
                throw ParseError(ErrorCode::UnknownKeyword, line.number, effectTok.column,
                                 "unknown effect '" + std::string(effectTok.text) + "'");
            rule.effect = *effect;
            for (size_t k = arrow + 2; k < line.tokens.size(); ++k) {
                auto kv = split_param(line, line.tokens[k]);
                if (kv.key == "stype") {
                    rule.stype = std::string(kv.value);
                    refs_.push_back({*rule.stype, line.number, kv.token.column});
                } else if (kv.key == "killSecond") {
                    rule.killSecond = parse_bool(line, kv);
                } else if (kv.key == "scoreChange") {
                    rule.scoreChange = parse_int(line, kv);
                } else {
                    throw ParseError(ErrorCode::UnknownKeyword, line.number, kv.token.column,
                                     "unknown effect parameter '" + std::string(kv.key) + "'");
                }
            }
            desc_.interactions.push_back(std::move(rule));
        }
    }

    void termination_block(std::span<const Line> body) {
        for (const Line& line : body) {
            const Token& kindTok = line.tokens.front();
            auto kind = parse_termination_kind(kindTok.text);
            if (!kind)
                throw ParseError(ErrorCode::UnknownKeyword, line.number, kindTok.column,
                                 "unknown termination '" + std::string(kindTok.text) + "'");
            TerminationRule rule;
            rule.kind = *kind;
            std::map<int, std::string> numbered;
            for (size_t k = 1; k < line.tokens.size(); ++k) {
                auto kv = split_param(line, line.tokens[k]);
                if (kv.key == "limit") {
                    rule.limit = parse_int(line, kv);
                } else if (kv.key == "win") {
                    rule.win = parse_bool(line, kv);
                } else if (kv.key == "stype" && *kind != TerminationKind::MultiSpriteCounter &&
                           *kind != TerminationKind::Timeout) {
                    rule.stypes = {std::string(kv.value)};
                    refs_.push_back({rule.stypes.back(), line.number, kv.token.column});
                } else if (kv.key.starts_with("stype") && *kind == TerminationKind::MultiSpriteCounter) {
                    int index = 0;
                    auto digits = kv.key.substr(5);
                    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
                    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size() || index < 1)
                        throw ParseError(ErrorCode::UnknownKeyword, line.number, kv.token.column,
                                         "expected stype1, stype2, ...");
                    numbered[index] = std::string(kv.value);
                    refs_.push_back({std::string(kv.value), line.number, kv.token.column});
                } else {
                    throw ParseError(ErrorCode::UnknownKeyword, line.number, kv.token.column,
                                     "unknown termination parameter '" + std::string(kv.key) + "'");
                }
            }
            for (auto& [index, name] : numbered) rule.stypes.push_back(std::move(name));
            desc_.terminations.push_back(std::move(rule));
        }
    }

    void mapping_block(std::span<const Line> body) {
        for (const Line& line : body) {
            const Token& key = line.tokens.front();
            if (key.text.size() != 1 || line.tokens.size() < 2 || line.tokens[1].text != ">")
                throw ParseError(ErrorCode::SyntaxError, line.number, key.column,
                                 "expected 'c > sprite ...' with a single character key");
            char c = key.text.front();
            if (desc_.levelMapping.count(c))
                throw ParseError(ErrorCode::SyntaxError, line.number, key.column,
                                 std::string("duplicate mapping for '") + c + "'");
            std::vector<std::string> names;
            for (size_t k = 2; k < line.tokens.size(); ++k) {
                names.push_back(parse_name(line, line.tokens[k]));
                refs_.push_back({names.back(), line.number, line.tokens[k].column});
            }
            desc_.levelMapping.emplace(c, std::move(names));
        }
    }

    void resolve_references() {
        for (const Reference& ref : refs_)
            if (!desc_.find_sprite(ref.name))
                throw ParseError(ErrorCode::UndeclaredSprite, ref.line, ref.column,
                                 "undeclared sprite '" + ref.name + "'");
        for (const Diagnostic& d : validate(desc_))
            if (d.severity == Severity::Error) throw Error(ErrorCode::InvalidDescription, d.code + ": " + d.message);
    }

    std::vector<Line> lines_;
    GameDescription desc_;
    std::vector<Reference> refs_;
};

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

} // namespace

std::optional<GridPos> parse_direction(std::string_view token) {
    if (token == "UP") return dir::up;
    if (token == "DOWN") return dir::down;
    if (token == "LEFT") return dir::left;
    if (token == "RIGHT") return dir::right;
    return std::nullopt;
}

std::string_view direction_name(GridPos d) {
    if (d == dir::up) return "UP";
    if (d == dir::down) return "DOWN";
    if (d == dir::left) return "LEFT";
    if (d == dir::right) return "RIGHT";
    return "NONE";
}

std::string_view to_string(SpriteClass cls) { return reverse_lookup(kClasses, cls); }
std::optional<SpriteClass> parse_sprite_class(std::string_view token) { return lookup(kClasses, token); }
std::string_view to_string(Effect effect) { return reverse_lookup(kEffects, effect); }
std::optional<Effect> parse_effect(std::string_view token) { return lookup(kEffects, token); }
std::string_view to_string(TerminationKind kind) { return reverse_lookup(kTerminations, kind); }
std::optional<TerminationKind> parse_termination_kind(std::string_view token) {
    return lookup(kTerminations, token);
}

const SpriteDef* GameDescription::find_sprite(std::string_view name) const {
    for (const auto& s : sprites)
        if (s.name == name) return &s;
    return nullptr;
}

const SpriteDef& GameDescription::sprite(std::string_view name) const {
    if (const SpriteDef* s = find_sprite(name)) return *s;
    throw Error(ErrorCode::UndeclaredSprite, "undeclared sprite '" + std::string(name) + "'");
}

bool GameDescription::is_a(std::string_view name, std::string_view ancestor) const {
    const SpriteDef* s = find_sprite(name);
    for (size_t guard = 0; s && guard <= sprites.size(); ++guard) {
        if (s->name == ancestor) return true;
        if (!s->parent) return false;
        s = find_sprite(*s->parent);
    }
    return false;
}

std::optional<std::string> GameDescription::avatar_root() const {
    std::optional<std::string> root;
    for (const auto& s : sprites) {
        if (!is_avatar_class(s.cls)) continue;
        const SpriteDef* parent = s.parent ? find_sprite(*s.parent) : nullptr;
        if (parent && is_avatar_class(parent->cls)) continue;
        if (root) return std::nullopt;
        root = s.name;
    }
    return root;
}

std::vector<std::string> GameDescription::avatar_hierarchy() const {
    std::vector<std::string> out;
    auto root = avatar_root();
    if (!root) return out;
    for (const auto& s : sprites)
        if (s.cls != SpriteClass::Abstract && is_a(s.name, *root)) out.push_back(s.name);
    return out;
}

bool GameDescription::in_avatar_hierarchy(std::string_view name) const {
    auto root = avatar_root();
    return root && is_a(name, *root);
}

std::vector<std::string> GameDescription::shooters() const {
    std::vector<std::string> out;
    for (const auto& name : avatar_hierarchy()) {
        const SpriteDef& s = sprite(name);
        if (s.cls == SpriteClass::ShootAvatar && children_of(name).empty()) out.push_back(name);
    }
    return out;
}

std::vector<std::string> GameDescription::children_of(std::string_view name) const {
    std::vector<std::string> out;
    for (const auto& s : sprites)
        if (s.parent && *s.parent == name) out.push_back(s.name);
    return out;
}

GameDescription parse_game(std::string_view text) { return Parser(text).run(); }

LevelGrid parse_level(std::string_view text, const GameDescription& desc) {
    std::vector<std::string_view> rows;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view row = text.substr(pos, end - pos);
        if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
        rows.push_back(row);
        pos = end + 1;
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ParseError(ErrorCode::RaggedLevel, 1, 1, "empty level");

    LevelGrid grid;
    grid.height = static_cast<int>(rows.size());
    grid.width = static_cast<int>(rows.front().size());
    if (grid.width == 0) throw ParseError(ErrorCode::RaggedLevel, 1, 1, "empty first row");
    auto root = desc.avatar_root();
    int avatars = 0;
    for (int y = 0; y < grid.height; ++y) {
        const auto& row = rows[static_cast<size_t>(y)];
        if (static_cast<int>(row.size()) != grid.width)
            throw ParseError(ErrorCode::RaggedLevel, y + 1, static_cast<int>(row.size()) + 1,
                             "row length " + std::to_string(row.size()) + " differs from " +
                                 std::to_string(grid.width));
        for (int x = 0; x < grid.width; ++x) {
            auto it = desc.levelMapping.find(row[static_cast<size_t>(x)]);
            if (it == desc.levelMapping.end())
                throw ParseError(ErrorCode::UnmappedCharacter, y + 1, x + 1,
                                 std::string("unmapped character '") + row[static_cast<size_t>(x)] + "'");
            for (const auto& name : it->second)
                if (root && desc.is_a(name, *root)) ++avatars;
            grid.cells.push_back(it->second);
        }
    }
    if (avatars != 1)
        throw Error(ErrorCode::AvatarCount, "level must contain exactly one avatar, found " + std::to_string(avatars));
    return grid;
}

std::vector<Diagnostic> validate(const GameDescription& desc) {
    std::vector<Diagnostic> out;
    auto error = [&](std::string code, std::string message) {
        out.push_back({std::move(code), Severity::Error, std::move(message)});
    };
    auto declared = [&](const std::string& name, const std::string& where) {
        if (desc.find_sprite(name)) return true;
        error("UNDECLARED_SPRITE", where + " references undeclared sprite '" + name + "'");
        return false;
    };
    auto concrete = [&](const std::string& name, const std::string& where) {
        if (!declared(name, where)) return false;
        if (desc.sprite(name).cls == SpriteClass::Abstract) {
            error("ABSTRACT_REFERENCE", where + " references Abstract sprite '" + name + "'");
            return false;
        }
        return true;
    };

    std::set<std::string> seen;
    for (const auto& s : desc.sprites)
        if (!seen.insert(s.name).second) error("DUPLICATE_SPRITE", "sprite '" + s.name + "' declared twice");

    for (const auto& s : desc.sprites) {
        const std::string where = "sprite '" + s.name + "'";
        if (s.parent) {
            if (declared(*s.parent, where + " parent")) {
                // Walk up; more steps than sprites means a cycle.
                const SpriteDef* p = &s;
                size_t steps = 0;
                while (p && p->parent && steps <= desc.sprites.size()) {
                    p = desc.find_sprite(*p->parent);
                    ++steps;
                }
                if (steps > desc.sprites.size()) error("CYCLIC_PARENT", where + " has a cyclic parent chain");
            }
        }
        const auto& p = s.params;
        auto need = [&](bool present, const char* param) {
            if (!present)
                error("MISSING_PARAM", where + " of class " + std::string(to_string(s.cls)) + " requires '" + param + "'");
        };
        switch (s.cls) {
        case SpriteClass::Missile: need(p.orientation.has_value(), "orientation"); break;
        case SpriteClass::Bomber:
            need(p.orientation.has_value(), "orientation");
            need(p.stype.has_value(), "stype");
            break;
        case SpriteClass::SpawnPoint: need(p.stype.has_value(), "stype"); break;
        case SpriteClass::ShootAvatar: need(p.stype.has_value(), "stype"); break;
        case SpriteClass::Flicker: need(p.limit.has_value(), "limit"); break;
        case SpriteClass::Portal: need(p.exitName.has_value(), "exitName"); break;
        default: break;
        }
        if (p.speedPeriod && *p.speedPeriod < 1) error("BAD_PARAM", where + " speedPeriod must be >= 1");
        if (p.prob && (*p.prob < 0.0 || *p.prob > 1.0)) error("BAD_PARAM", where + " prob must lie in [0,1]");
        if (p.limit && *p.limit < 0) error("BAD_PARAM", where + " limit must be non-negative");
        if (p.orientation && std::abs(p.orientation->x) + std::abs(p.orientation->y) != 1)
            error("BAD_PARAM", where + " orientation must be a unit direction");
        if (p.stype) concrete(*p.stype, where + " stype");
        if (p.exitName) concrete(*p.exitName, where + " exitName");
    }
    if (!out.empty()) return out; // hierarchy queries below assume a sane sprite table

    int roots = 0;
    for (const auto& s : desc.sprites) {
        if (!is_avatar_class(s.cls)) continue;
        const SpriteDef* parent = s.parent ? desc.find_sprite(*s.parent) : nullptr;
        if (!parent || !is_avatar_class(parent->cls)) ++roots;
    }
    if (roots != 1) error("AVATAR_HIERARCHY", "expected exactly one avatar hierarchy, found " + std::to_string(roots));
    if (auto root = desc.avatar_root()) {
        for (const auto& s : desc.sprites)
            if (desc.is_a(s.name, *root) && !is_avatar_class(s.cls))
                error("AVATAR_HIERARCHY", "sprite '" + s.name + "' inside the avatar hierarchy is not an avatar class");
    }

    for (size_t i = 0; i < desc.interactions.size(); ++i) {
        const auto& r = desc.interactions[i];
        const std::string where = "interaction #" + std::to_string(i + 1);
        concrete(r.first, where);
        bool secondOk = concrete(r.second, where);
        if (r.effect == Effect::TransformTo) {
            if (!r.stype) error("MISSING_PARAM", where + " transformTo requires 'stype'");
            else concrete(*r.stype, where + " transformTo");
        } else {
            if (r.stype) error("BAD_PARAM", where + " only transformTo takes 'stype'");
            if (r.killSecond) error("BAD_PARAM", where + " only transformTo takes 'killSecond'");
        }
        if (r.effect == Effect::TeleportToExit && secondOk && desc.sprite(r.second).cls != SpriteClass::Portal)
            error("BAD_EFFECT_TARGET", where + " teleportToExit needs a Portal as second sprite");
        for (size_t j = 0; j < i; ++j)
            if (desc.interactions[j] == r) error("DUPLICATE_RULE", where + " repeats interaction #" + std::to_string(j + 1));
    }

    bool hasWin = false;
    for (size_t i = 0; i < desc.terminations.size(); ++i) {
        const auto& t = desc.terminations[i];
        const std::string where = "termination #" + std::to_string(i + 1);
        hasWin = hasWin || t.win;
        if (t.limit < 0) error("BAD_PARAM", where + " limit must be non-negative");
        switch (t.kind) {
        case TerminationKind::SpriteCounter:
        case TerminationKind::SpriteCounterMore:
            if (t.stypes.size() != 1) error("TERMINATION_ARITY", where + " needs exactly one stype");
            break;
        case TerminationKind::MultiSpriteCounter:
            if (t.stypes.size() < 2) error("TERMINATION_ARITY", where + " needs at least two stypes");
            break;
        case TerminationKind::Timeout:
            if (!t.stypes.empty()) error("TERMINATION_ARITY", where + " takes no stypes");
            break;
        }
        for (const auto& s : t.stypes) declared(s, where);
    }
    for (const auto& [c, names] : desc.levelMapping)
        for (const auto& n : names) concrete(n, std::string("level mapping '") + c + "'");

    if (!hasWin) out.push_back({"NO_WIN_CONDITION", Severity::Warning, "no termination rule has win=True"});
    return out;
}

std::string to_text(const GameDescription& desc) {
    std::ostringstream os;
    os << "BasicGame";
    if (!desc.name.empty()) os << " name=" << desc.name;
    os << "\n  SpriteSet\n";

    auto write_sprite = [&](const SpriteDef& s, int depth, auto& self) -> void {
        os << std::string(static_cast<size_t>(4 + 2 * depth), ' ') << s.name << " > " << to_string(s.cls);
        const auto& p = s.params;
        if (p.orientation) os << " orientation=" << direction_name(*p.orientation);
        if (p.speedPeriod) os << " speedPeriod=" << *p.speedPeriod;
        if (p.stype) os << " stype=" << *p.stype;
        if (p.prob) os << " prob=" << format_double(*p.prob);
        if (p.limit) os << " limit=" << *p.limit;
        if (p.exitName) os << " exitName=" << *p.exitName;
        os << '\n';
        for (const auto& c : desc.sprites)
            if (c.parent && *c.parent == s.name) self(c, depth + 1, self);
    };
    for (const auto& s : desc.sprites)
        if (!s.parent) write_sprite(s, 0, write_sprite);

    os << "  InteractionSet\n";
    for (const auto& r : desc.interactions) {
        os << "    " << r.first << ' ' << r.second << " > " << to_string(r.effect);
        if (r.stype) os << " stype=" << *r.stype;
        if (r.killSecond) os << " killSecond=True";
        if (r.scoreChange != 0) os << " scoreChange=" << r.scoreChange;
        os << '\n';
    }
    os << "  TerminationSet\n";
    for (const auto& t : desc.terminations) {
        os << "    " << to_string(t.kind);
        if (t.kind == TerminationKind::MultiSpriteCounter) {
            for (size_t i = 0; i < t.stypes.size(); ++i) os << " stype" << (i + 1) << '=' << t.stypes[i];
        } else if (!t.stypes.empty()) {
            os << " stype=" << t.stypes.front();
        }
        os << " limit=" << t.limit << " win=" << (t.win ? "True" : "False") << '\n';
    }
    os << "  LevelMapping\n";
    for (const auto& [c, names] : desc.levelMapping) {
        os << "    " << c << " >";
        for (const auto& n : names) os << ' ' << n;
        os << '\n';
    }
    return os.str();
}

} // namespace critmech
