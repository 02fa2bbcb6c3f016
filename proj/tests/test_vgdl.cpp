#include "critmech/error.hpp"
#include "critmech/harness.hpp"
#include "critmech/json_io.hpp"
#include "critmech/vgdl.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace critmech;

namespace {

const char* kMinimal = R"(BasicGame
  SpriteSet
    wall > Immovable
    avatar > MovingAvatar
  InteractionSet
    avatar wall > stepBack
  TerminationSet
    Timeout limit=10 win=True
  LevelMapping
    . >
    w > wall
    A > avatar
)";

std::string fixture_text(const std::string& game) {
    return read_file(data_root() + "/games/" + game + "/" + game + ".vgd");
}

const std::vector<std::string> kGames{"zelda", "solarfox", "plants", "realportals"};

bool has_code(const std::vector<Diagnostic>& diags, const std::string& code) {
    return std::any_of(diags.begin(), diags.end(), [&](const Diagnostic& d) { return d.code == code; });
}

ErrorCode parse_error_code(const std::string& text) {
    try {
        parse_game(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected a parse failure";
    return ErrorCode::Io;
}

} // namespace

TEST(ParseGame, MinimalDescription) {
    const auto desc = parse_game(kMinimal);
    ASSERT_EQ(desc.sprites.size(), 2u);
    ASSERT_EQ(desc.interactions.size(), 1u);
    ASSERT_EQ(desc.terminations.size(), 1u);
    EXPECT_EQ(desc.interactions[0].first, "avatar");
    EXPECT_EQ(desc.interactions[0].second, "wall");
    EXPECT_EQ(desc.interactions[0].effect, Effect::StepBack);
    EXPECT_EQ(desc.terminations[0].kind, TerminationKind::Timeout);
    EXPECT_EQ(desc.terminations[0].limit, 10);
    EXPECT_TRUE(desc.terminations[0].win);
    EXPECT_TRUE(validate(desc).empty());
}

TEST(ParseGame, ZeldaHierarchy) {
    const auto desc = parse_game(fixture_text("zelda"));
    EXPECT_EQ(desc.sprite("nokey").parent, "avatar");
    EXPECT_EQ(desc.sprite("withkey").parent, "avatar");
    EXPECT_EQ(desc.sprite("bat").parent, "enemy");
    EXPECT_EQ(desc.sprite("spider").parent, "enemy");
    EXPECT_EQ(desc.sprite("enemy").cls, SpriteClass::Abstract);
    EXPECT_TRUE(desc.is_a("withkey", "avatar"));
    EXPECT_FALSE(desc.is_a("bat", "avatar"));
    EXPECT_EQ(desc.avatar_root(), "avatar");
}

TEST(ParseGame, ChildInheritsParentClassAndParams) {
    const auto desc = parse_game(fixture_text("zelda"));
    EXPECT_EQ(desc.sprite("nokey").cls, SpriteClass::ShootAvatar);
    EXPECT_EQ(desc.sprite("nokey").params.stype, "sword");
}

TEST(ParseGame, UndeclaredSpriteIsNamed) {
    std::string text = kMinimal;
    text.replace(text.find("avatar wall > stepBack"), 22, "avatar ghost > stepBack");
    try {
        parse_game(text);
        FAIL() << "expected UNDECLARED_SPRITE";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::UndeclaredSprite);
        EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
        EXPECT_EQ(e.line(), 6);
    }
}

TEST(ParseGame, KeywordAndSyntaxErrors) {
    std::string unknownClass = kMinimal;
    unknownClass.replace(unknownClass.find("Immovable"), 9, "Floating");
    EXPECT_EQ(parse_error_code(unknownClass), ErrorCode::UnknownKeyword);

    std::string unknownEffect = kMinimal;
    unknownEffect.replace(unknownEffect.find("stepBack"), 8, "explode");
    EXPECT_EQ(parse_error_code(unknownEffect), ErrorCode::UnknownKeyword);

    std::string unknownTermination = kMinimal;
    unknownTermination.replace(unknownTermination.find("Timeout"), 7, "Stopwatch");
    EXPECT_EQ(parse_error_code(unknownTermination), ErrorCode::UnknownKeyword);

    std::string duplicate = kMinimal;
    duplicate.insert(duplicate.find("    avatar > MovingAvatar"), "    wall > Immovable\n");
    EXPECT_EQ(parse_error_code(duplicate), ErrorCode::DuplicateSprite);

    std::string noArrow = kMinimal;
    noArrow.replace(noArrow.find("avatar wall > stepBack"), 22, "avatar wall stepBack");
    EXPECT_EQ(parse_error_code(noArrow), ErrorCode::SyntaxError);

    EXPECT_EQ(parse_error_code(""), ErrorCode::SyntaxError);
}

TEST(ParseLevel, SmallGrid) {
    const auto desc = parse_game(kMinimal);
    const auto grid = parse_level("...\n.A.\n...\n", desc);
    EXPECT_EQ(grid.width, 3);
    EXPECT_EQ(grid.height, 3);
    int avatars = 0;
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            for (const auto& n : grid.at(x, y)) avatars += n == "avatar";
    EXPECT_EQ(avatars, 1);
    EXPECT_EQ(grid.at(1, 1), std::vector<std::string>{"avatar"});
    EXPECT_TRUE(grid.at(0, 0).empty());
}

TEST(ParseLevel, ZeldaLevelZeroHasKeyAndGoal) {
    const auto f = load_fixture("zelda");
    const auto& grid = f.level("lvl0").grid;
    int keys = 0, goals = 0;
    for (const auto& cell : grid.cells)
        for (const auto& n : cell) {
            keys += n == "key";
            goals += n == "goal";
        }
    EXPECT_GE(keys, 1);
    EXPECT_GE(goals, 1);
}

TEST(ParseLevel, Errors) {
    const auto desc = parse_game(kMinimal);
    auto code = [&](const std::string& text) {
        try {
            parse_level(text, desc);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    EXPECT_EQ(code("A.A\n...\n"), ErrorCode::AvatarCount);
    EXPECT_EQ(code("...\n...\n"), ErrorCode::AvatarCount);
    EXPECT_EQ(code("A.?\n...\n"), ErrorCode::UnmappedCharacter);
    EXPECT_EQ(code("A..\n..\n"), ErrorCode::RaggedLevel);
}

TEST(Validate, BundledFixturesAreClean) {
    for (const auto& g : kGames) {
        const auto diags = validate(parse_game(fixture_text(g)));
        EXPECT_TRUE(diags.empty()) << g << ": " << (diags.empty() ? "" : diags.front().message);
    }
}

TEST(Validate, MissingWinCondition) {
    std::string text = kMinimal;
    text.replace(text.find("win=True"), 8, "win=False");
    EXPECT_TRUE(has_code(validate(parse_game(text)), "NO_WIN_CONDITION"));
}

TEST(Validate, FlickerNeedsLimit) {
    auto desc = parse_game(kMinimal);
    SpriteDef flash;
    flash.name = "flash";
    flash.cls = SpriteClass::Flicker;
    desc.sprites.push_back(flash);
    EXPECT_TRUE(has_code(validate(desc), "MISSING_PARAM"));
}

TEST(Validate, CyclicParent) {
    auto desc = parse_game(kMinimal);
    SpriteDef a, b;
    a.name = "a";
    a.parent = "b";
    a.cls = SpriteClass::Immovable;
    b.name = "b";
    b.parent = "a";
    b.cls = SpriteClass::Immovable;
    desc.sprites.push_back(a);
    desc.sprites.push_back(b);
    EXPECT_TRUE(has_code(validate(desc), "CYCLIC_PARENT"));
}

TEST(RoundTrip, BundledFixtures) {
    for (const auto& g : kGames) {
        const auto desc = parse_game(fixture_text(g));
        const auto text = to_text(desc);
        EXPECT_EQ(parse_game(text), desc) << g;
        EXPECT_EQ(to_text(parse_game(text)), text) << g;
    }
}

TEST(RoundTrip, PreservesRuleOrder) {
    const auto desc = parse_game(fixture_text("realportals"));
    const auto again = parse_game(to_text(desc));
    ASSERT_EQ(again.interactions.size(), desc.interactions.size());
    for (size_t i = 0; i < desc.interactions.size(); ++i) EXPECT_EQ(again.interactions[i], desc.interactions[i]);
    ASSERT_EQ(again.terminations.size(), desc.terminations.size());
    for (size_t i = 0; i < desc.terminations.size(); ++i) EXPECT_EQ(again.terminations[i], desc.terminations[i]);
}

// Random well-formed descriptions survive text round trips.
TEST(RoundTrip, RandomDescriptions) {
    std::mt19937_64 rng(11);
    const std::vector<std::string> effects{"killSprite", "killBoth", "stepBack", "bounceForward"};
    for (int trial = 0; trial < 100; ++trial) {
        const int kinds = 2 + static_cast<int>(rng() % 5);
        std::string text = "BasicGame name=random\n  SpriteSet\n    avatar > MovingAvatar\n";
        for (int k = 0; k < kinds; ++k) {
            text += "    s" + std::to_string(k) + " > ";
            switch (rng() % 3) {
            case 0: text += "Immovable\n"; break;
            case 1: text += "RandomNPC speedPeriod=" + std::to_string(1 + rng() % 3) + "\n"; break;
            default: text += "Missile orientation=LEFT\n"; break;
            }
        }
        text += "  InteractionSet\n";
        const int rules = 1 + static_cast<int>(rng() % 6);
        std::set<std::string> pairs;
        for (int r = 0; r < rules; ++r) {
            const std::string a = rng() % 2 ? "avatar" : "s" + std::to_string(rng() % kinds);
            const std::string b = "s" + std::to_string(rng() % kinds);
            if (!pairs.insert(a + " " + b).second) continue;
            text += "    " + a + " " + b + " > " + effects[rng() % effects.size()];
            if (rng() % 2) text += " scoreChange=" + std::to_string(static_cast<int>(rng() % 5) - 2);
            text += "\n";
        }
        text += "  TerminationSet\n    SpriteCounter stype=s0 limit=0 win=True\n    Timeout limit=" +
                std::to_string(rng() % 500) + " win=False\n";
        text += "  LevelMapping\n    A > avatar\n    x > s0\n";
        const auto desc = parse_game(text);
        EXPECT_EQ(parse_game(to_text(desc)), desc) << text;
        EXPECT_EQ(parse_game(text), desc);
    }
}
