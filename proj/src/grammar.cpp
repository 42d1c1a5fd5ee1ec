#include "facegen/grammar.hpp"

#include "facegen/common.hpp"
#include "facegen/rng.hpp"

#include <sstream>
#include <unordered_map>

namespace facegen {

namespace {

const std::vector<std::string> kStructureWords = {
    "a", "the", "with", "and", "hair", "skin", "eyes", "expression",
    "background", "backdrop", "face", "tags", "on", "look", "wearing",
};

const std::vector<std::string> kStyleAdjectives = {
    "bright", "calm",   "bold",   "quiet",  "soft",   "warm",   "cool",   "plain",
    "vivid",  "mellow", "crisp",  "gentle", "happy",  "tired",  "young",  "old",
    "small",  "wide",   "tiny",   "grand",  "fine",   "fair",   "dull",   "keen",
    "neat",   "wild",   "tame",   "shy",    "proud",  "eager",  "noble",  "swift",
    "slow",   "loud",   "faint",  "clear",  "deep",   "pale",   "sleek",  "round",
    "stern",  "merry",  "moody",  "jolly",  "sunny",  "dusty",  "misty",  "foggy",
    "shiny",  "matte",  "rough",  "smooth", "sharp",  "blunt",  "heavy",  "airy",
    "spare",  "lean",   "stark",  "mild",   "breezy", "cloudy", "starry", "frosty",
    "rustic", "urban",  "retro",  "modern", "classic", "simple", "ornate", "subtle",
    "muted",  "glossy", "velvet", "silken",
};

const std::vector<std::string> kStyleNouns = {
    "portrait", "sketch", "photo", "drawing", "painting",
    "picture",  "icon",   "avatar", "cartoon", "doodle",
};

enum class AttrField { Hair, Skin, Eyes, Expr, Hat, Bg };

const std::unordered_map<std::string, std::pair<AttrField, int>>& attr_word_map() {
    static auto map = [] {
        std::unordered_map<std::string, std::pair<AttrField, int>> m;
        for (int i = 0; i < kHairCount; ++i) m[hair_name(static_cast<HairColor>(i))] = {AttrField::Hair, i};
        for (int i = 0; i < kSkinCount; ++i) m[skin_name(static_cast<SkinTone>(i))] = {AttrField::Skin, i};
        for (int i = 0; i < kEyesCount; ++i) m[eyes_name(static_cast<Eyes>(i))] = {AttrField::Eyes, i};
        for (int i = 0; i < kExpressionCount; ++i)
            m[expression_name(static_cast<Expression>(i))] = {AttrField::Expr, i};
        m["hat"] = {AttrField::Hat, 1};
        for (int i = 0; i < kBackgroundCount; ++i)
            m[background_name(static_cast<Background>(i))] = {AttrField::Bg, i};
        return m;
    }();
    return map;
}

} // namespace

std::vector<std::string> attribute_words(const FaceSpec& spec) {
    std::vector<std::string> w = {
        hair_name(spec.hair_color), skin_name(spec.skin_tone), eyes_name(spec.eyes),
        expression_name(spec.expression),
    };
    if (spec.hat) {
        w.push_back("hat");
    }
    w.push_back(background_name(spec.background_color));
    return w;
}

std::vector<std::string> describe(const FaceSpec& spec, uint64_t style_seed) {
    Rng rng = Rng::derive(style_seed, 0xCA97100Full);
    const std::string hair = hair_name(spec.hair_color);
    const std::string skin = skin_name(spec.skin_tone);
    const std::string eyes = eyes_name(spec.eyes);
    const std::string expr = expression_name(spec.expression);
    const std::string bg = background_name(spec.background_color);
    const std::string& adj = kStyleAdjectives[rng.next_below(kStyleAdjectives.size())];
    const std::string& noun = kStyleNouns[rng.next_below(kStyleNouns.size())];

    std::vector<std::string> out;
    switch (rng.next_below(4)) {
    case 0:
        out = {adj, hair, "hair", skin, "skin", eyes, "eyes", expr, "look"};
        if (spec.hat) out.push_back("hat");
        out.insert(out.end(), {bg, "background"});
        break;
    case 1:
        out = {"tags", hair, skin, eyes, expr};
        if (spec.hat) out.push_back("hat");
        out.push_back(bg);
        break;
    case 2:
        out = {"a", adj, noun, "with", hair, "hair", "and", skin, "skin", eyes, "eyes", expr, "expression"};
        if (spec.hat) out.push_back("hat");
        out.insert(out.end(), {bg, "backdrop"});
        break;
    default:
        out = {"the", adj, "face", "with", hair, "hair", skin, "skin", eyes, "eyes", expr};
        if (spec.hat) out.insert(out.end(), {"wearing", "hat"});
        out.insert(out.end(), {"on", bg, "background"});
        break;
    }
    FG_CHECK(static_cast<int>(out.size()) <= kMaxTextLen, "caption exceeds max text length");
    return out;
}

std::optional<FaceSpec> parse_caption(const std::vector<std::string>& words) {
    const auto& map = attr_word_map();
    bool have_hair = false, have_skin = false, have_eyes = false, have_expr = false, have_bg = false;
    FaceSpec s;
    s.hat = false;
    for (const auto& w : words) {
        auto it = map.find(w);
        if (it == map.end()) {
            continue;
        }
        switch (it->second.first) {
        case AttrField::Hair: s.hair_color = static_cast<HairColor>(it->second.second); have_hair = true; break;
        case AttrField::Skin: s.skin_tone = static_cast<SkinTone>(it->second.second); have_skin = true; break;
        case AttrField::Eyes: s.eyes = static_cast<Eyes>(it->second.second); have_eyes = true; break;
        case AttrField::Expr: s.expression = static_cast<Expression>(it->second.second); have_expr = true; break;
        case AttrField::Hat: s.hat = true; break;
        case AttrField::Bg: s.background_color = static_cast<Background>(it->second.second); have_bg = true; break;
        }
    }
    if (!(have_hair && have_skin && have_eyes && have_expr && have_bg)) {
        return std::nullopt;
    }
    return s;
}

const std::vector<std::string>& grammar_words() {
    static std::vector<std::string> words = [] {
        std::vector<std::string> w;
        for (int i = 0; i < kHairCount; ++i) w.push_back(hair_name(static_cast<HairColor>(i)));
        for (int i = 0; i < kSkinCount; ++i) w.push_back(skin_name(static_cast<SkinTone>(i)));
        for (int i = 0; i < kEyesCount; ++i) w.push_back(eyes_name(static_cast<Eyes>(i)));
        for (int i = 0; i < kExpressionCount; ++i) w.push_back(expression_name(static_cast<Expression>(i)));
        w.push_back("hat");
        for (int i = 0; i < kBackgroundCount; ++i) w.push_back(background_name(static_cast<Background>(i)));
        w.insert(w.end(), kStructureWords.begin(), kStructureWords.end());
        w.insert(w.end(), kStyleAdjectives.begin(), kStyleAdjectives.end());
        w.insert(w.end(), kStyleNouns.begin(), kStyleNouns.end());
        return w;
    }();
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (size_t i = 0; i < words.size(); ++i) {
        if (i) {
            out += ' ';
        }
        out += words[i];
    }
    return out;
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

} // namespace facegen
