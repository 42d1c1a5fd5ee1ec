#include "facegen/sprite.hpp"

#include "facegen/common.hpp"
#include "facegen/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstring>
#include <mutex>

namespace facegen {

using json = nlohmann::json;

namespace {

struct Color {
    uint8_t r, g, b;
};

const Color kHairColors[kHairCount] = {
    {190, 40, 40},   // red
    {25, 22, 25},    // black
    {225, 200, 90},  // blond
    {120, 75, 35},   // brown
    {170, 170, 175}, // gray
};
const Color kSkinColors[kSkinCount] = {
    {240, 205, 170}, // light
    {200, 150, 110}, // tan
    {110, 75, 50},   // dark
};
const Color kBackgroundColors[kBackgroundCount] = {
    {70, 110, 200},  // blue
    {75, 170, 90},   // green
    {235, 235, 240}, // white
    {230, 140, 180}, // pink
};
const Color kHatColor = {45, 45, 60};
const Color kSclera = {250, 250, 250};
const Color kPupil = {20, 20, 30};
const Color kLidLine = {40, 30, 25};
const Color kGlassFrame = {15, 15, 15};
const Color kMouth = {90, 20, 30};
const Color kOccluder = {128, 128, 128};

const char* kHairNames[kHairCount] = {"red", "black", "blond", "brown", "gray"};
const char* kSkinNames[kSkinCount] = {"light", "tan", "dark"};
const char* kEyesNames[kEyesCount] = {"open", "closed", "glasses"};
const char* kExprNames[kExpressionCount] = {"smile", "neutral", "frown"};
const char* kBgNames[kBackgroundCount] = {"blue", "green", "white", "pink"};

// Per-pixel brightness dither keyed on position only. It multiplies distinct
// patch contents across grid locations without touching attribute parsing,
// since every candidate render carries the identical pattern.
inline int dither(int x, int y) {
    uint32_t h = static_cast<uint32_t>(x) * 2654435761u ^ static_cast<uint32_t>(y) * 2246822519u;
    h ^= h >> 13;
    h *= 2654435761u;
    h ^= h >> 16;
    return (static_cast<int>(h % 7u) - 3) * 2; // {-6,-4,-2,0,2,4,6}
}

inline uint8_t clamp_u8(int v) {
    return static_cast<uint8_t>(std::clamp(v, 0, 255));
}

struct Raster {
    SpriteImage* img;
    double scale;

    void put(int x, int y, Color c) {
        uint8_t* p = img->at(x, y);
        int d = dither(x, y);
        p[0] = clamp_u8(c.r + d);
        p[1] = clamp_u8(c.g + d);
        p[2] = clamp_u8(c.b + d);
    }

    int sx(int v) const { return static_cast<int>(v * scale + 0.5); }

    // Rect bounds are given in 32x32 base coordinates, inclusive.
    void fill(int x0, int y0, int x1, int y1, Color c) {
        int ax0 = sx(x0), ay0 = sx(y0);
        int ax1 = sx(x1 + 1) - 1, ay1 = sx(y1 + 1) - 1;
        for (int y = ay0; y <= ay1; ++y) {
            for (int x = ax0; x <= ax1; ++x) {
                put(x, y, c);
            }
        }
    }
};

} // namespace

bool attributes_equal(const FaceSpec& a, const FaceSpec& b) {
    return a.hair_color == b.hair_color && a.skin_tone == b.skin_tone && a.eyes == b.eyes &&
           a.expression == b.expression && a.hat == b.hat &&
           a.background_color == b.background_color;
}

const char* hair_name(HairColor v) { return kHairNames[static_cast<int>(v)]; }
const char* skin_name(SkinTone v) { return kSkinNames[static_cast<int>(v)]; }
const char* eyes_name(Eyes v) { return kEyesNames[static_cast<int>(v)]; }
const char* expression_name(Expression v) { return kExprNames[static_cast<int>(v)]; }
const char* background_name(Background v) { return kBgNames[static_cast<int>(v)]; }

template <class E, int N>
static E from_name(const std::string& s, const char* const (&names)[N], const char* what) {
    for (int i = 0; i < N; ++i) {
        if (s == names[i]) {
            return static_cast<E>(i);
        }
    }
    throw std::runtime_error(std::string("unknown ") + what + " value: " + s);
}

HairColor hair_from_name(const std::string& s) { return from_name<HairColor>(s, kHairNames, "hair"); }
SkinTone skin_from_name(const std::string& s) { return from_name<SkinTone>(s, kSkinNames, "skin"); }
Eyes eyes_from_name(const std::string& s) { return from_name<Eyes>(s, kEyesNames, "eyes"); }
Expression expression_from_name(const std::string& s) {
    return from_name<Expression>(s, kExprNames, "expression");
}
Background background_from_name(const std::string& s) {
    return from_name<Background>(s, kBgNames, "background");
}

SpriteImage render_sprite(const FaceSpec& spec, int size) {
    FG_CHECK(size > 0 && size % kPatchSize == 0, "sprite size must be a positive multiple of the patch size");
    SpriteImage img;
    img.width = size;
    img.height = size;
    img.pixels.assign(static_cast<size_t>(size) * size * 3, 0);

    Raster r{&img, size / 32.0};
    Color bg = kBackgroundColors[static_cast<int>(spec.background_color)];
    Color skin = kSkinColors[static_cast<int>(spec.skin_tone)];

    r.fill(0, 0, 31, 31, bg);
    if (spec.hat) {
        r.fill(4, 0, 27, 5, kHatColor);
    }
    r.fill(2, 6, 29, 9, kHairColors[static_cast<int>(spec.hair_color)]);
    r.fill(6, 10, 25, 27, skin);

    switch (spec.eyes) {
    case Eyes::Open:
        r.fill(8, 12, 13, 15, kSclera);
        r.fill(18, 12, 23, 15, kSclera);
        r.fill(10, 13, 11, 14, kPupil);
        r.fill(20, 13, 21, 14, kPupil);
        break;
    case Eyes::Closed:
        r.fill(9, 13, 12, 14, kLidLine);
        r.fill(19, 13, 22, 14, kLidLine);
        break;
    case Eyes::Glasses:
        r.fill(8, 12, 13, 15, kGlassFrame);
        r.fill(9, 13, 12, 14, kSclera);
        r.fill(18, 12, 23, 15, kGlassFrame);
        r.fill(19, 13, 22, 14, kSclera);
        r.fill(14, 13, 17, 13, kGlassFrame);
        break;
    }

    switch (spec.expression) {
    case Expression::Smile:
        r.fill(12, 20, 13, 21, kMouth);
        r.fill(18, 20, 19, 21, kMouth);
        r.fill(13, 22, 14, 22, kMouth);
        r.fill(17, 22, 18, 22, kMouth);
        r.fill(14, 23, 17, 23, kMouth);
        break;
    case Expression::Neutral:
        r.fill(13, 21, 18, 22, kMouth);
        break;
    case Expression::Frown:
        r.fill(12, 22, 13, 23, kMouth);
        r.fill(18, 22, 19, 23, kMouth);
        r.fill(13, 21, 14, 21, kMouth);
        r.fill(17, 21, 18, 21, kMouth);
        r.fill(14, 20, 17, 20, kMouth);
        break;
    }

    if (spec.occlusion) {
        const OcclusionRect& o = *spec.occlusion;
        FG_CHECK(o.x >= 0 && o.y >= 0 && o.w > 0 && o.h > 0 && o.x + o.w <= size && o.y + o.h <= size,
                 "occlusion rectangle outside image bounds");
        for (int y = o.y; y < o.y + o.h; ++y) {
            for (int x = o.x; x < o.x + o.w; ++x) {
                uint8_t* p = img.at(x, y);
                p[0] = kOccluder.r;
                p[1] = kOccluder.g;
                p[2] = kOccluder.b;
            }
        }
    }
    return img;
}

FaceSpec random_spec(Rng& rng) {
    FaceSpec s;
    s.hair_color = static_cast<HairColor>(rng.next_below(kHairCount));
    s.skin_tone = static_cast<SkinTone>(rng.next_below(kSkinCount));
    s.eyes = static_cast<Eyes>(rng.next_below(kEyesCount));
    s.expression = static_cast<Expression>(rng.next_below(kExpressionCount));
    s.hat = rng.next_below(2) == 1;
    s.background_color = static_cast<Background>(rng.next_below(kBackgroundCount));
    return s;
}

const std::vector<FaceSpec>& spec_grid() {
    static std::vector<FaceSpec> grid = [] {
        std::vector<FaceSpec> g;
        g.reserve(kSpecGridSize);
        for (int h = 0; h < kHairCount; ++h)
            for (int s = 0; s < kSkinCount; ++s)
                for (int e = 0; e < kEyesCount; ++e)
                    for (int x = 0; x < kExpressionCount; ++x)
                        for (int t = 0; t < 2; ++t)
                            for (int b = 0; b < kBackgroundCount; ++b) {
                                FaceSpec spec;
                                spec.hair_color = static_cast<HairColor>(h);
                                spec.skin_tone = static_cast<SkinTone>(s);
                                spec.eyes = static_cast<Eyes>(e);
                                spec.expression = static_cast<Expression>(x);
                                spec.hat = t == 1;
                                spec.background_color = static_cast<Background>(b);
                                g.push_back(spec);
                            }
        return g;
    }();
    return grid;
}

namespace {

const std::vector<SpriteImage>& grid_renders_32() {
    static std::vector<SpriteImage> renders = [] {
        std::vector<SpriteImage> r;
        r.reserve(kSpecGridSize);
        for (const FaceSpec& s : spec_grid()) {
            r.push_back(render_sprite(s, kImageSize));
        }
        return r;
    }();
    return renders;
}

int64_t pixel_dist2(const SpriteImage& a, const SpriteImage& b) {
    int64_t d = 0;
    size_t n = a.pixels.size();
    for (size_t i = 0; i < n; ++i) {
        int diff = static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]);
        d += static_cast<int64_t>(diff) * diff;
    }
    return d;
}

std::pair<int, int64_t> nearest_grid_index(const SpriteImage& img) {
    FG_CHECK(img.width == kImageSize && img.height == kImageSize,
             "parse_sprite expects a 32x32 image");
    const auto& renders = grid_renders_32();
    int best = 0;
    int64_t best_d = pixel_dist2(img, renders[0]);
    for (int i = 1; i < kSpecGridSize; ++i) {
        int64_t d = pixel_dist2(img, renders[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return {best, best_d};
}

} // namespace

FaceSpec parse_sprite(const SpriteImage& img) {
    return spec_grid()[nearest_grid_index(img).first];
}

int64_t parse_sprite_distance(const SpriteImage& img) {
    return nearest_grid_index(img).second;
}

std::string spec_to_json(const FaceSpec& spec) {
    json j;
    j["hair_color"] = hair_name(spec.hair_color);
    j["skin_tone"] = skin_name(spec.skin_tone);
    j["eyes"] = eyes_name(spec.eyes);
    j["expression"] = expression_name(spec.expression);
    j["hat"] = spec.hat;
    j["background_color"] = background_name(spec.background_color);
    if (spec.occlusion) {
        j["occlusion"] = {spec.occlusion->x, spec.occlusion->y, spec.occlusion->w, spec.occlusion->h};
    } else {
        j["occlusion"] = nullptr;
    }
    return j.dump();
}

FaceSpec spec_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    FaceSpec s;
    s.hair_color = hair_from_name(j.at("hair_color").get<std::string>());
    s.skin_tone = skin_from_name(j.at("skin_tone").get<std::string>());
    s.eyes = eyes_from_name(j.at("eyes").get<std::string>());
    s.expression = expression_from_name(j.at("expression").get<std::string>());
    s.hat = j.at("hat").get<bool>();
    s.background_color = background_from_name(j.at("background_color").get<std::string>());
    if (j.contains("occlusion") && !j.at("occlusion").is_null()) {
        auto a = j.at("occlusion");
        s.occlusion = OcclusionRect{a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<int>(),
                                    a.at(3).get<int>()};
    }
    return s;
}

void write_ppm(const std::string& path, const SpriteImage& img) {
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> bytes(header.begin(), header.end());
    bytes.insert(bytes.end(), img.pixels.begin(), img.pixels.end());
    write_file_bytes(path, bytes.data(), bytes.size());
}

SpriteImage read_image_file(const std::string& path, int expect_size) {
    auto bytes = read_file_bytes(path);
    SpriteImage img;
    img.width = expect_size;
    img.height = expect_size;
    size_t raw = static_cast<size_t>(expect_size) * expect_size * 3;
    if (bytes.size() == raw) {
        img.pixels.assign(bytes.begin(), bytes.end());
        return img;
    }
    // PPM P6
    FG_CHECK(bytes.size() > 2 && bytes[0] == 'P' && bytes[1] == '6', "image must be raw RGB or PPM P6");
    size_t pos = 2;
    auto next_int = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) {
            ++pos;
        }
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') {
                ++pos;
            }
            while (pos < bytes.size() && std::isspace(bytes[pos])) {
                ++pos;
            }
        }
        int v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos] - '0');
            ++pos;
        }
        return v;
    };
    int w = next_int();
    int h = next_int();
    int maxval = next_int();
    ++pos; // single whitespace after maxval
    FG_CHECK(maxval == 255, "PPM maxval must be 255");
    FG_CHECK(w == expect_size && h == expect_size, "unexpected image dimensions");
    FG_CHECK(bytes.size() - pos >= raw, "truncated PPM payload");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + raw));
    return img;
}

} // namespace facegen
