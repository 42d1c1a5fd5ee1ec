#pragma once

#include "facegen/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace facegen {

constexpr int kImageSize = 32;
constexpr int kPatchSize = 4;

enum class HairColor : uint8_t { Red, Black, Blond, Brown, Gray };
enum class SkinTone : uint8_t { Light, Tan, Dark };
enum class Eyes : uint8_t { Open, Closed, Glasses };
enum class Expression : uint8_t { Smile, Neutral, Frown };
enum class Background : uint8_t { Blue, Green, White, Pink };

constexpr int kHairCount = 5;
constexpr int kSkinCount = 3;
constexpr int kEyesCount = 3;
constexpr int kExpressionCount = 3;
constexpr int kBackgroundCount = 4;
// 5 * 3 * 3 * 3 * 2 * 4
constexpr int kSpecGridSize = 1080;

struct OcclusionRect {
    int x = 0, y = 0, w = 0, h = 0;
    bool operator==(const OcclusionRect&) const = default;
};

struct FaceSpec {
    HairColor hair_color = HairColor::Red;
    SkinTone skin_tone = SkinTone::Light;
    Eyes eyes = Eyes::Open;
    Expression expression = Expression::Smile;
    bool hat = false;
    Background background_color = Background::Blue;
    std::optional<OcclusionRect> occlusion;

    bool operator==(const FaceSpec&) const = default;
};

// Equality on the six visible attribute fields, ignoring occlusion.
bool attributes_equal(const FaceSpec& a, const FaceSpec& b);

struct SpriteImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels; // row-major RGB

    uint8_t* at(int x, int y) { return pixels.data() + 3 * (y * width + x); }
    const uint8_t* at(int x, int y) const { return pixels.data() + 3 * (y * width + x); }
    bool operator==(const SpriteImage&) const = default;
};

const char* hair_name(HairColor v);
const char* skin_name(SkinTone v);
const char* eyes_name(Eyes v);
const char* expression_name(Expression v);
const char* background_name(Background v);

HairColor hair_from_name(const std::string& s);
SkinTone skin_from_name(const std::string& s);
Eyes eyes_from_name(const std::string& s);
Expression expression_from_name(const std::string& s);
Background background_from_name(const std::string& s);

// Deterministic rasterizer. Throws if size is not a multiple of the patch
// size. Any two specs that differ in a visible attribute differ in at least
// one patch because each attribute owns a disjoint pixel region.
SpriteImage render_sprite(const FaceSpec& spec, int size = kImageSize);

// Uniform spec over the attribute grid; never sets occlusion.
FaceSpec random_spec(Rng& rng);

// All 1080 attribute combinations in a fixed canonical order.
const std::vector<FaceSpec>& spec_grid();

// Inverse of the renderer: nearest spec on the attribute grid by summed
// squared pixel distance (ties to the earlier grid entry). Exact on rendered
// sprites; the scoring oracle for generated images.
FaceSpec parse_sprite(const SpriteImage& img);

// Squared pixel distance to the nearest grid render, for unparseable-region
// diagnostics.
int64_t parse_sprite_distance(const SpriteImage& img);

std::string spec_to_json(const FaceSpec& spec);
FaceSpec spec_from_json(const std::string& json_text);

// PPM (P6) round-trip used by the CLI for image files.
void write_ppm(const std::string& path, const SpriteImage& img);
SpriteImage read_image_file(const std::string& path, int expect_size = kImageSize);

} // namespace facegen
