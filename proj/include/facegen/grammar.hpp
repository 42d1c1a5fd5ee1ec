#pragma once

#include "facegen/sprite.hpp"

#include <optional>
#include <string>
#include <vector>

namespace facegen {

constexpr int kMaxTextLen = 16;

// Closed caption grammar. Every caption is a word list of at most
// kMaxTextLen entries containing exactly one word per visible attribute
// ("hat" only when worn); filler words vary with the style seed.
std::vector<std::string> describe(const FaceSpec& spec, uint64_t style_seed);

// Inverse of describe on the attribute fields: scans for attribute words.
// Returns nullopt if any of the five categorical attributes is missing.
std::optional<FaceSpec> parse_caption(const std::vector<std::string>& words);

// The attribute words a caption for this spec must contain.
std::vector<std::string> attribute_words(const FaceSpec& spec);

// Full word list of the grammar in canonical order (vocabulary file order).
const std::vector<std::string>& grammar_words();

std::string join_words(const std::vector<std::string>& words);
std::vector<std::string> split_words(const std::string& text);

} // namespace facegen
