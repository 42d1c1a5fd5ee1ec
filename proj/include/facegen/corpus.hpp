#pragma once

#include "facegen/grammar.hpp"
#include "facegen/sprite.hpp"

#include <string>
#include <vector>

namespace facegen {

struct CorpusRecord {
    SpriteImage image;
    std::vector<std::string> caption;
    FaceSpec spec;
    bool caption_is_relevant = false;
};

// Pure function of (count, rho, seed). Each record's caption describes its
// own spec with probability rho, otherwise an independently drawn spec;
// caption_is_relevant records whether the caption's attributes actually
// match (a chance collision counts as relevant).
std::vector<CorpusRecord> sample_corpus(int count, double rho, uint64_t seed);

void write_corpus_jsonl(const std::string& path, const std::vector<CorpusRecord>& records);
std::vector<CorpusRecord> read_corpus_jsonl(const std::string& path);

} // namespace facegen
