#include "facegen/tokens.hpp"

#include "facegen/common.hpp"
#include "facegen/util.hpp"

#include <sstream>

namespace facegen {

Vocabulary make_vocabulary() {
    Vocabulary v;
    v.words = grammar_words();
    for (int i = 0; i < static_cast<int>(v.words.size()); ++i) {
        v.word_to_id[v.words[static_cast<size_t>(i)]] = i;
    }
    return v;
}

static const char* kSpecialNames[5] = {"[CLS]", "[SEP]", "[MASK]", "[PAD]", "[UNK]"};

void write_vocabulary(const std::string& path, const Vocabulary& vocab) {
    std::string out;
    for (const auto& w : vocab.words) {
        out += w;
        out += '\n';
    }
    for (const char* s : kSpecialNames) {
        out += s;
        out += '\n';
    }
    write_file_text(path, out);
}

Vocabulary read_vocabulary(const std::string& path) {
    std::istringstream in(read_file_text(path));
    Vocabulary v;
    std::string line;
    std::vector<std::string> specials;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            specials.push_back(line);
        } else {
            FG_CHECK(specials.empty(), "word after specials in vocabulary file");
            v.word_to_id[line] = static_cast<int>(v.words.size());
            v.words.push_back(line);
        }
    }
    FG_CHECK(specials.size() == 5, "vocabulary file must end with the five specials");
    for (int i = 0; i < 5; ++i) {
        FG_CHECK(specials[static_cast<size_t>(i)] == kSpecialNames[i],
                 "vocabulary specials out of order");
    }
    return v;
}

TokenSpace make_token_space(int codebook_size, int word_count, int grid_rows, int grid_cols,
                            int max_text) {
    TokenSpace s;
    s.codebook_size = codebook_size;
    s.word_count = word_count;
    s.grid_rows = grid_rows;
    s.grid_cols = grid_cols;
    s.image_tokens = grid_rows * grid_cols;
    s.max_text = max_text;
    return s;
}

std::vector<int> tokenize_text(const std::vector<std::string>& caption, const Vocabulary& vocab,
                               int max_text) {
    std::vector<int> ids;
    ids.reserve(caption.size());
    for (const auto& w : caption) {
        if (static_cast<int>(ids.size()) >= max_text) {
            break;
        }
        auto it = vocab.word_to_id.find(w);
        ids.push_back(it == vocab.word_to_id.end() ? vocab.unk_id() : it->second);
    }
    return ids;
}

std::vector<std::string> text_ids_to_words(const std::vector<int>& local_ids, const Vocabulary& vocab) {
    std::vector<std::string> words;
    words.reserve(local_ids.size());
    for (int id : local_ids) {
        if (id >= 0 && id < vocab.word_count()) {
            words.push_back(vocab.word(id));
        } else if (id == vocab.unk_id()) {
            words.push_back("[UNK]");
        } else {
            words.push_back("?");
        }
    }
    return words;
}

TokenSequence assemble(const std::vector<int>& image_tokens, const std::vector<int>& text_local_ids,
                       const TokenSpace& space) {
    FG_CHECK(static_cast<int>(image_tokens.size()) == space.image_tokens,
             "image token count does not match the grid");
    FG_CHECK(static_cast<int>(text_local_ids.size()) <= space.max_text, "text overlength");
    TokenSequence seq;
    seq.n = space.image_tokens;
    seq.m = static_cast<int>(text_local_ids.size());
    seq.grid_rows = space.grid_rows;
    seq.grid_cols = space.grid_cols;
    seq.ids.reserve(static_cast<size_t>(space.seq_len()));
    seq.ids.push_back(space.cls());
    for (int t : image_tokens) {
        FG_CHECK(space.is_image_id(t), "image token outside codebook range");
        seq.ids.push_back(t);
    }
    seq.ids.push_back(space.sep());
    for (int w : text_local_ids) {
        FG_CHECK(w >= 0 && w < space.word_count + 5, "text token outside vocabulary");
        seq.ids.push_back(space.unified_text(w));
    }
    while (static_cast<int>(seq.ids.size()) < space.seq_len()) {
        seq.ids.push_back(space.pad());
    }
    return seq;
}

void disassemble(const TokenSequence& seq, const TokenSpace& space, std::vector<int>& image_tokens,
                 std::vector<int>& text_local_ids) {
    FG_CHECK(static_cast<int>(seq.ids.size()) == space.seq_len(), "sequence length mismatch");
    image_tokens.assign(seq.ids.begin() + space.image_begin(), seq.ids.begin() + space.image_end());
    text_local_ids.clear();
    for (int i = space.text_begin(); i < space.text_begin() + seq.m; ++i) {
        text_local_ids.push_back(seq.ids[static_cast<size_t>(i)] - space.text_base());
    }
}

std::vector<float> pad_mask(const TokenSequence& seq, const TokenSpace& space) {
    std::vector<float> mask(seq.ids.size(), 1.0f);
    for (size_t i = 0; i < seq.ids.size(); ++i) {
        if (seq.ids[i] == space.pad()) {
            mask[i] = 0.0f;
        }
    }
    return mask;
}

} // namespace facegen
