#pragma once

#include "facegen/codebook.hpp"
#include "facegen/grammar.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace facegen {

// Word vocabulary with local ids contiguous from 0; the four sequence
// specials plus [UNK] take the ids right after the words.
struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, int> word_to_id;

    int word_count() const { return static_cast<int>(words.size()); }
    int cls_id() const { return word_count(); }
    int sep_id() const { return word_count() + 1; }
    int mask_id() const { return word_count() + 2; }
    int pad_id() const { return word_count() + 3; }
    int unk_id() const { return word_count() + 4; }
    int size_with_specials() const { return word_count() + 5; }

    const std::string& word(int local_id) const { return words.at(static_cast<size_t>(local_id)); }
};

Vocabulary make_vocabulary();
void write_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::string& path);

// Unified id space shared by the softmax head: image codes occupy [0, K),
// text words [K, K+W), then [CLS], [SEP], [MASK], [PAD], [UNK].
struct TokenSpace {
    int codebook_size = 0;
    int word_count = 0;
    int image_tokens = 0; // n
    int grid_rows = 0;
    int grid_cols = 0;
    int max_text = kMaxTextLen; // m_max

    int text_base() const { return codebook_size; }
    int specials_base() const { return codebook_size + word_count; }
    int cls() const { return specials_base(); }
    int sep() const { return specials_base() + 1; }
    int mask() const { return specials_base() + 2; }
    int pad() const { return specials_base() + 3; }
    int unk() const { return specials_base() + 4; }
    int head_size() const { return codebook_size + word_count + 5; }

    int seq_len() const { return 2 + image_tokens + max_text; }
    int image_begin() const { return 1; }            // sequence index of first image token
    int image_end() const { return 1 + image_tokens; }
    int text_begin() const { return 2 + image_tokens; }
    int text_end() const { return seq_len(); }

    bool is_image_id(int id) const { return id >= 0 && id < codebook_size; }
    bool is_word_id(int id) const { return id >= text_base() && id < specials_base(); }

    int unified_text(int local_id) const { return text_base() + local_id; }
    int seq_index_of_cell(int r, int c) const { return image_begin() + r * grid_cols + c; }
};

TokenSpace make_token_space(int codebook_size, int word_count, int grid_rows, int grid_cols,
                            int max_text = kMaxTextLen);

struct TokenSequence {
    std::vector<int> ids; // unified ids, layout [CLS] image... [SEP] text... [PAD]...
    int n = 0;            // image token count
    int m = 0;            // text token count (before padding)
    int grid_rows = 0;
    int grid_cols = 0;

    bool operator==(const TokenSequence&) const = default;
};

// Local word ids; unknown words map to [UNK], truncation at max_text.
std::vector<int> tokenize_text(const std::vector<std::string>& caption, const Vocabulary& vocab,
                               int max_text = kMaxTextLen);
std::vector<std::string> text_ids_to_words(const std::vector<int>& local_ids, const Vocabulary& vocab);

TokenSequence assemble(const std::vector<int>& image_tokens, const std::vector<int>& text_local_ids,
                       const TokenSpace& space);
void disassemble(const TokenSequence& seq, const TokenSpace& space, std::vector<int>& image_tokens,
                 std::vector<int>& text_local_ids);

// 1 for positions attention may use, 0 for [PAD].
std::vector<float> pad_mask(const TokenSequence& seq, const TokenSpace& space);

} // namespace facegen
