#pragma once

#include "facegen/rng.hpp"
#include "facegen/tape.hpp"
#include "facegen/tokens.hpp"
#include "facegen/util.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace facegen {

constexpr float kLayerNormEps = 1e-5f;
constexpr float kInitStd = 0.02f;

struct ModelConfig {
    int embed_dim = 128;
    int layers = 4;
    int heads = 4;
    int ffn_inner = 256;
    int codebook_size = 512;
    int patch_size = kPatchSize;
    int grid_rows = 8;
    int grid_cols = 8;
    int max_text = kMaxTextLen;
    std::vector<std::string> vocab_words; // embedded so checkpoints are self-contained

    int word_count() const { return static_cast<int>(vocab_words.size()); }
    int head_size() const { return codebook_size + word_count() + 5; }
    int image_tokens() const { return grid_rows * grid_cols; }
    int seq_len() const { return 2 + image_tokens() + max_text; }

    TokenSpace token_space() const {
        return make_token_space(codebook_size, word_count(), grid_rows, grid_cols, max_text);
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["embed_dim"] = embed_dim;
        j["layers"] = layers;
        j["heads"] = heads;
        j["ffn_inner"] = ffn_inner;
        j["codebook_size"] = codebook_size;
        j["patch_size"] = patch_size;
        j["grid_rows"] = grid_rows;
        j["grid_cols"] = grid_cols;
        j["max_text"] = max_text;
        j["vocab_words"] = vocab_words;
        return j;
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        c.embed_dim = j.at("embed_dim").get<int>();
        c.layers = j.at("layers").get<int>();
        c.heads = j.at("heads").get<int>();
        c.ffn_inner = j.at("ffn_inner").get<int>();
        c.codebook_size = j.at("codebook_size").get<int>();
        c.patch_size = j.at("patch_size").get<int>();
        c.grid_rows = j.at("grid_rows").get<int>();
        c.grid_cols = j.at("grid_cols").get<int>();
        c.max_text = j.at("max_text").get<int>();
        c.vocab_words = j.at("vocab_words").get<std::vector<std::string>>();
        return c;
    }
};

inline ModelConfig make_default_config(const Vocabulary& vocab) {
    ModelConfig c;
    c.vocab_words = vocab.words;
    return c;
}

template <class S>
struct BlockParams {
    Tensor<S> ln1_gamma, ln1_beta;
    Tensor<S> wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor<S> ln2_gamma, ln2_beta;
    Tensor<S> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

template <class S>
struct ModelParams {
    ModelConfig config;
    Tensor<S> tok_emb; // rows cover image codes, words and specials
    Tensor<S> pos_emb;
    std::vector<BlockParams<S>> blocks;
    Tensor<S> head_w, head_b; // one shared projection for both modalities
    Tensor<S> itm_w, itm_b;

    static ModelParams init(const ModelConfig& cfg, uint64_t seed) {
        ModelParams p;
        p.config = cfg;
        Rng rng = Rng::derive(seed, 0x12417ull);
        auto randn = [&](std::vector<int> shape) {
            Tensor<S> t(std::move(shape));
            for (auto& v : t.data) {
                v = static_cast<S>(rng.next_normal() * kInitStd);
            }
            return t;
        };
        const int d = cfg.embed_dim;
        p.tok_emb = randn({cfg.head_size(), d});
        p.pos_emb = randn({cfg.seq_len(), d});
        p.blocks.resize(static_cast<size_t>(cfg.layers));
        for (auto& b : p.blocks) {
            b.ln1_gamma = Tensor<S>({d});
            std::fill(b.ln1_gamma.data.begin(), b.ln1_gamma.data.end(), S(1));
            b.ln1_beta = Tensor<S>({d});
            b.wq = randn({d, d});
            b.bq = Tensor<S>({d});
            b.wk = randn({d, d});
            b.bk = Tensor<S>({d});
            b.wv = randn({d, d});
            b.bv = Tensor<S>({d});
            b.wo = randn({d, d});
            b.bo = Tensor<S>({d});
            b.ln2_gamma = Tensor<S>({d});
            std::fill(b.ln2_gamma.data.begin(), b.ln2_gamma.data.end(), S(1));
            b.ln2_beta = Tensor<S>({d});
            b.ffn_w1 = randn({d, 2 * cfg.ffn_inner});
            b.ffn_b1 = Tensor<S>({2 * cfg.ffn_inner});
            b.ffn_w2 = randn({cfg.ffn_inner, d});
            b.ffn_b2 = Tensor<S>({d});
        }
        p.head_w = randn({d, cfg.head_size()});
        p.head_b = Tensor<S>({cfg.head_size()});
        p.itm_w = randn({d, 2});
        p.itm_b = Tensor<S>({2});
        return p;
    }

    template <class Fn>
    void for_each_param(Fn fn) {
        fn("tok_emb", tok_emb);
        fn("pos_emb", pos_emb);
        for (size_t i = 0; i < blocks.size(); ++i) {
            std::string pre = "blk" + std::to_string(i) + ".";
            auto& b = blocks[i];
            fn(pre + "ln1.gamma", b.ln1_gamma);
            fn(pre + "ln1.beta", b.ln1_beta);
            fn(pre + "attn.wq", b.wq);
            fn(pre + "attn.bq", b.bq);
            fn(pre + "attn.wk", b.wk);
            fn(pre + "attn.bk", b.bk);
            fn(pre + "attn.wv", b.wv);
            fn(pre + "attn.bv", b.bv);
            fn(pre + "attn.wo", b.wo);
            fn(pre + "attn.bo", b.bo);
            fn(pre + "ln2.gamma", b.ln2_gamma);
            fn(pre + "ln2.beta", b.ln2_beta);
            fn(pre + "ffn.w1", b.ffn_w1);
            fn(pre + "ffn.b1", b.ffn_b1);
            fn(pre + "ffn.w2", b.ffn_w2);
            fn(pre + "ffn.b2", b.ffn_b2);
        }
        fn("head.w", head_w);
        fn("head.b", head_b);
        fn("itm.w", itm_w);
        fn("itm.b", itm_b);
    }

    template <class Fn>
    void for_each_param(Fn fn) const {
        const_cast<ModelParams*>(this)->for_each_param(
            [&](const std::string& name, Tensor<S>& t) { fn(name, static_cast<const Tensor<S>&>(t)); });
    }

    int64_t param_count() const {
        int64_t n = 0;
        for_each_param([&](const std::string&, const Tensor<S>& t) { n += t.numel(); });
        return n;
    }

    uint32_t checksum() const {
        uint32_t crc = 0;
        for_each_param([&](const std::string&, const Tensor<S>& t) {
            crc = crc32_update(crc, reinterpret_cast<const uint8_t*>(t.data.data()),
                               t.data.size() * sizeof(S));
        });
        return crc;
    }

    template <class T>
    ModelParams<T> cast() const {
        ModelParams<T> out;
        out.config = config;
        out.tok_emb = tok_emb.template cast<T>();
        out.pos_emb = pos_emb.template cast<T>();
        out.blocks.resize(blocks.size());
        for (size_t i = 0; i < blocks.size(); ++i) {
            const auto& b = blocks[i];
            auto& o = out.blocks[i];
            o.ln1_gamma = b.ln1_gamma.template cast<T>();
            o.ln1_beta = b.ln1_beta.template cast<T>();
            o.wq = b.wq.template cast<T>();
            o.bq = b.bq.template cast<T>();
            o.wk = b.wk.template cast<T>();
            o.bk = b.bk.template cast<T>();
            o.wv = b.wv.template cast<T>();
            o.bv = b.bv.template cast<T>();
            o.wo = b.wo.template cast<T>();
            o.bo = b.bo.template cast<T>();
            o.ln2_gamma = b.ln2_gamma.template cast<T>();
            o.ln2_beta = b.ln2_beta.template cast<T>();
            o.ffn_w1 = b.ffn_w1.template cast<T>();
            o.ffn_b1 = b.ffn_b1.template cast<T>();
            o.ffn_w2 = b.ffn_w2.template cast<T>();
            o.ffn_b2 = b.ffn_b2.template cast<T>();
        }
        out.head_w = head_w.template cast<T>();
        out.head_b = head_b.template cast<T>();
        out.itm_w = itm_w.template cast<T>();
        out.itm_b = itm_b.template cast<T>();
        return out;
    }
};

// Tape leaves for every parameter, in for_each_param order.
template <class S>
struct ParamVars {
    using Var = typename Tape<S>::Var;
    std::vector<std::pair<std::string, Var>> ordered;
    Var tok_emb, pos_emb, head_w, head_b, itm_w, itm_b;
    struct BlockVars {
        Var ln1_gamma, ln1_beta, wq, bq, wk, bk, wv, bv, wo, bo;
        Var ln2_gamma, ln2_beta, ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    };
    std::vector<BlockVars> blocks;
};

template <class S>
ParamVars<S> lift_params(Tape<S>& tape, const ModelParams<S>& params) {
    ParamVars<S> pv;
    pv.blocks.resize(params.blocks.size());
    size_t blk = 0;
    const_cast<ModelParams<S>&>(const_cast<ModelParams<S>&>(params))
        .for_each_param([&](const std::string& name, Tensor<S>& t) {
            auto var = tape.leaf(t);
            pv.ordered.emplace_back(name, var);
            if (name == "tok_emb") pv.tok_emb = var;
            else if (name == "pos_emb") pv.pos_emb = var;
            else if (name == "head.w") pv.head_w = var;
            else if (name == "head.b") pv.head_b = var;
            else if (name == "itm.w") pv.itm_w = var;
            else if (name == "itm.b") pv.itm_b = var;
            else {
                auto& b = pv.blocks[blk];
                auto suffix = name.substr(name.find('.') + 1);
                if (suffix == "ln1.gamma") b.ln1_gamma = var;
                else if (suffix == "ln1.beta") b.ln1_beta = var;
                else if (suffix == "attn.wq") b.wq = var;
                else if (suffix == "attn.bq") b.bq = var;
                else if (suffix == "attn.wk") b.wk = var;
                else if (suffix == "attn.bk") b.bk = var;
                else if (suffix == "attn.wv") b.wv = var;
                else if (suffix == "attn.bv") b.bv = var;
                else if (suffix == "attn.wo") b.wo = var;
                else if (suffix == "attn.bo") b.bo = var;
                else if (suffix == "ln2.gamma") b.ln2_gamma = var;
                else if (suffix == "ln2.beta") b.ln2_beta = var;
                else if (suffix == "ffn.w1") b.ffn_w1 = var;
                else if (suffix == "ffn.b1") b.ffn_b1 = var;
                else if (suffix == "ffn.w2") b.ffn_w2 = var;
                else if (suffix == "ffn.b2") {
                    b.ffn_b2 = var;
                    ++blk;
                }
            }
        });
    return pv;
}

template <class S>
struct ForwardResult {
    using Var = typename Tape<S>::Var;
    Var hidden;       // [B*T, d] final block output
    Var token_logits; // [rows, head_size] when logit_rows nonempty
    Var itm_logits;   // [B, 2] when requested
    bool has_token_logits = false;
    bool has_itm = false;
};

// Pre-LN encoder: x += Attn(LN(x)); x += GLU_FFN(LN(x)). Token and ITM heads
// read the final hidden states; the ITM head sees only each sequence's [CLS]
// row. pad_mask is [B, T] with zeros on [PAD].
template <class S>
ForwardResult<S> model_forward(Tape<S>& tape, const ParamVars<S>& pv, const ModelConfig& cfg,
                               const std::vector<int>& ids, int batch, const Tensor<S>& pad_mask,
                               const std::vector<int>& logit_rows, bool want_itm) {
    const int seq = cfg.seq_len();
    FG_CHECK(static_cast<int>(ids.size()) == batch * seq, "forward sequence length mismatch");

    std::vector<int> pos_ids(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) {
        pos_ids[i] = static_cast<int>(i % static_cast<size_t>(seq));
    }

    auto x = tape.add(tape.embedding_lookup(pv.tok_emb, ids),
                      tape.embedding_lookup(pv.pos_emb, pos_ids));
    const S eps = static_cast<S>(kLayerNormEps);
    for (int l = 0; l < cfg.layers; ++l) {
        const auto& b = pv.blocks[static_cast<size_t>(l)];
        auto ln1 = tape.add(tape.mul(tape.layer_norm(x, eps), b.ln1_gamma), b.ln1_beta);
        auto q = tape.add(tape.matmul(ln1, b.wq), b.bq);
        auto k = tape.add(tape.matmul(ln1, b.wk), b.bk);
        auto v = tape.add(tape.matmul(ln1, b.wv), b.bv);
        auto att = tape.scaled_dot_product_attention(q, k, v, pad_mask, cfg.heads, batch, seq);
        x = tape.add(x, tape.add(tape.matmul(att, b.wo), b.bo));
        auto ln2 = tape.add(tape.mul(tape.layer_norm(x, eps), b.ln2_gamma), b.ln2_beta);
        auto inner = tape.glu(tape.add(tape.matmul(ln2, b.ffn_w1), b.ffn_b1));
        x = tape.add(x, tape.add(tape.matmul(inner, b.ffn_w2), b.ffn_b2));
    }

    ForwardResult<S> out;
    out.hidden = x;
    if (!logit_rows.empty()) {
        auto sel = tape.index_rows(x, logit_rows);
        out.token_logits = tape.add(tape.matmul(sel, pv.head_w), pv.head_b);
        out.has_token_logits = true;
    }
    if (want_itm) {
        std::vector<int> cls_rows(static_cast<size_t>(batch));
        for (int b2 = 0; b2 < batch; ++b2) {
            cls_rows[static_cast<size_t>(b2)] = b2 * seq;
        }
        auto cls = tape.index_rows(x, cls_rows);
        out.itm_logits = tape.add(tape.matmul(cls, pv.itm_w), pv.itm_b);
        out.has_itm = true;
    }
    return out;
}

// Mean negative log-likelihood of the original ids at the masked positions.
template <class S>
typename Tape<S>::Var milm_loss(Tape<S>& tape, const ForwardResult<S>& fr,
                                const std::vector<int>& target_ids) {
    FG_CHECK(fr.has_token_logits, "milm_loss requires token logits");
    FG_CHECK(!target_ids.empty(), "milm_loss over an empty mask set");
    return tape.cross_entropy(fr.token_logits, target_ids);
}

template <class S>
typename Tape<S>::Var itm_loss(Tape<S>& tape, const ForwardResult<S>& fr,
                               const std::vector<int>& match_labels) {
    FG_CHECK(fr.has_itm, "itm_loss requires ITM logits");
    for (int q : match_labels) {
        FG_CHECK(q == 0 || q == 1, "match label must be 0 or 1");
    }
    return tape.cross_entropy(fr.itm_logits, match_labels);
}

// Mean log p(q=1): itm_loss with all-ones labels, negated.
template <class S>
typename Tape<S>::Var itm_log_likelihood_matched(Tape<S>& tape, const ForwardResult<S>& fr) {
    FG_CHECK(fr.has_itm, "itm log-likelihood requires ITM logits");
    const int batch = tape.value(fr.itm_logits).dim(0);
    std::vector<int> ones(static_cast<size_t>(batch), 1);
    return tape.scale(tape.cross_entropy(fr.itm_logits, ones), S(-1));
}

} // namespace facegen
