#include "facegen/corpus.hpp"

#include "facegen/common.hpp"
#include "facegen/util.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace facegen {

using json = nlohmann::json;

std::vector<CorpusRecord> sample_corpus(int count, double rho, uint64_t seed) {
    FG_CHECK(count > 0, "corpus count must be positive");
    FG_CHECK(rho >= 0.0 && rho <= 1.0, "rho must lie in [0,1]");
    std::vector<CorpusRecord> records(static_cast<size_t>(count));
    parallel_for(count, [&](int64_t i) {
        Rng rng = Rng::derive(seed, 0xC0125ull, static_cast<uint64_t>(i));
        CorpusRecord rec;
        rec.spec = random_spec(rng);
        FaceSpec caption_spec = rec.spec;
        if (!rng.next_coin(rho)) {
            caption_spec = random_spec(rng);
        }
        rec.caption = describe(caption_spec, rng.next_u64());
        rec.caption_is_relevant = attributes_equal(caption_spec, rec.spec);
        rec.image = render_sprite(rec.spec, kImageSize);
        records[static_cast<size_t>(i)] = std::move(rec);
    });
    return records;
}

void write_corpus_jsonl(const std::string& path, const std::vector<CorpusRecord>& records) {
    std::string out;
    for (const auto& rec : records) {
        json j;
        j["image"] = base64_encode(rec.image.pixels.data(), rec.image.pixels.size());
        j["caption"] = join_words(rec.caption);
        j["spec"] = json::parse(spec_to_json(rec.spec));
        j["relevant"] = rec.caption_is_relevant;
        out += j.dump();
        out += '\n';
    }
    write_file_text(path, out);
}

std::vector<CorpusRecord> read_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file: " + path);
    }
    std::vector<CorpusRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        json j = json::parse(line);
        CorpusRecord rec;
        auto raw = base64_decode(j.at("image").get<std::string>());
        rec.image.width = kImageSize;
        rec.image.height = kImageSize;
        FG_CHECK(raw.size() == static_cast<size_t>(kImageSize) * kImageSize * 3,
                 "corpus image payload has wrong size");
        rec.image.pixels = std::move(raw);
        rec.caption = split_words(j.at("caption").get<std::string>());
        rec.spec = spec_from_json(j.at("spec").dump());
        rec.caption_is_relevant = j.at("relevant").get<bool>();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace facegen
