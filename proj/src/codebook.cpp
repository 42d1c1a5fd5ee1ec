#include "facegen/codebook.hpp"

#include "facegen/common.hpp"
#include "facegen/rng.hpp"
#include "facegen/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

namespace facegen {

namespace {

struct PatchSet {
    int dim = 0;
    std::vector<float> points;  // distinct patches, row-major
    std::vector<double> weight; // multiplicity

    int count() const { return static_cast<int>(weight.size()); }
    const float* point(int i) const { return points.data() + static_cast<size_t>(i) * dim; }
};

// Distinct patches in first-occurrence order, with multiplicities.
PatchSet collect_patches(const std::vector<SpriteImage>& images, int patch_size) {
    PatchSet set;
    set.dim = patch_size * patch_size * 3;
    std::unordered_map<std::string, int> index;
    std::string key(static_cast<size_t>(set.dim), '\0');
    for (const auto& img : images) {
        FG_CHECK(img.width % patch_size == 0 && img.height % patch_size == 0,
                 "image dimensions not divisible by patch size");
        int rows = img.height / patch_size;
        int cols = img.width / patch_size;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                size_t o = 0;
                for (int y = 0; y < patch_size; ++y) {
                    const uint8_t* p = img.at(c * patch_size, r * patch_size + y);
                    std::memcpy(&key[o], p, static_cast<size_t>(patch_size) * 3);
                    o += static_cast<size_t>(patch_size) * 3;
                }
                auto [it, inserted] = index.try_emplace(key, set.count());
                if (inserted) {
                    for (int d = 0; d < set.dim; ++d) {
                        set.points.push_back(static_cast<float>(static_cast<uint8_t>(key[d])));
                    }
                    set.weight.push_back(1.0);
                } else {
                    set.weight[static_cast<size_t>(it->second)] += 1.0;
                }
            }
        }
    }
    return set;
}

double dist2(const float* a, const float* b, int dim) {
    double d = 0.0;
    for (int i = 0; i < dim; ++i) {
        double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        d += diff * diff;
    }
    return d;
}

int weighted_pick(const std::vector<double>& w, Rng& rng) {
    double total = 0.0;
    for (double v : w) {
        total += v;
    }
    double r = rng.next_unit() * total;
    double cum = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
        cum += w[i];
        if (r < cum) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(w.size()) - 1;
}

} // namespace

int count_distinct_patches(const std::vector<SpriteImage>& images, int patch_size) {
    return collect_patches(images, patch_size).count();
}

Codebook fit_codebook(const std::vector<SpriteImage>& images, int K, int patch_size,
                      int iterations, uint64_t seed) {
    FG_CHECK(K > 0 && patch_size > 0 && iterations > 0, "invalid codebook parameters");
    PatchSet set = collect_patches(images, patch_size);
    const int n = set.count();
    const int dim = set.dim;
    FG_CHECK(n >= K, "corpus has fewer distinct patches than codebook size");

    Rng rng = Rng::derive(seed, 0xC0DEB00Cull);
    std::vector<float> centroids(static_cast<size_t>(K) * dim);
    auto centroid = [&](int k) { return centroids.data() + static_cast<size_t>(k) * dim; };

    // k-means++ over the weighted distinct points
    std::vector<double> min_d(static_cast<size_t>(n), 0.0);
    {
        int first = weighted_pick(set.weight, rng);
        std::memcpy(centroid(0), set.point(first), sizeof(float) * dim);
        for (int i = 0; i < n; ++i) {
            min_d[i] = dist2(set.point(i), centroid(0), dim);
        }
        std::vector<double> probs(static_cast<size_t>(n));
        for (int k = 1; k < K; ++k) {
            for (int i = 0; i < n; ++i) {
                probs[i] = min_d[i] * set.weight[i];
            }
            int pick = weighted_pick(probs, rng);
            std::memcpy(centroid(k), set.point(pick), sizeof(float) * dim);
            for (int i = 0; i < n; ++i) {
                min_d[i] = std::min(min_d[i], dist2(set.point(i), centroid(k), dim));
            }
        }
    }

    std::vector<int> assign(static_cast<size_t>(n), 0);
    std::vector<double> cluster_w(static_cast<size_t>(K));
    std::vector<double> sums(static_cast<size_t>(K) * dim);
    std::vector<double> point_d(static_cast<size_t>(n));

    for (int iter = 0; iter < iterations; ++iter) {
        bool changed = false;
        parallel_for(n, [&](int64_t i) {
            double best = std::numeric_limits<double>::max();
            int best_k = 0;
            for (int k = 0; k < K; ++k) {
                double d = dist2(set.point(i), centroid(k), dim);
                if (d < best) {
                    best = d;
                    best_k = k;
                }
            }
            point_d[i] = best;
            if (assign[i] != best_k) {
                assign[i] = best_k;
            }
        });

        std::fill(cluster_w.begin(), cluster_w.end(), 0.0);
        std::fill(sums.begin(), sums.end(), 0.0);
        for (int i = 0; i < n; ++i) { // serial, fixed accumulation order
            int k = assign[i];
            cluster_w[k] += set.weight[i];
            double* s = sums.data() + static_cast<size_t>(k) * dim;
            const float* p = set.point(i);
            for (int d = 0; d < dim; ++d) {
                s[d] += set.weight[i] * p[d];
            }
        }

        for (int k = 0; k < K; ++k) {
            if (cluster_w[k] > 0.0) {
                const double* s = sums.data() + static_cast<size_t>(k) * dim;
                float* c = centroid(k);
                for (int d = 0; d < dim; ++d) {
                    float v = static_cast<float>(s[d] / cluster_w[k]);
                    if (c[d] != v) {
                        changed = true;
                    }
                    c[d] = v;
                }
            } else {
                // empty cluster: re-seed from the farthest patch
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    if (point_d[i] > far_d) {
                        far_d = point_d[i];
                        far = i;
                    }
                }
                std::memcpy(centroid(k), set.point(far), sizeof(float) * dim);
                point_d[far] = 0.0;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
    }

    // Snap centroids to the pixel grid; byte-exact decode and a unique
    // nearest centroid for every code vector.
    for (auto& v : centroids) {
        v = static_cast<float>(std::clamp(static_cast<int>(std::lround(v)), 0, 255));
    }
    {
        std::unordered_map<std::string, int> seen;
        auto key_of = [&](int k) {
            return std::string(reinterpret_cast<const char*>(centroid(k)), sizeof(float) * dim);
        };
        std::vector<char> is_centroid_value(static_cast<size_t>(n), 0);
        for (int k = 0; k < K; ++k) {
            seen.emplace(key_of(k), k);
        }
        for (int k = 0; k < K; ++k) {
            if (seen[key_of(k)] == k) {
                continue;
            }
            // duplicate after snapping: take the farthest patch whose value
            // is not already a centroid
            int far = -1;
            double far_d = -1.0;
            for (int i = 0; i < n; ++i) {
                if (is_centroid_value[i]) {
                    continue;
                }
                std::string pk(reinterpret_cast<const char*>(set.point(i)), sizeof(float) * dim);
                if (seen.count(pk)) {
                    is_centroid_value[i] = 1;
                    continue;
                }
                if (point_d[i] > far_d) {
                    far_d = point_d[i];
                    far = i;
                }
            }
            FG_CHECK(far >= 0, "cannot resolve duplicate centroids");
            std::memcpy(centroid(k), set.point(far), sizeof(float) * dim);
            seen.emplace(key_of(k), k);
        }
    }

    Codebook cb;
    cb.K = K;
    cb.patch_size = patch_size;
    cb.vectors = std::move(centroids);
    return cb;
}

EncodedImage encode_image(const SpriteImage& img, const Codebook& cb) {
    FG_CHECK(img.width % cb.patch_size == 0 && img.height % cb.patch_size == 0,
             "image dimensions not divisible by patch size");
    const int dim = cb.dim();
    EncodedImage out;
    out.rows = img.height / cb.patch_size;
    out.cols = img.width / cb.patch_size;
    out.tokens.resize(static_cast<size_t>(out.rows) * out.cols);
    std::vector<float> patch(static_cast<size_t>(dim));
    for (int r = 0; r < out.rows; ++r) {
        for (int c = 0; c < out.cols; ++c) {
            int o = 0;
            for (int y = 0; y < cb.patch_size; ++y) {
                const uint8_t* p = img.at(c * cb.patch_size, r * cb.patch_size + y);
                for (int i = 0; i < cb.patch_size * 3; ++i) {
                    patch[o++] = static_cast<float>(p[i]);
                }
            }
            double best = std::numeric_limits<double>::max();
            int best_k = 0;
            for (int k = 0; k < cb.K; ++k) {
                const float* v = cb.vec(k);
                double d = 0.0;
                for (int i = 0; i < dim; ++i) {
                    double diff = static_cast<double>(patch[i]) - static_cast<double>(v[i]);
                    d += diff * diff;
                }
                if (d < best) {
                    best = d;
                    best_k = k;
                }
            }
            out.tokens[static_cast<size_t>(r) * out.cols + c] = best_k;
        }
    }
    return out;
}

SpriteImage decode_tokens(const std::vector<int>& tokens, int rows, int cols, const Codebook& cb) {
    FG_CHECK(static_cast<int>(tokens.size()) == rows * cols, "token count does not match grid");
    SpriteImage img;
    img.width = cols * cb.patch_size;
    img.height = rows * cb.patch_size;
    img.pixels.assign(static_cast<size_t>(img.width) * img.height * 3, 0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            int t = tokens[static_cast<size_t>(r) * cols + c];
            FG_CHECK(t >= 0 && t < cb.K, "token id outside codebook range");
            const float* v = cb.vec(t);
            int o = 0;
            for (int y = 0; y < cb.patch_size; ++y) {
                uint8_t* p = img.at(c * cb.patch_size, r * cb.patch_size + y);
                for (int i = 0; i < cb.patch_size * 3; ++i) {
                    p[i] = static_cast<uint8_t>(
                        std::clamp(static_cast<int>(std::lround(v[o++])), 0, 255));
                }
            }
        }
    }
    return img;
}

static const char kCodebookMagic[4] = {'F', 'G', 'C', 'B'};

void write_codebook(const std::string& path, const Codebook& cb) {
    std::vector<uint8_t> bytes;
    bytes.insert(bytes.end(), kCodebookMagic, kCodebookMagic + 4);
    auto put_u32 = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            bytes.push_back(static_cast<uint8_t>(v >> (8 * i)));
        }
    };
    put_u32(static_cast<uint32_t>(cb.K));
    put_u32(static_cast<uint32_t>(cb.patch_size));
    size_t data_off = bytes.size();
    bytes.resize(data_off + cb.vectors.size() * sizeof(float));
    std::memcpy(bytes.data() + data_off, cb.vectors.data(), cb.vectors.size() * sizeof(float));
    write_file_atomic(path, bytes.data(), bytes.size());
}

Codebook read_codebook(const std::string& path) {
    auto bytes = read_file_bytes(path);
    FG_CHECK(bytes.size() >= 12 && std::memcmp(bytes.data(), kCodebookMagic, 4) == 0,
             "not a codebook file: " + path);
    auto get_u32 = [&](size_t off) {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<uint32_t>(bytes[off + i]) << (8 * i);
        }
        return v;
    };
    Codebook cb;
    cb.K = static_cast<int>(get_u32(4));
    cb.patch_size = static_cast<int>(get_u32(8));
    size_t count = static_cast<size_t>(cb.K) * cb.dim();
    FG_CHECK(bytes.size() == 12 + count * sizeof(float), "codebook payload size mismatch");
    cb.vectors.resize(count);
    std::memcpy(cb.vectors.data(), bytes.data() + 12, count * sizeof(float));
    return cb;
}

} // namespace facegen
