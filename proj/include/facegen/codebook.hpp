#pragma once

#include "facegen/sprite.hpp"

#include <string>
#include <vector>

namespace facegen {

struct Codebook {
    int K = 0;
    int patch_size = 0;
    // K rows of patch_size*patch_size*3 floats.
    std::vector<float> vectors;

    int dim() const { return patch_size * patch_size * 3; }
    const float* vec(int k) const { return vectors.data() + static_cast<size_t>(k) * dim(); }
};

struct EncodedImage {
    std::vector<int> tokens;
    int rows = 0;
    int cols = 0;
};

// K-means over the distinct patches of the corpus (k-means++ init, empty
// clusters re-seeded from the farthest patch). Centroids are snapped to the
// 8-bit pixel grid at the end so decode is byte-exact and re-encoding a
// decoded image is a fixed point. Deterministic given seed; throws if the
// corpus has fewer than K distinct patches.
Codebook fit_codebook(const std::vector<SpriteImage>& images, int K, int patch_size,
                      int iterations, uint64_t seed);

// Nearest code vector per patch (squared Euclidean, ties to the lowest id).
EncodedImage encode_image(const SpriteImage& img, const Codebook& cb);

SpriteImage decode_tokens(const std::vector<int>& tokens, int rows, int cols, const Codebook& cb);

void write_codebook(const std::string& path, const Codebook& cb);
Codebook read_codebook(const std::string& path);

// Distinct patch count of an image set (fit_codebook's precondition).
int count_distinct_patches(const std::vector<SpriteImage>& images, int patch_size);

} // namespace facegen
