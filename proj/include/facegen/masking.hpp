#pragma once

#include "facegen/tokens.hpp"

#include <string>
#include <vector>

namespace facegen {

enum class MaskModality { Image, Text };

struct MaskPlan {
    MaskModality modality = MaskModality::Image;
    std::vector<int> positions; // sorted sequence indices
    int grid_rows = 0;          // image plans only
    int grid_cols = 0;
    double budget_fraction = 0.0;
};

// 0.15 at step 0, +0.01 per 20000/scale steps, clamped at 0.65.
double budget_schedule(int64_t step, double scale = 1.0);

// Connected blob grown from a random seed cell by repeatedly masking a
// uniformly chosen unmasked 4-neighbor of the masked set; exactly
// round(budget*n) cells.
MaskPlan span_mask_image(const TokenSpace& space, double budget, uint64_t seed);

// round(rate*m) distinct uniform positions among the first m text slots.
MaskPlan random_mask_text(const TokenSpace& space, int m, double rate, uint64_t seed);

// One contiguous run of round(budget*m) positions at a uniform valid start.
MaskPlan span_mask_text(const TokenSpace& space, int m, double budget, uint64_t seed);

// Independent uniform image cells, round(rate*n) of them.
MaskPlan random_mask_image(const TokenSpace& space, double rate, uint64_t seed);

struct MaskTargets {
    std::vector<int> positions;
    std::vector<int> original_ids;
};

// Writes [MASK] at plan positions, recording originals. Throws if a position
// lies outside the plan's modality range (specials can never be masked).
void apply_mask(TokenSequence& seq, const MaskPlan& plan, const TokenSpace& space,
                MaskTargets& targets);

std::string mask_plan_to_json(const MaskPlan& plan);
MaskPlan mask_plan_from_json(const std::string& text);

// True if the plan's cells form one 4-connected component on the grid.
bool image_plan_connected(const MaskPlan& plan, const TokenSpace& space);

} // namespace facegen
