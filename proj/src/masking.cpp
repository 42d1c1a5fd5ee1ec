#include "facegen/masking.hpp"

#include "facegen/common.hpp"
#include "facegen/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace facegen {

using json = nlohmann::json;

double budget_schedule(int64_t step, double scale) {
    FG_CHECK(step >= 0, "step must be non-negative");
    double increments = std::floor(static_cast<double>(step) * scale / 20000.0);
    return std::min(0.15 + 0.01 * increments, 0.65);
}

MaskPlan span_mask_image(const TokenSpace& space, double budget, uint64_t seed) {
    FG_CHECK(budget > 0.0 && budget <= 1.0, "span budget must lie in (0,1]");
    const int rows = space.grid_rows, cols = space.grid_cols;
    const int n = rows * cols;
    const int target = std::max<int>(1, static_cast<int>(std::llround(budget * n)));

    Rng rng = Rng::derive(seed, 0x5AA5ull);
    std::vector<char> masked(static_cast<size_t>(n), 0);
    std::vector<char> queued(static_cast<size_t>(n), 0);
    std::vector<int> frontier;

    auto push_neighbors = [&](int cell) {
        int r = cell / cols, c = cell % cols;
        const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (auto& p : nb) {
            if (p[0] < 0 || p[0] >= rows || p[1] < 0 || p[1] >= cols) {
                continue;
            }
            int q = p[0] * cols + p[1];
            if (!masked[q] && !queued[q]) {
                queued[q] = 1;
                frontier.push_back(q);
            }
        }
    };

    int seed_cell = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
    masked[seed_cell] = 1;
    push_neighbors(seed_cell);
    for (int picked = 1; picked < target; ++picked) {
        size_t idx = static_cast<size_t>(rng.next_below(frontier.size()));
        int cell = frontier[idx];
        frontier[idx] = frontier.back();
        frontier.pop_back();
        queued[cell] = 0;
        masked[cell] = 1;
        push_neighbors(cell);
    }

    MaskPlan plan;
    plan.modality = MaskModality::Image;
    plan.grid_rows = rows;
    plan.grid_cols = cols;
    plan.budget_fraction = budget;
    for (int cell = 0; cell < n; ++cell) {
        if (masked[cell]) {
            plan.positions.push_back(space.image_begin() + cell);
        }
    }
    return plan;
}

MaskPlan random_mask_text(const TokenSpace& space, int m, double rate, uint64_t seed) {
    FG_CHECK(rate >= 0.0 && rate <= 1.0, "mask rate must lie in [0,1]");
    FG_CHECK(m >= 0 && m <= space.max_text, "text length out of range");
    int count = static_cast<int>(std::llround(rate * m));
    Rng rng = Rng::derive(seed, 0x7E37ull);
    std::vector<int> idx(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        idx[static_cast<size_t>(i)] = i;
    }
    for (int i = 0; i < count; ++i) {
        int j = i + static_cast<int>(rng.next_below(static_cast<uint64_t>(m - i)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    MaskPlan plan;
    plan.modality = MaskModality::Text;
    plan.budget_fraction = rate;
    plan.positions.assign(idx.begin(), idx.begin() + count);
    for (int& p : plan.positions) {
        p += space.text_begin();
    }
    std::sort(plan.positions.begin(), plan.positions.end());
    return plan;
}

MaskPlan span_mask_text(const TokenSpace& space, int m, double budget, uint64_t seed) {
    FG_CHECK(budget > 0.0 && budget <= 1.0, "span budget must lie in (0,1]");
    FG_CHECK(m >= 0 && m <= space.max_text, "text length out of range");
    int len = static_cast<int>(std::llround(budget * m));
    MaskPlan plan;
    plan.modality = MaskModality::Text;
    plan.budget_fraction = budget;
    if (len <= 0) {
        return plan;
    }
    Rng rng = Rng::derive(seed, 0x59A2ull);
    int start = static_cast<int>(rng.next_below(static_cast<uint64_t>(m - len + 1)));
    for (int i = 0; i < len; ++i) {
        plan.positions.push_back(space.text_begin() + start + i);
    }
    return plan;
}

MaskPlan random_mask_image(const TokenSpace& space, double rate, uint64_t seed) {
    FG_CHECK(rate >= 0.0 && rate <= 1.0, "mask rate must lie in [0,1]");
    const int n = space.image_tokens;
    int count = static_cast<int>(std::llround(rate * n));
    Rng rng = Rng::derive(seed, 0x3D0Cull);
    std::vector<int> idx(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        idx[static_cast<size_t>(i)] = i;
    }
    for (int i = 0; i < count; ++i) {
        int j = i + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - i)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    MaskPlan plan;
    plan.modality = MaskModality::Image;
    plan.grid_rows = space.grid_rows;
    plan.grid_cols = space.grid_cols;
    plan.budget_fraction = rate;
    plan.positions.assign(idx.begin(), idx.begin() + count);
    for (int& p : plan.positions) {
        p += space.image_begin();
    }
    std::sort(plan.positions.begin(), plan.positions.end());
    return plan;
}

void apply_mask(TokenSequence& seq, const MaskPlan& plan, const TokenSpace& space,
                MaskTargets& targets) {
    int lo, hi;
    if (plan.modality == MaskModality::Image) {
        lo = space.image_begin();
        hi = space.image_end();
    } else {
        lo = space.text_begin();
        hi = space.text_begin() + seq.m;
    }
    for (int p : plan.positions) {
        FG_CHECK(p >= lo && p < hi, "mask position outside modality range");
        targets.positions.push_back(p);
        targets.original_ids.push_back(seq.ids[static_cast<size_t>(p)]);
        seq.ids[static_cast<size_t>(p)] = space.mask();
    }
}

std::string mask_plan_to_json(const MaskPlan& plan) {
    json j;
    j["modality"] = plan.modality == MaskModality::Image ? "image" : "text";
    j["positions"] = plan.positions;
    j["grid"] = {plan.grid_rows, plan.grid_cols};
    j["budget"] = plan.budget_fraction;
    return j.dump();
}

MaskPlan mask_plan_from_json(const std::string& text) {
    json j = json::parse(text);
    MaskPlan plan;
    std::string mod = j.at("modality").get<std::string>();
    FG_CHECK(mod == "image" || mod == "text", "mask plan modality must be image or text");
    plan.modality = mod == "image" ? MaskModality::Image : MaskModality::Text;
    plan.positions = j.at("positions").get<std::vector<int>>();
    std::sort(plan.positions.begin(), plan.positions.end());
    if (j.contains("grid")) {
        plan.grid_rows = j.at("grid").at(0).get<int>();
        plan.grid_cols = j.at("grid").at(1).get<int>();
    }
    if (j.contains("budget")) {
        plan.budget_fraction = j.at("budget").get<double>();
    }
    return plan;
}

bool image_plan_connected(const MaskPlan& plan, const TokenSpace& space) {
    if (plan.positions.empty()) {
        return false;
    }
    const int cols = space.grid_cols, rows = space.grid_rows;
    std::vector<char> in_set(static_cast<size_t>(rows * cols), 0);
    for (int p : plan.positions) {
        in_set[static_cast<size_t>(p - space.image_begin())] = 1;
    }
    std::vector<int> stack = {plan.positions.front() - space.image_begin()};
    std::vector<char> seen(static_cast<size_t>(rows * cols), 0);
    seen[static_cast<size_t>(stack.front())] = 1;
    size_t found = 0;
    while (!stack.empty()) {
        int cell = stack.back();
        stack.pop_back();
        ++found;
        int r = cell / cols, c = cell % cols;
        const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (auto& p : nb) {
            if (p[0] < 0 || p[0] >= rows || p[1] < 0 || p[1] >= cols) {
                continue;
            }
            int q = p[0] * cols + p[1];
            if (in_set[q] && !seen[q]) {
                seen[q] = 1;
                stack.push_back(q);
            }
        }
    }
    return found == plan.positions.size();
}

} // namespace facegen
