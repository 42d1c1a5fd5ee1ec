#pragma once

#include "facegen/common.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace facegen {

template <class S>
struct Tensor {
    std::vector<int> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp) : shape(std::move(shp)) {
        data.assign(static_cast<size_t>(numel_of(shape)), S(0));
    }
    Tensor(std::vector<int> shp, std::vector<S> values) : shape(std::move(shp)), data(std::move(values)) {
        FG_CHECK(static_cast<int64_t>(data.size()) == numel_of(shape), "tensor data does not match shape");
    }

    static int64_t numel_of(const std::vector<int>& s) {
        int64_t n = 1;
        for (int d : s) {
            FG_CHECK(d >= 0, "negative dimension");
            n *= d;
        }
        return n;
    }

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<size_t>(i < 0 ? rank() + i : i)]; }

    // Rows when the tensor is viewed as a matrix over its last axis.
    int64_t rows_flat() const {
        FG_CHECK(rank() >= 1, "rank-0 tensor has no row view");
        return numel() / dim(-1);
    }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    bool all_finite() const {
        for (S v : data) {
            if (!std::isfinite(static_cast<double>(v))) {
                return false;
            }
        }
        return true;
    }

    template <class T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.data.resize(data.size());
        for (size_t i = 0; i < data.size(); ++i) {
            out.data[i] = static_cast<T>(data[i]);
        }
        return out;
    }
};

inline bool same_shape(const std::vector<int>& a, const std::vector<int>& b) {
    return a == b;
}

// b broadcastable over a's leading axes: b.shape must be a suffix of a.shape.
inline bool suffix_shape(const std::vector<int>& a, const std::vector<int>& b) {
    if (b.size() > a.size()) {
        return false;
    }
    return std::equal(b.rbegin(), b.rend(), a.rbegin());
}

} // namespace facegen
