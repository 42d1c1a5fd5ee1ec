#pragma once

#include "facegen/tensor.hpp"

#include <cblas.h>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

extern "C" void openblas_set_num_threads(int);

namespace facegen {

namespace detail {

inline void pin_blas_threads() {
    static const bool done = [] {
        openblas_set_num_threads(1);
        return true;
    }();
    (void)done;
}

template <class S>
void gemm(bool trans_a, bool trans_b, int m, int n, int k, S alpha, const S* a, int lda,
          const S* b, int ldb, S beta, S* c, int ldc);

template <>
inline void gemm<float>(bool ta, bool tb, int m, int n, int k, float alpha, const float* a,
                        int lda, const float* b, int ldb, float beta, float* c, int ldc) {
    pin_blas_threads();
    cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, m,
                n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <>
inline void gemm<double>(bool ta, bool tb, int m, int n, int k, double alpha, const double* a,
                         int lda, const double* b, int ldb, double beta, double* c, int ldc) {
    pin_blas_threads();
    cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, m,
                n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

} // namespace detail

// Reverse-mode tape over dense row-major tensors. Single-threaded object;
// independent tapes may run on distinct threads. Nodes are created in
// topological order, so the backward sweep is the reverse creation order and
// touches each node exactly once.
template <class S>
class Tape {
public:
    struct Var {
        int id = -1;
    };

    // When set, every op validates that its output is finite.
    bool check_finite = false;

    Var leaf(Tensor<S> value) {
        return push(std::move(value), nullptr);
    }

    const Tensor<S>& value(Var v) const { return nodes_[index(v)].val; }
    const Tensor<S>& grad(Var v) const {
        FG_CHECK(ran_backward_, "gradients are available only after backward");
        return nodes_[index(v)].grad;
    }

    // ---- primitives ----

    // a [..., K] x b [K, N] -> [..., N]; a is viewed as a matrix over its
    // last axis.
    Var matmul(Var av, Var bv) {
        const Tensor<S>& a = value(av);
        const Tensor<S>& b = value(bv);
        FG_CHECK(b.rank() == 2, "matmul rhs must be rank 2");
        FG_CHECK(a.rank() >= 1 && a.dim(-1) == b.dim(0), "matmul inner dimensions disagree");
        const int m = static_cast<int>(a.rows_flat());
        const int k = b.dim(0);
        const int n = b.dim(1);
        std::vector<int> out_shape = a.shape;
        out_shape.back() = n;
        Tensor<S> out(out_shape);
        detail::gemm<S>(false, false, m, n, k, S(1), a.ptr(), k, b.ptr(), n, S(0), out.ptr(), n);
        return push(std::move(out), [this, av, bv, m, n, k](Node& node) {
            Tensor<S>& da = grad_of(av);
            Tensor<S>& db = grad_of(bv);
            const Tensor<S>& a2 = value(av);
            const Tensor<S>& b2 = value(bv);
            // dA += dC B^T ; dB += A^T dC
            detail::gemm<S>(false, true, m, k, n, S(1), node.grad.ptr(), n, b2.ptr(), n, S(1),
                            da.ptr(), k);
            detail::gemm<S>(true, false, k, n, m, S(1), a2.ptr(), k, node.grad.ptr(), n, S(1),
                            db.ptr(), n);
        });
    }

    // Elementwise sum; b may be a suffix-shape broadcast over a's leading axes.
    Var add(Var av, Var bv) {
        const Tensor<S>& a = value(av);
        const Tensor<S>& b = value(bv);
        FG_CHECK(suffix_shape(a.shape, b.shape), "add shapes incompatible");
        Tensor<S> out = a;
        const int64_t bn = b.numel();
        for (int64_t i = 0; i < out.numel(); ++i) {
            out.data[static_cast<size_t>(i)] += b.data[static_cast<size_t>(i % bn)];
        }
        return push(std::move(out), [this, av, bv, bn](Node& node) {
            Tensor<S>& da = grad_of(av);
            for (int64_t i = 0; i < node.grad.numel(); ++i) {
                da.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)];
            }
            Tensor<S>& db = grad_of(bv);
            if (bn == node.grad.numel()) {
                for (int64_t i = 0; i < bn; ++i) {
                    db.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)];
                }
            } else {
                std::vector<double> acc(static_cast<size_t>(bn), 0.0);
                for (int64_t i = 0; i < node.grad.numel(); ++i) {
                    acc[static_cast<size_t>(i % bn)] +=
                        static_cast<double>(node.grad.data[static_cast<size_t>(i)]);
                }
                for (int64_t i = 0; i < bn; ++i) {
                    db.data[static_cast<size_t>(i)] += static_cast<S>(acc[static_cast<size_t>(i)]);
                }
            }
        });
    }

    // Elementwise product; b may broadcast like add.
    Var mul(Var av, Var bv) {
        const Tensor<S>& a = value(av);
        const Tensor<S>& b = value(bv);
        FG_CHECK(suffix_shape(a.shape, b.shape), "mul shapes incompatible");
        Tensor<S> out = a;
        const int64_t bn = b.numel();
        for (int64_t i = 0; i < out.numel(); ++i) {
            out.data[static_cast<size_t>(i)] *= b.data[static_cast<size_t>(i % bn)];
        }
        return push(std::move(out), [this, av, bv, bn](Node& node) {
            const Tensor<S>& a2 = value(av);
            const Tensor<S>& b2 = value(bv);
            Tensor<S>& da = grad_of(av);
            for (int64_t i = 0; i < node.grad.numel(); ++i) {
                da.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)] *
                                                   b2.data[static_cast<size_t>(i % bn)];
            }
            Tensor<S>& db = grad_of(bv);
            if (bn == node.grad.numel()) {
                for (int64_t i = 0; i < bn; ++i) {
                    db.data[static_cast<size_t>(i)] +=
                        node.grad.data[static_cast<size_t>(i)] * a2.data[static_cast<size_t>(i)];
                }
            } else {
                std::vector<double> acc(static_cast<size_t>(bn), 0.0);
                for (int64_t i = 0; i < node.grad.numel(); ++i) {
                    acc[static_cast<size_t>(i % bn)] +=
                        static_cast<double>(node.grad.data[static_cast<size_t>(i)]) *
                        static_cast<double>(a2.data[static_cast<size_t>(i)]);
                }
                for (int64_t i = 0; i < bn; ++i) {
                    db.data[static_cast<size_t>(i)] += static_cast<S>(acc[static_cast<size_t>(i)]);
                }
            }
        });
    }

    Var scale(Var av, S s) {
        Tensor<S> out = value(av);
        for (auto& v : out.data) {
            v *= s;
        }
        return push(std::move(out), [this, av, s](Node& node) {
            Tensor<S>& da = grad_of(av);
            for (int64_t i = 0; i < node.grad.numel(); ++i) {
                da.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)] * s;
            }
        });
    }

    // Softmax over the last axis, 64-bit accumulation.
    Var softmax(Var av) {
        const Tensor<S>& a = value(av);
        const int c = a.dim(-1);
        const int64_t rows = a.rows_flat();
        Tensor<S> out(a.shape);
        for (int64_t r = 0; r < rows; ++r) {
            const S* x = a.ptr() + r * c;
            S* y = out.ptr() + r * c;
            S mx = x[0];
            for (int i = 1; i < c; ++i) {
                mx = std::max(mx, x[i]);
            }
            double sum = 0.0;
            for (int i = 0; i < c; ++i) {
                double e = std::exp(static_cast<double>(x[i] - mx));
                y[i] = static_cast<S>(e);
                sum += e;
            }
            S inv = static_cast<S>(1.0 / sum);
            for (int i = 0; i < c; ++i) {
                y[i] *= inv;
            }
        }
        return push(std::move(out), [this, av, c](Node& node) {
            const Tensor<S>& y = node.val;
            Tensor<S>& da = grad_of(av);
            const int64_t rows = y.rows_flat();
            for (int64_t r = 0; r < rows; ++r) {
                const S* yp = y.ptr() + r * c;
                const S* gp = node.grad.ptr() + r * c;
                S* dp = da.ptr() + r * c;
                double dot = 0.0;
                for (int i = 0; i < c; ++i) {
                    dot += static_cast<double>(gp[i]) * static_cast<double>(yp[i]);
                }
                for (int i = 0; i < c; ++i) {
                    dp[i] += yp[i] * (gp[i] - static_cast<S>(dot));
                }
            }
        });
    }

    // Mean/variance normalization over the last axis (no affine part).
    Var layer_norm(Var av, S eps) {
        const Tensor<S>& a = value(av);
        const int c = a.dim(-1);
        const int64_t rows = a.rows_flat();
        Tensor<S> out(a.shape);
        Tensor<S> inv_std({static_cast<int>(rows)});
        for (int64_t r = 0; r < rows; ++r) {
            const S* x = a.ptr() + r * c;
            S* y = out.ptr() + r * c;
            double mean = 0.0;
            for (int i = 0; i < c; ++i) {
                mean += static_cast<double>(x[i]);
            }
            mean /= c;
            double var = 0.0;
            for (int i = 0; i < c; ++i) {
                double d = static_cast<double>(x[i]) - mean;
                var += d * d;
            }
            var /= c;
            double is = 1.0 / std::sqrt(var + static_cast<double>(eps));
            inv_std.data[static_cast<size_t>(r)] = static_cast<S>(is);
            for (int i = 0; i < c; ++i) {
                y[i] = static_cast<S>((static_cast<double>(x[i]) - mean) * is);
            }
        }
        auto saved = std::make_shared<Tensor<S>>(std::move(inv_std));
        return push(std::move(out), [this, av, c, saved](Node& node) {
            const Tensor<S>& y = node.val;
            Tensor<S>& da = grad_of(av);
            const int64_t rows = y.rows_flat();
            for (int64_t r = 0; r < rows; ++r) {
                const S* yp = y.ptr() + r * c;
                const S* gp = node.grad.ptr() + r * c;
                S* dp = da.ptr() + r * c;
                double g_mean = 0.0, gy_mean = 0.0;
                for (int i = 0; i < c; ++i) {
                    g_mean += static_cast<double>(gp[i]);
                    gy_mean += static_cast<double>(gp[i]) * static_cast<double>(yp[i]);
                }
                g_mean /= c;
                gy_mean /= c;
                double is = static_cast<double>(saved->data[static_cast<size_t>(r)]);
                for (int i = 0; i < c; ++i) {
                    double v = (static_cast<double>(gp[i]) - g_mean -
                                static_cast<double>(yp[i]) * gy_mean) * is;
                    dp[i] += static_cast<S>(v);
                }
            }
        });
    }

    // Gated linear unit over the last axis: [a; b] -> a * sigmoid(b).
    Var glu(Var av) {
        const Tensor<S>& x = value(av);
        const int c2 = x.dim(-1);
        FG_CHECK(c2 % 2 == 0, "glu input's last axis must be even");
        const int c = c2 / 2;
        const int64_t rows = x.rows_flat();
        std::vector<int> out_shape = x.shape;
        out_shape.back() = c;
        Tensor<S> out(out_shape);
        Tensor<S> sig(out_shape);
        for (int64_t r = 0; r < rows; ++r) {
            const S* xa = x.ptr() + r * c2;
            const S* xb = xa + c;
            S* y = out.ptr() + r * c;
            S* sg = sig.ptr() + r * c;
            for (int i = 0; i < c; ++i) {
                S s = static_cast<S>(1.0 / (1.0 + std::exp(-static_cast<double>(xb[i]))));
                sg[i] = s;
                y[i] = xa[i] * s;
            }
        }
        auto saved = std::make_shared<Tensor<S>>(std::move(sig));
        return push(std::move(out), [this, av, c, c2, saved](Node& node) {
            const Tensor<S>& x2 = value(av);
            Tensor<S>& dx = grad_of(av);
            const int64_t rows = x2.rows_flat();
            for (int64_t r = 0; r < rows; ++r) {
                const S* xa = x2.ptr() + r * c2;
                const S* sg = saved->ptr() + r * c;
                const S* gp = node.grad.ptr() + r * c;
                S* dxa = dx.ptr() + r * c2;
                S* dxb = dxa + c;
                for (int i = 0; i < c; ++i) {
                    dxa[i] += gp[i] * sg[i];
                    dxb[i] += gp[i] * xa[i] * sg[i] * (S(1) - sg[i]);
                }
            }
        });
    }

    Var embedding_lookup(Var table_v, std::vector<int> ids) {
        const Tensor<S>& table = value(table_v);
        FG_CHECK(table.rank() == 2, "embedding table must be rank 2");
        const int d = table.dim(1);
        const int v = table.dim(0);
        Tensor<S> out({static_cast<int>(ids.size()), d});
        for (size_t i = 0; i < ids.size(); ++i) {
            FG_CHECK(ids[i] >= 0 && ids[i] < v, "embedding id out of range");
            std::copy_n(table.ptr() + static_cast<int64_t>(ids[i]) * d, d,
                        out.ptr() + static_cast<int64_t>(i) * d);
        }
        auto ids_ptr = std::make_shared<std::vector<int>>(std::move(ids));
        return push(std::move(out), [this, table_v, d, ids_ptr](Node& node) {
            Tensor<S>& dt = grad_of(table_v);
            for (size_t i = 0; i < ids_ptr->size(); ++i) {
                const S* g = node.grad.ptr() + static_cast<int64_t>(i) * d;
                S* row = dt.ptr() + static_cast<int64_t>((*ids_ptr)[i]) * d;
                for (int j = 0; j < d; ++j) {
                    row[j] += g[j];
                }
            }
        });
    }

    // Gather rows of a matrix (the model uses it for [CLS] and mask slots).
    Var index_rows(Var xv, std::vector<int> rows) {
        const Tensor<S>& x = value(xv);
        FG_CHECK(x.rank() == 2, "index_rows input must be rank 2");
        const int d = x.dim(1);
        const int n = x.dim(0);
        Tensor<S> out({static_cast<int>(rows.size()), d});
        for (size_t i = 0; i < rows.size(); ++i) {
            FG_CHECK(rows[i] >= 0 && rows[i] < n, "row index out of range");
            std::copy_n(x.ptr() + static_cast<int64_t>(rows[i]) * d, d,
                        out.ptr() + static_cast<int64_t>(i) * d);
        }
        auto rows_ptr = std::make_shared<std::vector<int>>(std::move(rows));
        return push(std::move(out), [this, xv, d, rows_ptr](Node& node) {
            Tensor<S>& dx = grad_of(xv);
            for (size_t i = 0; i < rows_ptr->size(); ++i) {
                const S* g = node.grad.ptr() + static_cast<int64_t>(i) * d;
                S* row = dx.ptr() + static_cast<int64_t>((*rows_ptr)[i]) * d;
                for (int j = 0; j < d; ++j) {
                    row[j] += g[j];
                }
            }
        });
    }

    Var reshape(Var av, std::vector<int> shape) {
        const Tensor<S>& a = value(av);
        FG_CHECK(Tensor<S>::numel_of(shape) == a.numel(), "reshape must preserve element count");
        Tensor<S> out(shape, a.data);
        return push(std::move(out), [this, av](Node& node) {
            Tensor<S>& da = grad_of(av);
            for (int64_t i = 0; i < node.grad.numel(); ++i) {
                da.data[static_cast<size_t>(i)] += node.grad.data[static_cast<size_t>(i)];
            }
        });
    }

    Var transpose2d(Var av) {
        const Tensor<S>& a = value(av);
        FG_CHECK(a.rank() == 2, "transpose2d input must be rank 2");
        const int m = a.dim(0), n = a.dim(1);
        Tensor<S> out({n, m});
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) {
                out.data[static_cast<size_t>(j) * m + i] = a.data[static_cast<size_t>(i) * n + j];
            }
        }
        return push(std::move(out), [this, av, m, n](Node& node) {
            Tensor<S>& da = grad_of(av);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) {
                    da.data[static_cast<size_t>(i) * n + j] +=
                        node.grad.data[static_cast<size_t>(j) * m + i];
                }
            }
        });
    }

    // Multi-head scaled dot-product attention over a [B*T, D] input with an
    // additive pad mask: key columns where mask[b, t] == 0 contribute -1e30
    // to every row's score.
    Var scaled_dot_product_attention(Var qv, Var kv, Var vv, const Tensor<S>& pad, int heads,
                                     int batch, int seq) {
        const Tensor<S>& q = value(qv);
        FG_CHECK(q.rank() == 2 && q.dim(0) == batch * seq, "attention expects [B*T, D] inputs");
        FG_CHECK(same_shape(q.shape, value(kv).shape) && same_shape(q.shape, value(vv).shape),
                 "attention inputs must share a shape");
        const int d = q.dim(1);
        FG_CHECK(d % heads == 0, "model width must divide evenly into heads");
        FG_CHECK(pad.numel() == static_cast<int64_t>(batch) * seq, "pad mask must be [B, T]");
        const int hd = d / heads;
        const S att_scale = static_cast<S>(1.0 / std::sqrt(static_cast<double>(hd)));

        Tensor<S> out({batch * seq, d});
        auto probs = std::make_shared<Tensor<S>>(
            Tensor<S>({batch, heads, seq, seq}));
        const Tensor<S>& kt = value(kv);
        const Tensor<S>& vt = value(vv);
        for (int b = 0; b < batch; ++b) {
            const S* mask_row = pad.ptr() + static_cast<int64_t>(b) * seq;
            for (int h = 0; h < heads; ++h) {
                const S* qp = q.ptr() + static_cast<int64_t>(b) * seq * d + h * hd;
                const S* kp = kt.ptr() + static_cast<int64_t>(b) * seq * d + h * hd;
                const S* vp = vt.ptr() + static_cast<int64_t>(b) * seq * d + h * hd;
                S* pp = probs->ptr() + (static_cast<int64_t>(b) * heads + h) * seq * seq;
                detail::gemm<S>(false, true, seq, seq, hd, att_scale, qp, d, kp, d, S(0), pp, seq);
                for (int i = 0; i < seq; ++i) {
                    S* row = pp + static_cast<int64_t>(i) * seq;
                    S mx = -std::numeric_limits<S>::infinity();
                    for (int j = 0; j < seq; ++j) {
                        if (mask_row[j] == S(0)) {
                            row[j] = S(-1e30);
                        }
                        mx = std::max(mx, row[j]);
                    }
                    double sum = 0.0;
                    for (int j = 0; j < seq; ++j) {
                        double e = std::exp(static_cast<double>(row[j] - mx));
                        row[j] = static_cast<S>(e);
                        sum += e;
                    }
                    S inv = static_cast<S>(1.0 / sum);
                    for (int j = 0; j < seq; ++j) {
                        row[j] *= inv;
                    }
                }
                S* op = out.ptr() + static_cast<int64_t>(b) * seq * d + h * hd;
                detail::gemm<S>(false, false, seq, hd, seq, S(1), pp, seq, vp, d, S(0), op, d);
            }
        }
        return push(std::move(out),
                    [this, qv, kv, vv, probs, heads, batch, seq, d, hd, att_scale](Node& node) {
            const Tensor<S>& q2 = value(qv);
            const Tensor<S>& k2 = value(kv);
            const Tensor<S>& v2 = value(vv);
            Tensor<S>& dq = grad_of(qv);
            Tensor<S>& dk = grad_of(kv);
            Tensor<S>& dv = grad_of(vv);
            std::vector<S> dp(static_cast<size_t>(seq) * seq);
            for (int b = 0; b < batch; ++b) {
                for (int h = 0; h < heads; ++h) {
                    const int64_t off = static_cast<int64_t>(b) * seq * d + h * hd;
                    const S* pp = probs->ptr() + (static_cast<int64_t>(b) * heads + h) * seq * seq;
                    const S* go = node.grad.ptr() + off;
                    // dV += P^T dO
                    detail::gemm<S>(true, false, seq, hd, seq, S(1), pp, seq, go, d, S(1),
                                    dv.ptr() + off, d);
                    // dP = dO V^T
                    detail::gemm<S>(false, true, seq, seq, hd, S(1), go, d, v2.ptr() + off, d,
                                    S(0), dp.data(), seq);
                    // dS = P * (dP - rowsum(dP * P))
                    for (int i = 0; i < seq; ++i) {
                        const S* pr = pp + static_cast<int64_t>(i) * seq;
                        S* dr = dp.data() + static_cast<int64_t>(i) * seq;
                        double dot = 0.0;
                        for (int j = 0; j < seq; ++j) {
                            dot += static_cast<double>(dr[j]) * static_cast<double>(pr[j]);
                        }
                        for (int j = 0; j < seq; ++j) {
                            dr[j] = pr[j] * (dr[j] - static_cast<S>(dot));
                        }
                    }
                    // dQ += scale * dS K ; dK += scale * dS^T Q
                    detail::gemm<S>(false, false, seq, hd, seq, att_scale, dp.data(), seq,
                                    k2.ptr() + off, d, S(1), dq.ptr() + off, d);
                    detail::gemm<S>(true, false, seq, hd, seq, att_scale, dp.data(), seq,
                                    q2.ptr() + off, d, S(1), dk.ptr() + off, d);
                }
            }
        });
    }

    // Mean negative log-likelihood over the selected rows of [N, C] logits.
    // An empty selector means every row counts; passing an explicit empty
    // mask of selected rows is a contract violation.
    Var cross_entropy(Var logits_v, std::vector<int> targets, std::vector<char> row_mask = {}) {
        const Tensor<S>& logits = value(logits_v);
        FG_CHECK(logits.rank() == 2, "cross_entropy logits must be [N, C]");
        const int n = logits.dim(0);
        const int c = logits.dim(1);
        FG_CHECK(static_cast<int>(targets.size()) == n, "cross_entropy needs one target per row");
        if (row_mask.empty()) {
            row_mask.assign(static_cast<size_t>(n), 1);
        }
        FG_CHECK(static_cast<int>(row_mask.size()) == n, "row mask length mismatch");
        int64_t count = 0;
        for (char m : row_mask) {
            count += m ? 1 : 0;
        }
        FG_CHECK(count > 0, "cross_entropy over an empty position set");
        double loss = 0.0;
        auto lse = std::make_shared<Tensor<S>>(Tensor<S>({n}));
        for (int r = 0; r < n; ++r) {
            if (!row_mask[static_cast<size_t>(r)]) {
                continue;
            }
            FG_CHECK(targets[static_cast<size_t>(r)] >= 0 && targets[static_cast<size_t>(r)] < c,
                     "cross_entropy target out of range");
            const S* x = logits.ptr() + static_cast<int64_t>(r) * c;
            S mx = x[0];
            for (int i = 1; i < c; ++i) {
                mx = std::max(mx, x[i]);
            }
            double sum = 0.0;
            for (int i = 0; i < c; ++i) {
                sum += std::exp(static_cast<double>(x[i] - mx));
            }
            double l = static_cast<double>(mx) + std::log(sum);
            lse->data[static_cast<size_t>(r)] = static_cast<S>(l);
            loss += l - static_cast<double>(x[targets[static_cast<size_t>(r)]]);
        }
        Tensor<S> out({1});
        out.data[0] = static_cast<S>(loss / static_cast<double>(count));
        auto tg = std::make_shared<std::vector<int>>(std::move(targets));
        auto rm = std::make_shared<std::vector<char>>(std::move(row_mask));
        return push(std::move(out), [this, logits_v, tg, rm, lse, n, c, count](Node& node) {
            const Tensor<S>& logits2 = value(logits_v);
            Tensor<S>& dl = grad_of(logits_v);
            const S g = node.grad.data[0] / static_cast<S>(count);
            for (int r = 0; r < n; ++r) {
                if (!(*rm)[static_cast<size_t>(r)]) {
                    continue;
                }
                const S* x = logits2.ptr() + static_cast<int64_t>(r) * c;
                S* d = dl.ptr() + static_cast<int64_t>(r) * c;
                const double l = static_cast<double>(lse->data[static_cast<size_t>(r)]);
                for (int i = 0; i < c; ++i) {
                    double p = std::exp(static_cast<double>(x[i]) - l);
                    d[i] += g * static_cast<S>(p - ((*tg)[static_cast<size_t>(r)] == i ? 1.0 : 0.0));
                }
            }
        });
    }

    // ---- backward ----

    void backward(Var loss) {
        FG_CHECK(value(loss).numel() == 1, "backward requires a scalar loss");
        FG_CHECK(!ran_backward_, "backward may run once per tape");
        ran_backward_ = true;
        for (auto& n : nodes_) {
            n.grad = Tensor<S>(n.val.shape);
        }
        nodes_[index(loss)].grad.data[0] = S(1);
        for (size_t i = nodes_.size(); i-- > 0;) {
            Node& n = nodes_[i];
            if (n.back) {
                n.back(n);
            }
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor<S> val;
        Tensor<S> grad;
        std::function<void(Node&)> back;
    };

    std::vector<Node> nodes_;
    bool ran_backward_ = false;

    size_t index(Var v) const {
        FG_CHECK(v.id >= 0 && v.id < static_cast<int>(nodes_.size()), "invalid tape variable");
        return static_cast<size_t>(v.id);
    }

    Tensor<S>& grad_of(Var v) { return nodes_[index(v)].grad; }

    Var push(Tensor<S> val, std::function<void(Node&)> back) {
        if (check_finite) {
            FG_CHECK(val.all_finite(), "non-finite value produced by a tape op");
        }
        Node n;
        n.val = std::move(val);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }
};

} // namespace facegen
