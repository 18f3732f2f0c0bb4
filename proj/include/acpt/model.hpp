// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/matrix.hpp"
#include "acpt/rng.hpp"

namespace acpt {

// Encoder hyperparameters. The defaults are the production configuration:
// 4 post-norm single-head encoder layers over 257x44 (1 CLS + 256 ticks),
// feed-forward width 176, classifier head 44 -> 128 -> 1.
struct ModelConfig {
    int d_model = 44;
    int ff_dim = 176;
    int n_layers = 4;
    int window_rows = 256;
    int head_hidden = 128;
    double pe_scale = 0.1;
    double ln_eps = 1e-5;
    double dropout = 0.0;

    int seq_len() const { return window_rows + 1; } // CLS prepended

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// ---------------------------------------------------------------------------
// Positional encoding
// ---------------------------------------------------------------------------

// Sinusoidal table rescaled into [0, pe_scale]: the raw sin/cos values lie in
// [-1, 1], and the inputs they are added to are unit-interval, so the table
// is remapped as (raw + 1) / 2 * pe_scale.
template <typename T>
Mat<T> positional_encoding(int seq_len, int d_model, double scale) {
    if (d_model < 2) throw ValidationError("positional_encoding: d_model must be >= 2");
    Mat<T> out(static_cast<std::size_t>(seq_len), static_cast<std::size_t>(d_model));
    for (int pos = 0; pos < seq_len; ++pos) {
        for (int j = 0; j < d_model; ++j) {
            const int two_i = (j % 2 == 0) ? j : j - 1;
            const double angle =
                static_cast<double>(pos) /
                std::pow(10000.0, static_cast<double>(two_i) / static_cast<double>(d_model));
            const double raw = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
            out[static_cast<std::size_t>(pos)][static_cast<std::size_t>(j)] =
                static_cast<T>((raw + 1.0) / 2.0 * scale);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

template <typename T>
struct EncoderLayerParams {
    Mat<T> wq, bq, wk, bk, wv, bv, wo, bo; // d x d projections, 1 x d biases
    Mat<T> ln1_scale, ln1_shift;
    Mat<T> w1, b1, w2, b2;                 // d x ff, ff x d
    Mat<T> ln2_scale, ln2_shift;
};

template <typename T>
struct HeadParams {
    Mat<T> wa, ba; // d x hidden
    Mat<T> wb, bb; // hidden x 1
};

template <typename T>
struct ModelParams {
    ModelConfig cfg;
    Mat<T> cls_token; // 1 x d, learned
    std::vector<EncoderLayerParams<T>> layers;
    HeadParams<T> head;
    Mat<T> pe; // seq_len x d, constant (not a learnable tensor)
};

// Fixed traversal order of the learnable tensors; checkpoints and optimizer
// state are aligned with this order.
template <typename T, typename F>
void for_each_tensor(ModelParams<T>& p, F&& fn) {
    fn("cls_token", p.cls_token);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& L = p.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        fn(pre + "wq", L.wq);
        fn(pre + "bq", L.bq);
        fn(pre + "wk", L.wk);
        fn(pre + "bk", L.bk);
        fn(pre + "wv", L.wv);
        fn(pre + "bv", L.bv);
        fn(pre + "wo", L.wo);
        fn(pre + "bo", L.bo);
        fn(pre + "ln1_scale", L.ln1_scale);
        fn(pre + "ln1_shift", L.ln1_shift);
        fn(pre + "w1", L.w1);
        fn(pre + "b1", L.b1);
        fn(pre + "w2", L.w2);
        fn(pre + "b2", L.b2);
        fn(pre + "ln2_scale", L.ln2_scale);
        fn(pre + "ln2_shift", L.ln2_shift);
    }
    fn("head.wa", p.head.wa);
    fn("head.ba", p.head.ba);
    fn("head.wb", p.head.wb);
    fn("head.bb", p.head.bb);
}

template <typename T, typename F>
void for_each_tensor(const ModelParams<T>& p, F&& fn) {
    for_each_tensor(const_cast<ModelParams<T>&>(p),
                    [&](const std::string& name, Mat<T>& m) { fn(name, static_cast<const Mat<T>&>(m)); });
}

template <typename T>
ModelParams<T> make_empty_params(const ModelConfig& cfg) {
    const auto d = static_cast<std::size_t>(cfg.d_model);
    const auto ff = static_cast<std::size_t>(cfg.ff_dim);
    const auto hid = static_cast<std::size_t>(cfg.head_hidden);
    ModelParams<T> p;
    p.cfg = cfg;
    p.cls_token = Mat<T>(1, d);
    p.layers.resize(static_cast<std::size_t>(cfg.n_layers));
    for (auto& L : p.layers) {
        L.wq = Mat<T>(d, d); L.bq = Mat<T>(1, d);
        L.wk = Mat<T>(d, d); L.bk = Mat<T>(1, d);
        L.wv = Mat<T>(d, d); L.bv = Mat<T>(1, d);
        L.wo = Mat<T>(d, d); L.bo = Mat<T>(1, d);
        L.ln1_scale = Mat<T>(1, d); L.ln1_shift = Mat<T>(1, d);
        L.w1 = Mat<T>(d, ff); L.b1 = Mat<T>(1, ff);
        L.w2 = Mat<T>(ff, d); L.b2 = Mat<T>(1, d);
        L.ln2_scale = Mat<T>(1, d); L.ln2_shift = Mat<T>(1, d);
    }
    p.head.wa = Mat<T>(d, hid);
    p.head.ba = Mat<T>(1, hid);
    p.head.wb = Mat<T>(hid, 1);
    p.head.bb = Mat<T>(1, 1);
    p.pe = positional_encoding<T>(cfg.seq_len(), cfg.d_model, cfg.pe_scale);
    return p;
}

// Glorot-uniform weights, zero biases, unit/zero layer norms, and a small
// Gaussian CLS token. Deterministic in the seed; each tensor draws from its
// own counter stream so the layout of one tensor never shifts another.
template <typename T>
ModelParams<T> init_params(std::uint64_t seed, const ModelConfig& cfg = ModelConfig{}) {
    ModelParams<T> p = make_empty_params<T>(cfg);
    std::uint64_t tensor_idx = 0;
    for_each_tensor(p, [&](const std::string& name, Mat<T>& m) {
        CounterRng rng(CounterRng::derive_key(seed, 0x696e6974ull, tensor_idx++));
        const bool is_bias = m.rows == 1 && name.find("ln") == std::string::npos &&
                             name != "cls_token";
        if (name == "cls_token") {
            for (auto& v : m.a) v = static_cast<T>(rng.gaussian(0.0, 0.02));
        } else if (name.find("ln") != std::string::npos) {
            const T fill = name.find("scale") != std::string::npos ? T(1) : T(0);
            m.fill(fill);
        } else if (is_bias) {
            m.fill(T(0));
        } else {
            const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
            for (auto& v : m.a) v = static_cast<T>(rng.uniform(-limit, limit));
        }
    });
    return p;
}

// ---------------------------------------------------------------------------
// Layer primitives (exposed for isolated gradient checks)
// ---------------------------------------------------------------------------

// Row-wise layer norm with biased variance. Caches the normalized rows and
// per-row 1/std for the backward pass.
template <typename T>
void layer_norm_forward(const Mat<T>& x, const Mat<T>& scale, const Mat<T>& shift, double eps,
                        Mat<T>& y, Mat<T>& xhat, std::vector<T>& inv_std) {
    const std::size_t D = x.cols;
    y = Mat<T>::uninit(x.rows, D);
    xhat = Mat<T>::uninit(x.rows, D);
    inv_std.assign(x.rows, T(0));
    parallel_for(x.rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            const T* xi = x[i];
            double mean = 0.0;
            for (std::size_t j = 0; j < D; ++j) mean += static_cast<double>(xi[j]);
            mean /= static_cast<double>(D);
            double var = 0.0;
            for (std::size_t j = 0; j < D; ++j) {
                const double c = static_cast<double>(xi[j]) - mean;
                var += c * c;
            }
            var /= static_cast<double>(D);
            const double inv = 1.0 / std::sqrt(var + eps);
            inv_std[i] = static_cast<T>(inv);
            T* yi = y[i];
            T* xh = xhat[i];
            const T* sc = scale[0];
            const T* sh = shift[0];
            for (std::size_t j = 0; j < D; ++j) {
                const double h = (static_cast<double>(xi[j]) - mean) * inv;
                xh[j] = static_cast<T>(h);
                yi[j] = static_cast<T>(h * static_cast<double>(sc[j]) + static_cast<double>(sh[j]));
            }
        }
    });
}

template <typename T>
void layer_norm_backward(const Mat<T>& dy, const Mat<T>& xhat, const std::vector<T>& inv_std,
                         const Mat<T>& scale, Mat<T>& dx, Mat<T>& dscale, Mat<T>& dshift) {
    const std::size_t D = dy.cols;
    dx = Mat<T>::uninit(dy.rows, D);
    parallel_for(dy.rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            const T* dyi = dy[i];
            const T* xh = xhat[i];
            const T* sc = scale[0];
            double m1 = 0.0, m2 = 0.0; // mean(dxhat), mean(dxhat * xhat)
            for (std::size_t j = 0; j < D; ++j) {
                const double dxh = static_cast<double>(dyi[j]) * static_cast<double>(sc[j]);
                m1 += dxh;
                m2 += dxh * static_cast<double>(xh[j]);
            }
            m1 /= static_cast<double>(D);
            m2 /= static_cast<double>(D);
            const double inv = static_cast<double>(inv_std[i]);
            T* dxi = dx[i];
            for (std::size_t j = 0; j < D; ++j) {
                const double dxh = static_cast<double>(dyi[j]) * static_cast<double>(sc[j]);
                dxi[j] = static_cast<T>(inv * (dxh - m1 - static_cast<double>(xh[j]) * m2));
            }
        }
    });
    // Parameter gradients: fixed-order row reduction.
    const std::size_t Dc = dy.cols;
    std::vector<double> asc(Dc, 0.0), ash(Dc, 0.0);
    for (std::size_t i = 0; i < dy.rows; ++i) {
        const T* dyi = dy[i];
        const T* xh = xhat[i];
        for (std::size_t j = 0; j < Dc; ++j) {
            asc[j] += static_cast<double>(dyi[j]) * static_cast<double>(xh[j]);
            ash[j] += static_cast<double>(dyi[j]);
        }
    }
    for (std::size_t j = 0; j < Dc; ++j) {
        dscale[0][j] += static_cast<T>(asc[j]);
        dshift[0][j] += static_cast<T>(ash[j]);
    }
}

// Softmax over each row; max-shifted, sums in double.
template <typename T>
void softmax_rows(MutView<T> m) {
    parallel_for(m.rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            T* mi = m[i];
            double mx = -1e300;
            for (std::size_t j = 0; j < m.cols; ++j) mx = std::max(mx, static_cast<double>(mi[j]));
            double sum = 0.0;
            for (std::size_t j = 0; j < m.cols; ++j) {
                const double e =
                    static_cast<double>(exp_unit(static_cast<T>(static_cast<double>(mi[j]) - mx)));
                mi[j] = static_cast<T>(e);
                sum += e;
            }
            const double inv = 1.0 / sum;
            for (std::size_t j = 0; j < m.cols; ++j) {
                mi[j] = static_cast<T>(static_cast<double>(mi[j]) * inv);
            }
        }
    });
}

template <typename T>
void softmax_rows(Mat<T>& m) {
    softmax_rows(MutView<T>(m));
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

template <typename T>
struct LayerCache {
    Mat<T> x_in;        // layer input
    Mat<T> q, k, v;     // projections
    Mat<T> probs;       // attention probabilities, (B*S) x S
    Mat<T> attn;        // probs * V
    Mat<T> drop1, drop2; // dropout masks (empty when dropout == 0)
    Mat<T> xhat1;
    std::vector<T> inv1;
    Mat<T> x1;          // post-LN1
    Mat<T> h;           // feed-forward hidden, post-ReLU
    Mat<T> xhat2;
    std::vector<T> inv2;
};

template <typename T>
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<LayerCache<T>> layers;
    Mat<T> x_final;
    Mat<T> cls;    // B x d
    Mat<T> head_h; // B x hidden, post-ReLU
    // Dropout stream key; only consulted when cfg.dropout > 0.
    std::uint64_t dropout_key = 0;
};

namespace detail {

template <typename T>
void apply_dropout(Mat<T>& m, Mat<T>& mask_out, double rate, std::uint64_t key, std::uint64_t salt) {
    mask_out = Mat<T>(m.rows, m.cols);
    const double keep = 1.0 - rate;
    const double inv_keep = 1.0 / keep;
    parallel_for(m.rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            CounterRng rng(CounterRng::derive_key(key, salt, i));
            T* mi = m[i];
            T* ki = mask_out[i];
            for (std::size_t j = 0; j < m.cols; ++j) {
                const T g = rng.next_double() < keep ? static_cast<T>(inv_keep) : T(0);
                ki[j] = g;
                mi[j] *= g;
            }
        }
    });
}

template <typename T>
void require_finite(const Mat<T>& m, const char* where) {
    if (!all_finite(m)) throw NumericError(std::string("non-finite activation in ") + where);
}

} // namespace detail

// Runs the encoder over a batch. `batch` holds the window rows of all items
// stacked: (B * window_rows) x d_model, values in [0, 1]. Returns one logit
// per item. Pass a cache to retain activations for backward().
template <typename T>
std::vector<T> forward(const ModelParams<T>& p, const Mat<T>& batch, std::size_t B,
                       ForwardCache<T>* cache = nullptr) {
    const auto& cfg = p.cfg;
    const std::size_t R = static_cast<std::size_t>(cfg.window_rows);
    const std::size_t S = static_cast<std::size_t>(cfg.seq_len());
    const std::size_t D = static_cast<std::size_t>(cfg.d_model);
    if (batch.rows != B * R || batch.cols != D) {
        throw ValidationError("forward: batch shape mismatch");
    }
    const bool training = cache != nullptr;
    const bool use_dropout = training && cfg.dropout > 0.0;

    if (cache) {
        cache->batch = B;
        cache->layers.assign(static_cast<std::size_t>(cfg.n_layers), {});
    }

    // Assemble: CLS prepended per item, positional table added to all rows
    // (including CLS).
    Mat<T> x = Mat<T>::uninit(B * S, D);
    parallel_for(B, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            T* x0 = x[b * S];
            for (std::size_t j = 0; j < D; ++j) x0[j] = p.cls_token[0][j] + p.pe[0][j];
            for (std::size_t s = 1; s < S; ++s) {
                T* xs = x[b * S + s];
                const T* in = batch[b * R + (s - 1)];
                const T* pe = p.pe[s];
                for (std::size_t j = 0; j < D; ++j) xs[j] = in[j] + pe[j];
            }
        }
    });

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(D));

    for (int l = 0; l < cfg.n_layers; ++l) {
        LayerCache<T>* lc = cache ? &cache->layers[static_cast<std::size_t>(l)] : nullptr;
        if (lc) lc->x_in = x;

        // Attention projections over the stacked batch.
        Mat<T> q = Mat<T>::uninit(B * S, D), k = Mat<T>::uninit(B * S, D),
               v = Mat<T>::uninit(B * S, D);
        matmul<T>(x, p.layers[static_cast<std::size_t>(l)].wq, q);
        add_row_bias(q, p.layers[static_cast<std::size_t>(l)].bq);
        matmul<T>(x, p.layers[static_cast<std::size_t>(l)].wk, k);
        add_row_bias(k, p.layers[static_cast<std::size_t>(l)].bk);
        matmul<T>(x, p.layers[static_cast<std::size_t>(l)].wv, v);
        add_row_bias(v, p.layers[static_cast<std::size_t>(l)].bv);

        // Single-head scaled dot-product attention, item by item.
        Mat<T> probs = Mat<T>::uninit(B * S, S);
        Mat<T> attn = Mat<T>::uninit(B * S, D);
        parallel_for(B, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t b = b0; b < b1; ++b) {
                MatView<T> qb = row_block(q, b * S, S);
                MatView<T> kb = row_block(k, b * S, S);
                MatView<T> vb = row_block(v, b * S, S);
                Mat<T> kt = transpose(kb);
                MutView<T> pb = row_block(probs, b * S, S);
                matmul<T>(qb, kt, pb);
                for (std::size_t i = 0; i < S; ++i) {
                    T* pi = pb[i];
                    for (std::size_t j = 0; j < S; ++j) {
                        pi[j] = static_cast<T>(static_cast<double>(pi[j]) * inv_sqrt_d);
                    }
                }
                softmax_rows(pb);
                MutView<T> ab = row_block(attn, b * S, S);
                matmul<T>(row_block(probs, b * S, S), vb, ab);
            }
        });

        Mat<T> o = Mat<T>::uninit(B * S, D);
        matmul<T>(attn, p.layers[static_cast<std::size_t>(l)].wo, o);
        add_row_bias(o, p.layers[static_cast<std::size_t>(l)].bo);
        if (use_dropout) {
            detail::apply_dropout(o, lc->drop1, cfg.dropout, cache->dropout_key,
                                  static_cast<std::uint64_t>(l) * 2);
        }
        add_inplace(o, x); // residual

        Mat<T> x1, xhat1;
        std::vector<T> inv1;
        layer_norm_forward(o, p.layers[static_cast<std::size_t>(l)].ln1_scale,
                           p.layers[static_cast<std::size_t>(l)].ln1_shift, cfg.ln_eps, x1, xhat1, inv1);

        // Feed-forward.
        Mat<T> h = Mat<T>::uninit(B * S, static_cast<std::size_t>(cfg.ff_dim));
        matmul<T>(x1, p.layers[static_cast<std::size_t>(l)].w1, h);
        add_row_bias(h, p.layers[static_cast<std::size_t>(l)].b1);
        relu_inplace(h);
        Mat<T> f = Mat<T>::uninit(B * S, D);
        matmul<T>(h, p.layers[static_cast<std::size_t>(l)].w2, f);
        add_row_bias(f, p.layers[static_cast<std::size_t>(l)].b2);
        if (use_dropout) {
            detail::apply_dropout(f, lc->drop2, cfg.dropout, cache->dropout_key,
                                  static_cast<std::uint64_t>(l) * 2 + 1);
        }
        add_inplace(f, x1); // residual

        Mat<T> x2, xhat2;
        std::vector<T> inv2;
        layer_norm_forward(f, p.layers[static_cast<std::size_t>(l)].ln2_scale,
                           p.layers[static_cast<std::size_t>(l)].ln2_shift, cfg.ln_eps, x2, xhat2, inv2);

        detail::require_finite(x2, ("encoder layer " + std::to_string(l)).c_str());

        if (lc) {
            lc->q = std::move(q);
            lc->k = std::move(k);
            lc->v = std::move(v);
            lc->probs = std::move(probs);
            lc->attn = std::move(attn);
            lc->xhat1 = std::move(xhat1);
            lc->inv1 = std::move(inv1);
            lc->x1 = std::move(x1);
            lc->h = std::move(h);
            lc->xhat2 = std::move(xhat2);
            lc->inv2 = std::move(inv2);
        }
        x = std::move(x2);
    }

    // Classifier head over the CLS representation.
    Mat<T> cls = Mat<T>::uninit(B, D);
    for (std::size_t b = 0; b < B; ++b) {
        const T* src = x[b * S];
        T* dst = cls[b];
        for (std::size_t j = 0; j < D; ++j) dst[j] = src[j];
    }
    Mat<T> hh = Mat<T>::uninit(B, static_cast<std::size_t>(cfg.head_hidden));
    matmul<T>(cls, p.head.wa, hh);
    add_row_bias(hh, p.head.ba);
    relu_inplace(hh);
    Mat<T> logit_m = Mat<T>::uninit(B, 1);
    matmul<T>(hh, p.head.wb, logit_m);
    add_row_bias(logit_m, p.head.bb);
    detail::require_finite(logit_m, "classifier head");

    if (cache) {
        cache->x_final = std::move(x);
        cache->cls = std::move(cls);
        cache->head_h = std::move(hh);
    }
    std::vector<T> logits(B);
    for (std::size_t b = 0; b < B; ++b) logits[b] = logit_m[b][0];
    return logits;
}

// Reverse-mode gradients for every learnable tensor. `d_logits` is
// d(loss)/d(logit) per item. Gradients are returned in a ModelParams-shaped
// container (pe left empty).
template <typename T>
ModelParams<T> backward(const ModelParams<T>& p, const ForwardCache<T>& cache,
                        const std::vector<T>& d_logits) {
    const auto& cfg = p.cfg;
    const std::size_t B = cache.batch;
    const std::size_t S = static_cast<std::size_t>(cfg.seq_len());
    const std::size_t D = static_cast<std::size_t>(cfg.d_model);
    if (B == 0 || cache.layers.size() != static_cast<std::size_t>(cfg.n_layers)) {
        throw ValidationError("backward: stale or missing forward cache");
    }
    if (d_logits.size() != B) throw ValidationError("backward: gradient batch mismatch");

    ModelParams<T> g = make_empty_params<T>(cfg);
    g.pe = Mat<T>(); // constant table, no gradient

    // Head.
    Mat<T> dlog = Mat<T>::uninit(B, 1);
    for (std::size_t b = 0; b < B; ++b) dlog[b][0] = d_logits[b];
    matmul_tn<T>(cache.head_h, dlog, g.head.wb);
    colsum_into<T>(dlog, g.head.bb);
    Mat<T> dh = Mat<T>::uninit(B, static_cast<std::size_t>(cfg.head_hidden));
    {
        Mat<T> wbt = transpose<T>(p.head.wb);
        matmul<T>(dlog, wbt, dh);
    }
    for (std::size_t i = 0; i < dh.rows; ++i) {
        for (std::size_t j = 0; j < dh.cols; ++j) {
            if (cache.head_h[i][j] <= T(0)) dh[i][j] = T(0);
        }
    }
    matmul_tn<T>(cache.cls, dh, g.head.wa);
    colsum_into<T>(dh, g.head.ba);
    Mat<T> dcls = Mat<T>::uninit(B, D);
    {
        Mat<T> wat = transpose<T>(p.head.wa);
        matmul<T>(dh, wat, dcls);
    }

    Mat<T> dx(B * S, D);
    for (std::size_t b = 0; b < B; ++b) {
        T* dst = dx[b * S];
        const T* src = dcls[b];
        for (std::size_t j = 0; j < D; ++j) dst[j] = src[j];
    }

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(D));

    for (int l = cfg.n_layers - 1; l >= 0; --l) {
        const auto& L = p.layers[static_cast<std::size_t>(l)];
        auto& G = g.layers[static_cast<std::size_t>(l)];
        const auto& C = cache.layers[static_cast<std::size_t>(l)];
        const bool used_dropout = C.drop1.size() > 0;

        // LN2 backward; the result feeds both the feed-forward branch and the
        // residual shortcut from x1.
        Mat<T> dr2;
        layer_norm_backward(dx, C.xhat2, C.inv2, L.ln2_scale, dr2, G.ln2_scale, G.ln2_shift);

        Mat<T> df = dr2; // gradient into W2 h + b2
        if (used_dropout) {
            parallel_for(df.size(), [&](std::size_t i0, std::size_t i1) {
                for (std::size_t i = i0; i < i1; ++i) df.a[i] *= C.drop2.a[i];
            });
        }
        matmul_tn<T>(C.h, df, G.w2);
        colsum_into<T>(df, G.b2);
        Mat<T> dhid = Mat<T>::uninit(B * S, static_cast<std::size_t>(cfg.ff_dim));
        {
            Mat<T> w2t = transpose<T>(L.w2);
            matmul<T>(df, w2t, dhid);
        }
        parallel_for(dhid.size(), [&](std::size_t i0, std::size_t i1) {
            for (std::size_t i = i0; i < i1; ++i) {
                if (C.h.a[i] <= T(0)) dhid.a[i] = T(0);
            }
        });
        matmul_tn<T>(C.x1, dhid, G.w1);
        colsum_into<T>(dhid, G.b1);
        Mat<T> dx1 = Mat<T>::uninit(B * S, D);
        {
            Mat<T> w1t = transpose<T>(L.w1);
            matmul<T>(dhid, w1t, dx1);
        }
        add_inplace(dx1, dr2); // residual shortcut

        // LN1 backward; feeds the attention branch and the residual from x.
        Mat<T> dr1;
        layer_norm_backward(dx1, C.xhat1, C.inv1, L.ln1_scale, dr1, G.ln1_scale, G.ln1_shift);

        Mat<T> do_proj = dr1;
        if (used_dropout) {
            parallel_for(do_proj.size(), [&](std::size_t i0, std::size_t i1) {
                for (std::size_t i = i0; i < i1; ++i) do_proj.a[i] *= C.drop1.a[i];
            });
        }
        matmul_tn<T>(C.attn, do_proj, G.wo);
        colsum_into<T>(do_proj, G.bo);
        Mat<T> dattn = Mat<T>::uninit(B * S, D);
        {
            Mat<T> wot = transpose<T>(L.wo);
            matmul<T>(do_proj, wot, dattn);
        }

        // Attention backward, item by item.
        Mat<T> dq = Mat<T>::uninit(B * S, D), dk = Mat<T>::uninit(B * S, D),
               dv = Mat<T>::uninit(B * S, D);
        parallel_for(B, [&](std::size_t b0, std::size_t b1) {
            for (std::size_t b = b0; b < b1; ++b) {
                MatView<T> pb = row_block(C.probs, b * S, S);
                MatView<T> vb = row_block(C.v, b * S, S);
                MatView<T> qb = row_block(C.q, b * S, S);
                MatView<T> kb = row_block(C.k, b * S, S);
                MatView<T> dab = row_block(dattn, b * S, S);

                Mat<T> vt = transpose(vb);
                Mat<T> dprob = Mat<T>::uninit(S, S);
                matmul<T>(dab, vt, dprob);
                MutView<T> dvb = row_block(dv, b * S, S);
                matmul_tn<T>(pb, dab, dvb);

                // Softmax backward (rows), folded with the 1/sqrt(d) scale.
                Mat<T> dscore = Mat<T>::uninit(S, S);
                for (std::size_t i = 0; i < S; ++i) {
                    const T* pi = pb[i];
                    const T* dpi = dprob[i];
                    double dot = 0.0;
                    for (std::size_t j = 0; j < S; ++j) {
                        dot += static_cast<double>(pi[j]) * static_cast<double>(dpi[j]);
                    }
                    T* dsi = dscore[i];
                    for (std::size_t j = 0; j < S; ++j) {
                        dsi[j] = static_cast<T>(static_cast<double>(pi[j]) *
                                                (static_cast<double>(dpi[j]) - dot) * inv_sqrt_d);
                    }
                }
                MutView<T> dqb = row_block(dq, b * S, S);
                matmul<T>(dscore, kb, dqb);
                MutView<T> dkb = row_block(dk, b * S, S);
                matmul_tn<T>(dscore, qb, dkb);
            }
        });

        matmul_tn<T>(C.x_in, dq, G.wq);
        colsum_into<T>(dq, G.bq);
        matmul_tn<T>(C.x_in, dk, G.wk);
        colsum_into<T>(dk, G.bk);
        matmul_tn<T>(C.x_in, dv, G.wv);
        colsum_into<T>(dv, G.bv);

        // dX = residual + dQ Wq^T + dK Wk^T + dV Wv^T
        Mat<T> dx_next = std::move(dr1);
        Mat<T> tmp = Mat<T>::uninit(B * S, D);
        {
            Mat<T> wt = transpose<T>(L.wq);
            matmul<T>(dq, wt, tmp);
            add_inplace(dx_next, tmp);
        }
        {
            Mat<T> wt = transpose<T>(L.wk);
            matmul<T>(dk, wt, tmp);
            add_inplace(dx_next, tmp);
        }
        {
            Mat<T> wt = transpose<T>(L.wv);
            matmul<T>(dv, wt, tmp);
            add_inplace(dx_next, tmp);
        }
        dx = std::move(dx_next);
    }

    // CLS token gradient: fixed-order sum over items.
    {
        std::vector<double> acc(D, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
            const T* r = dx[b * S];
            for (std::size_t j = 0; j < D; ++j) acc[j] += static_cast<double>(r[j]);
        }
        for (std::size_t j = 0; j < D; ++j) g.cls_token[0][j] = static_cast<T>(acc[j]);
    }
    return g;
}

} // namespace acpt
