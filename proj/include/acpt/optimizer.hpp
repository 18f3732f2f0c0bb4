// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "acpt/common.hpp"
#include "acpt/matrix.hpp"
#include "acpt/model.hpp"

namespace acpt {

struct AdamWConfig {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;

    friend bool operator==(const AdamWConfig&, const AdamWConfig&) = default;
};

// Moment tensors are kept in the for_each_tensor traversal order.
template <typename T>
struct AdamWState {
    std::vector<Mat<T>> m, v;
    std::int64_t step = 0;

    template <typename P>
    static AdamWState zeros_like(const ModelParams<P>& params) {
        AdamWState s;
        for_each_tensor(params, [&](const std::string&, const Mat<P>& t) {
            s.m.emplace_back(t.rows, t.cols);
            s.v.emplace_back(t.rows, t.cols);
        });
        return s;
    }
};

// Decoupled weight decay update with bias correction:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps) - lr * wd * p
// Element math runs in double regardless of the storage type. `step` is the
// post-increment step count (1 on the first update).
template <typename T>
void adamw_update_tensor(Mat<T>& p, const Mat<T>& g, Mat<T>& m, Mat<T>& v, std::int64_t step,
                         const AdamWConfig& cfg, double lr) {
    if (g.rows != p.rows || g.cols != p.cols || m.rows != p.rows || v.rows != p.rows) {
        throw ValidationError("adamw: tensor shape mismatch");
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    parallel_for(p.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            const double gi = static_cast<double>(g.a[i]);
            const double mi = cfg.beta1 * static_cast<double>(m.a[i]) + (1.0 - cfg.beta1) * gi;
            const double vi = cfg.beta2 * static_cast<double>(v.a[i]) + (1.0 - cfg.beta2) * gi * gi;
            m.a[i] = static_cast<T>(mi);
            v.a[i] = static_cast<T>(vi);
            const double mhat = mi / bc1;
            const double vhat = vi / bc2;
            const double pi = static_cast<double>(p.a[i]);
            p.a[i] = static_cast<T>(pi - lr * mhat / (std::sqrt(vhat) + cfg.eps) -
                                    lr * cfg.weight_decay * pi);
        }
    });
}

template <typename T>
void adamw_step(ModelParams<T>& params, const ModelParams<T>& grads, AdamWState<T>& state,
                const AdamWConfig& cfg, double lr) {
    ++state.step;
    std::size_t ti = 0;
    std::vector<const Mat<T>*> gts;
    for_each_tensor(grads, [&](const std::string&, const Mat<T>& g) { gts.push_back(&g); });
    for_each_tensor(params, [&](const std::string&, Mat<T>& p) {
        adamw_update_tensor(p, *gts[ti], state.m[ti], state.v[ti], state.step, cfg, lr);
        ++ti;
    });
}

// Step decay: lr(epoch) = base * gamma^floor(epoch / step_size).
struct StepLRSchedule {
    double base_lr = 1e-4;
    double gamma = 0.5;
    int step_size = 10;

    friend bool operator==(const StepLRSchedule&, const StepLRSchedule&) = default;
};

inline double scheduler_lr(const StepLRSchedule& s, int epoch) {
    if (epoch < 0) throw ValidationError("scheduler_lr: negative epoch");
    return s.base_lr * std::pow(s.gamma, static_cast<double>(epoch / s.step_size));
}

} // namespace acpt
