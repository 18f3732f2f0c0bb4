// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <vector>

#include "acpt/common.hpp"

namespace acpt {

// Numerically stable binary cross entropy on logits:
//   loss_i = max(z, 0) - z y + log(1 + exp(-|z|))
// Gradient of the batch mean: (sigmoid(z) - y) / n.
template <typename T>
struct BceResult {
    double loss = 0.0;          // mean over the batch
    std::vector<T> d_logits;    // d(mean loss)/d(logit_i)
};

inline double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

template <typename T>
BceResult<T> bce_with_logits(const std::vector<T>& logits, const std::vector<int>& labels) {
    if (logits.size() != labels.size() || logits.empty()) {
        throw ValidationError("bce_with_logits: size mismatch or empty batch");
    }
    const std::size_t n = logits.size();
    BceResult<T> out;
    out.d_logits.resize(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = static_cast<double>(logits[i]);
        const int y = labels[i];
        if (y != 0 && y != 1) throw ValidationError("bce_with_logits: label must be 0 or 1");
        sum += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        out.d_logits[i] = static_cast<T>((sigmoid(z) - y) / static_cast<double>(n));
    }
    out.loss = sum / static_cast<double>(n);
    return out;
}

} // namespace acpt
