#pragma once

#include <cmath>
#include <vector>

#include "tifl/transforms.hpp"

namespace tifl {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-transformation logits for a batch: logits[s](n, j) = w_j^T T_s v_n + b_{j,s}.
// batch holds one sample per row.
inline std::vector<Matrix> transform_logits(const TransformSet& transforms, const Matrix& weights,
                                            const Matrix& hidden_bias, const Matrix& batch) {
    const int num_transforms = transforms.size();
    std::vector<Matrix> logits;
    logits.reserve(static_cast<std::size_t>(num_transforms));
    for (int s = 0; s < num_transforms; ++s) {
        Matrix l = transforms.apply_batch(s, batch) * weights;
        l.rowwise() += hidden_bias.col(s).transpose();
        logits.push_back(std::move(l));
    }
    return logits;
}

// Softmax over transformations with an implicit "off" state whose logit is 0.
// The per-cell max of {0, logits} is subtracted before exponentiation, so the
// result is overflow-safe: probs[s](n, j) = exp(l_s) / (1 + sum_s' exp(l_s')).
inline std::vector<Matrix> softmax_over_transforms(const std::vector<Matrix>& logits) {
    const int num_transforms = static_cast<int>(logits.size());
    const auto rows = logits.front().rows();
    const auto cols = logits.front().cols();
    std::vector<Matrix> probs(logits.size(), Matrix(rows, cols));
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index n = 0; n < rows; ++n) {
            double peak = 0.0;
            for (int s = 0; s < num_transforms; ++s) peak = std::max(peak, logits[s](n, j));
            double denom = std::exp(-peak);
            for (int s = 0; s < num_transforms; ++s) denom += std::exp(logits[s](n, j) - peak);
            for (int s = 0; s < num_transforms; ++s) probs[s](n, j) = std::exp(logits[s](n, j) - peak) / denom;
        }
    }
    return probs;
}

// E[z_j | v] per sample: the row of pooled activations is the exact sum of
// the per-transformation probabilities.
inline Matrix pooled_from_probs(const std::vector<Matrix>& probs) {
    Matrix pooled = probs.front();
    for (std::size_t s = 1; s < probs.size(); ++s) pooled += probs[s];
    return pooled;
}

// Visible-layer preactivation for batched coefficients (probabilities,
// binary indicators, or encoder outputs): c^T + sum_s (coeffs_s W^T) T_s.
inline Matrix visible_preactivation(const TransformSet& transforms, const Matrix& weights,
                                    const Vector& visible_bias, const std::vector<Matrix>& coeffs) {
    Matrix pre = Matrix::Zero(coeffs.front().rows(), transforms.input_dim());
    pre.rowwise() += visible_bias.transpose();
    for (int s = 0; s < transforms.size(); ++s) {
        pre += transforms.apply_adjoint_batch(s, coeffs[static_cast<std::size_t>(s)] * weights.transpose());
    }
    return pre;
}

}  // namespace tifl
