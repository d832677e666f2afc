#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/pooled_softmax.hpp"
#include "tifl/rbm.hpp"
#include "tifl/rng.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

enum class OutputFamily : std::uint32_t {
    sigmoid_cross_entropy = 0,
    linear_squared_error = 1,
};

// Transformation-invariant autoencoder with a softmax-over-transformations
// encoder and a decoder tied to the same filter matrix.
struct TiaeModel {
    Matrix weights;       // filter_dim x num_filters, shared by encoder and decoder
    Matrix hidden_bias;   // num_filters x num_transforms
    Vector visible_bias;  // input_dim
    OutputFamily output_family = OutputFamily::sigmoid_cross_entropy;
    TransformSet transforms;

    int input_dim() const { return static_cast<int>(visible_bias.size()); }
    int filter_dim() const { return static_cast<int>(weights.rows()); }
    int num_filters() const { return static_cast<int>(weights.cols()); }
    int num_transforms() const { return static_cast<int>(hidden_bias.cols()); }

    bool finite() const { return weights.allFinite() && hidden_bias.allFinite() && visible_bias.allFinite(); }
};

inline TiaeModel init_tiae(TransformSet transforms, int num_filters, OutputFamily family, const TrainConfig& cfg) {
    if (num_filters < 1) throw invalid_parameter("init_tiae: num_filters must be >= 1");
    TiaeModel m;
    m.output_family = family;
    m.weights = Matrix(transforms.filter_dim(), num_filters);
    Rng rng(cfg.seed, 0);
    for (int j = 0; j < num_filters; ++j)
        for (int i = 0; i < transforms.filter_dim(); ++i)
            m.weights(i, j) = rng.uniform(-cfg.weight_init_scale, cfg.weight_init_scale);
    m.hidden_bias = Matrix::Zero(num_filters, transforms.size());
    m.visible_bias = Vector::Zero(transforms.input_dim());
    m.transforms = std::move(transforms);
    return m;
}

inline std::vector<Matrix> encode_batch(const TiaeModel& m, const Matrix& batch) {
    if (batch.cols() != m.input_dim()) throw invalid_parameter("encode: dimension mismatch");
    return softmax_over_transforms(transform_logits(m.transforms, m.weights, m.hidden_bias, batch));
}

// f_{j,s}(v), numerically identical to the TIRBM hidden conditional.
inline Matrix encode(const TiaeModel& m, const Vector& v) {
    const auto probs = encode_batch(m, v.transpose());
    Matrix out(m.num_filters(), m.num_transforms());
    for (int s = 0; s < m.num_transforms(); ++s) out.col(s) = probs[static_cast<std::size_t>(s)].row(0).transpose();
    return out;
}

// Pooled (row-sum) encoder output, the downstream feature.
inline Matrix pooled_encode_batch(const TiaeModel& m, const Matrix& batch) {
    return pooled_from_probs(encode_batch(m, batch));
}

inline Vector decode(const TiaeModel& m, const Matrix& code) {
    if (code.rows() != m.num_filters() || code.cols() != m.num_transforms())
        throw invalid_parameter("decode: code shape mismatch");
    std::vector<Matrix> coeffs;
    coeffs.reserve(static_cast<std::size_t>(m.num_transforms()));
    for (int s = 0; s < m.num_transforms(); ++s) coeffs.push_back(code.col(s).transpose());
    Vector pre = visible_preactivation(m.transforms, m.weights, m.visible_bias, coeffs).row(0).transpose();
    if (m.output_family == OutputFamily::sigmoid_cross_entropy)
        for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = sigmoid(pre[i]);
    return pre;
}

namespace detail {

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace detail

struct TiaeBatchStats {
    GradientRecord gradient;      // gradient of the mean loss (descent = subtract)
    double loss = 0.0;            // mean per-sample reconstruction loss
    double reconstruction_error = 0.0;  // per-dimension MSE, reported uniformly for both families
    Vector batch_mean_pooled;
};

// Mean reconstruction loss over a batch: cross-entropy via stable softplus
// for the sigmoid family, squared error for the linear family.
inline double tiae_loss(const TiaeModel& m, const Matrix& batch) {
    if (batch.rows() == 0) throw invalid_parameter("tiae_loss: empty batch");
    const auto probs = encode_batch(m, batch);
    const Matrix pre = visible_preactivation(m.transforms, m.weights, m.visible_bias, probs);
    const double n = static_cast<double>(batch.rows());
    if (m.output_family == OutputFamily::sigmoid_cross_entropy) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < pre.rows(); ++i)
            for (Eigen::Index k = 0; k < pre.cols(); ++k)
                total += detail::softplus(pre(i, k)) - batch(i, k) * pre(i, k);
        return total / n;
    }
    return 0.5 * (pre - batch).squaredNorm() / n;
}

// Analytic gradient of the mean loss; gradients flow through both the
// decoder and encoder occurrences of the tied weights.
inline TiaeBatchStats tiae_gradient(const TiaeModel& m, const Matrix& batch) {
    if (batch.rows() == 0) throw invalid_parameter("tiae_gradient: empty batch");
    const double n = static_cast<double>(batch.rows());
    const auto probs = encode_batch(m, batch);
    const Matrix pre = visible_preactivation(m.transforms, m.weights, m.visible_bias, probs);

    Matrix recon = pre;
    double loss = 0.0;
    if (m.output_family == OutputFamily::sigmoid_cross_entropy) {
        recon = pre.unaryExpr([](double x) { return sigmoid(x); });
        for (Eigen::Index i = 0; i < pre.rows(); ++i)
            for (Eigen::Index k = 0; k < pre.cols(); ++k)
                loss += detail::softplus(pre(i, k)) - batch(i, k) * pre(i, k);
        loss /= n;
    } else {
        loss = 0.5 * (pre - batch).squaredNorm() / n;
    }
    const Matrix delta = recon - batch;  // N x D1, dLoss/dPre for both families

    // encoder-side sensitivities: G_s(n,j) = <T_s delta_n, w_j>
    const int num_transforms = m.num_transforms();
    std::vector<Matrix> back(static_cast<std::size_t>(num_transforms));
    Matrix weighted_sum = Matrix::Zero(batch.rows(), m.num_filters());
    for (int s = 0; s < num_transforms; ++s) {
        back[static_cast<std::size_t>(s)] = m.transforms.apply_batch(s, delta) * m.weights;
        weighted_sum += back[static_cast<std::size_t>(s)].cwiseProduct(probs[static_cast<std::size_t>(s)]);
    }

    TiaeBatchStats stats;
    stats.gradient.weights = Matrix::Zero(m.filter_dim(), m.num_filters());
    stats.gradient.hidden_bias = Matrix::Zero(m.num_filters(), num_transforms);
    for (int s = 0; s < num_transforms; ++s) {
        const Matrix softmax_back =
            probs[static_cast<std::size_t>(s)].cwiseProduct(back[static_cast<std::size_t>(s)] - weighted_sum);
        stats.gradient.weights.noalias() +=
            m.transforms.apply_batch(s, delta).transpose() * probs[static_cast<std::size_t>(s)];
        stats.gradient.weights.noalias() += m.transforms.apply_batch(s, batch).transpose() * softmax_back;
        stats.gradient.hidden_bias.col(s) = softmax_back.colwise().sum().transpose();
    }
    stats.gradient.weights /= n;
    stats.gradient.hidden_bias /= n;
    stats.gradient.visible_bias = delta.colwise().mean().transpose();
    stats.loss = loss;
    stats.reconstruction_error = (recon - batch).squaredNorm() / (n * static_cast<double>(batch.cols()));
    stats.batch_mean_pooled = pooled_from_probs(probs).colwise().mean().transpose();
    return stats;
}

struct TiaeTrainResult {
    TiaeModel model;
    std::vector<EpochMetrics> metrics;
};

// Minibatch SGD on the reconstruction loss; same determinism contract and
// stream layout as the TIRBM trainer.
inline TiaeTrainResult train_tiae(TiaeModel m, const PatchDataset& data, const TrainConfig& cfg) {
    if (data.dim() != m.input_dim()) throw invalid_parameter("train_tiae: dataset dimension mismatch");
    if (data.count() == 0) throw invalid_parameter("train_tiae: empty dataset");
    if (cfg.batch_size < 1) throw invalid_parameter("train_tiae: batch_size must be >= 1");

    Rng rng(cfg.seed, 1);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.count()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

    TiaeTrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        rng.shuffle(order);
        double recon_sum = 0.0;
        double pooled_sum = 0.0;
        double sample_count = 0.0;
        for (Eigen::Index begin = 0; begin < data.count(); begin += cfg.batch_size) {
            const Eigen::Index size = std::min<Eigen::Index>(cfg.batch_size, data.count() - begin);
            Matrix batch(size, data.dim());
            for (Eigen::Index i = 0; i < size; ++i) batch.row(i) = data.patches.row(order[static_cast<std::size_t>(begin + i)]);

            const TiaeBatchStats stats = tiae_gradient(m, batch);
            if (!std::isfinite(stats.loss)) throw training_diverged("training diverged at epoch " + std::to_string(epoch));
            m.weights -= cfg.learning_rate * stats.gradient.weights;
            m.hidden_bias -= cfg.learning_rate * stats.gradient.hidden_bias;
            m.visible_bias -= cfg.learning_rate * stats.gradient.visible_bias;

            recon_sum += stats.reconstruction_error * static_cast<double>(size);
            pooled_sum += stats.batch_mean_pooled.mean() * static_cast<double>(size);
            sample_count += static_cast<double>(size);
        }
        if (!m.finite()) throw training_diverged("training diverged at epoch " + std::to_string(epoch));

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.reconstruction_error = recon_sum / sample_count;
        metrics.mean_pooled_activation = pooled_sum / sample_count;
        metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.metrics.push_back(metrics);
    }
    result.model = std::move(m);
    return result;
}

}  // namespace tifl
