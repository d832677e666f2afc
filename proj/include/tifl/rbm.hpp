#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/pooled_softmax.hpp"
#include "tifl/rng.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

enum class VisibleFamily : std::uint32_t {
    binary = 0,
    gaussian_unit_variance = 1,
};

// Transformation-invariant RBM. The plain RBM is the special case of a
// single identity transform. Parameter shapes:
//   weights       filter_dim x num_filters   (column j is filter w_j)
//   hidden_bias   num_filters x num_transforms
//   visible_bias  input_dim
struct TirbmModel {
    Matrix weights;
    Matrix hidden_bias;
    Vector visible_bias;
    VisibleFamily visible_family = VisibleFamily::binary;
    TransformSet transforms;

    int input_dim() const { return static_cast<int>(visible_bias.size()); }
    int filter_dim() const { return static_cast<int>(weights.rows()); }
    int num_filters() const { return static_cast<int>(weights.cols()); }
    int num_transforms() const { return static_cast<int>(hidden_bias.cols()); }

    bool finite() const {
        return weights.allFinite() && hidden_bias.allFinite() && visible_bias.allFinite();
    }
};

// Hidden configuration under the one-active-per-row constraint: each filter
// row is either off (-1) or committed to one transformation index.
struct HiddenState {
    std::vector<int> active;

    static HiddenState all_off(int num_filters) { return HiddenState{std::vector<int>(static_cast<std::size_t>(num_filters), -1)}; }
};

struct TrainConfig {
    double learning_rate = 0.05;
    int batch_size = 100;
    int epochs = 10;
    int cd_steps = 1;
    double sparsity_target = 0.05;   // p
    double sparsity_weight = 3.0;    // multiplier on the sparsity gradient
    double weight_init_scale = 0.01; // weights ~ uniform(-scale, scale)
    std::uint64_t seed = 0;
};

struct GradientRecord {
    Matrix weights;
    Matrix hidden_bias;
    Vector visible_bias;
};

struct EpochMetrics {
    int epoch = 0;
    double reconstruction_error = 0.0;
    double mean_pooled_activation = 0.0;
    double wall_seconds = 0.0;
};

// Fresh model with uniform(-scale, scale) weights (filled column by column)
// and zero biases. Draws from Rng(cfg.seed, 0).
inline TirbmModel init_tirbm(TransformSet transforms, int num_filters, VisibleFamily family,
                             const TrainConfig& cfg) {
    if (num_filters < 1) throw invalid_parameter("init_tirbm: num_filters must be >= 1");
    TirbmModel m;
    m.visible_family = family;
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

namespace detail {

inline void check_visible_dims(const TirbmModel& m, const Vector& v) {
    if (v.size() != m.input_dim()) {
        throw invalid_parameter("visible vector length " + std::to_string(v.size()) + " != input_dim " +
                                std::to_string(m.input_dim()));
    }
}

inline void check_hidden_state(const TirbmModel& m, const HiddenState& h) {
    if (static_cast<int>(h.active.size()) != m.num_filters())
        throw invalid_parameter("hidden state has wrong number of rows");
    for (int s : h.active)
        if (s < -1 || s >= m.num_transforms()) throw invalid_parameter("hidden state indexes a missing transform");
}

}  // namespace detail

// Joint energy of a visible vector and a hidden configuration. The gaussian
// family adds the unit-variance quadratic term and drops the {0,1} check.
inline double energy(const TirbmModel& m, const Vector& v, const HiddenState& h) {
    detail::check_visible_dims(m, v);
    detail::check_hidden_state(m, h);
    if (m.visible_family == VisibleFamily::binary) {
        for (Eigen::Index i = 0; i < v.size(); ++i)
            if (v[i] != 0.0 && v[i] != 1.0)
                throw invalid_parameter("energy: binary family requires visible values in {0,1}");
    }
    double e = -m.visible_bias.dot(v);
    if (m.visible_family == VisibleFamily::gaussian_unit_variance) e += 0.5 * v.squaredNorm();
    for (int j = 0; j < m.num_filters(); ++j) {
        const int s = h.active[static_cast<std::size_t>(j)];
        if (s < 0) continue;
        e -= m.transforms.apply(s, v).dot(m.weights.col(j)) + m.hidden_bias(j, s);
    }
    return e;
}

// P(h_{j,s} = 1 | v) for a batch, one N x K matrix per transformation.
inline std::vector<Matrix> hidden_conditional_batch(const TirbmModel& m, const Matrix& batch) {
    if (batch.cols() != m.input_dim()) throw invalid_parameter("hidden_conditional: dimension mismatch");
    return softmax_over_transforms(transform_logits(m.transforms, m.weights, m.hidden_bias, batch));
}

// Single-sample form, returned as the K x S probability matrix.
inline Matrix hidden_conditional(const TirbmModel& m, const Vector& v) {
    const auto probs = hidden_conditional_batch(m, v.transpose());
    Matrix out(m.num_filters(), m.num_transforms());
    for (int s = 0; s < m.num_transforms(); ++s) out.col(s) = probs[static_cast<std::size_t>(s)].row(0).transpose();
    return out;
}

inline Matrix pooled_activation_batch(const TirbmModel& m, const Matrix& batch) {
    return pooled_from_probs(hidden_conditional_batch(m, batch));
}

// E[z_j | v]: probability that filter j fires under some transformation.
inline Vector pooled_activation(const TirbmModel& m, const Vector& v) {
    return hidden_conditional(m, v).rowwise().sum();
}

// P(v | H) mean: sigmoid preactivation for binary units, the raw mean for
// gaussian units.
inline Vector visible_conditional(const TirbmModel& m, const HiddenState& h) {
    detail::check_hidden_state(m, h);
    Vector pre = m.visible_bias;
    for (int j = 0; j < m.num_filters(); ++j) {
        const int s = h.active[static_cast<std::size_t>(j)];
        if (s < 0) continue;
        pre += m.transforms.apply_adjoint(s, m.weights.col(j));
    }
    if (m.visible_family == VisibleFamily::binary)
        for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = sigmoid(pre[i]);
    return pre;
}

namespace detail {

// Draw one hidden configuration per batch row. Consumes exactly one uniform
// per (sample, filter) pair, samples in row order, filters ascending; the
// categorical walk visits transformations in index order with "off" last.
// Returns per-transformation indicator matrices.
inline std::vector<Matrix> sample_hidden_indicators(const std::vector<Matrix>& probs, Rng& rng) {
    const auto n_rows = probs.front().rows();
    const auto n_cols = probs.front().cols();
    std::vector<Matrix> indicators(probs.size(), Matrix::Zero(n_rows, n_cols));
    for (Eigen::Index n = 0; n < n_rows; ++n) {
        for (Eigen::Index j = 0; j < n_cols; ++j) {
            const double u = rng.uniform();
            double cum = 0.0;
            for (std::size_t s = 0; s < probs.size(); ++s) {
                cum += probs[s](n, j);
                if (u < cum) {
                    indicators[s](n, j) = 1.0;
                    break;
                }
            }
        }
    }
    return indicators;
}

}  // namespace detail

inline HiddenState sample_hidden(const TirbmModel& m, const Vector& v, Rng& rng) {
    const auto indicators = detail::sample_hidden_indicators(hidden_conditional_batch(m, v.transpose()), rng);
    HiddenState h = HiddenState::all_off(m.num_filters());
    for (int j = 0; j < m.num_filters(); ++j)
        for (int s = 0; s < m.num_transforms(); ++s)
            if (indicators[static_cast<std::size_t>(s)](0, j) != 0.0) h.active[static_cast<std::size_t>(j)] = s;
    return h;
}

struct CdResult {
    GradientRecord gradient;        // ascent direction on the log-likelihood
    Vector batch_mean_pooled;       // mean_n E[z_j | v_n], length K
    double reconstruction_error;    // per-dimension MSE of the first chain reconstruction
};

// Contrastive divergence: expectations at both endpoints, sampled hidden
// states driving the chain, mean-field visible reconstructions in between.
inline CdResult cd_gradient(const TirbmModel& m, const Matrix& batch, int cd_steps, Rng& rng) {
    if (batch.rows() == 0) throw invalid_parameter("cd_gradient: empty batch");
    if (batch.cols() != m.input_dim()) throw invalid_parameter("cd_gradient: dimension mismatch");
    if (cd_steps < 1) throw invalid_parameter("cd_gradient: cd_steps must be >= 1");

    const double n = static_cast<double>(batch.rows());
    const auto pos_probs = hidden_conditional_batch(m, batch);

    Matrix chain = batch;
    double recon_error = 0.0;
    for (int step = 0; step < cd_steps; ++step) {
        const auto step_probs = (step == 0) ? pos_probs : hidden_conditional_batch(m, chain);
        const auto indicators = detail::sample_hidden_indicators(step_probs, rng);
        chain = visible_preactivation(m.transforms, m.weights, m.visible_bias, indicators);
        if (m.visible_family == VisibleFamily::binary)
            chain = chain.unaryExpr([](double x) { return sigmoid(x); });
        if (step == 0) recon_error = (chain - batch).squaredNorm() / (n * static_cast<double>(batch.cols()));
    }
    const auto neg_probs = hidden_conditional_batch(m, chain);

    GradientRecord g;
    g.weights = Matrix::Zero(m.filter_dim(), m.num_filters());
    g.hidden_bias = Matrix::Zero(m.num_filters(), m.num_transforms());
    for (int s = 0; s < m.num_transforms(); ++s) {
        const auto& pos = pos_probs[static_cast<std::size_t>(s)];
        const auto& neg = neg_probs[static_cast<std::size_t>(s)];
        g.weights.noalias() += m.transforms.apply_batch(s, batch).transpose() * pos;
        g.weights.noalias() -= m.transforms.apply_batch(s, chain).transpose() * neg;
        g.hidden_bias.col(s) = (pos.colwise().sum() - neg.colwise().sum()).transpose();
    }
    g.weights /= n;
    g.hidden_bias /= n;
    g.visible_bias = (batch.colwise().sum() - chain.colwise().sum()).transpose() / n;

    CdResult result;
    result.gradient = std::move(g);
    result.batch_mean_pooled = pooled_from_probs(pos_probs).colwise().mean().transpose();
    result.reconstruction_error = recon_error;
    return result;
}

// Gradient of L_sp = sum_j (p - mean_n E[z_j|v_n])^2 with respect to weights
// and hidden biases; the regularizer acts on pooled units, so the chain rule
// passes through Eq-10-style pooling: dz_j/dl_{j,s} = P(h_{j,s}|v)(1 - z_j).
inline GradientRecord sparsity_gradient(const TirbmModel& m, const Matrix& batch, double target) {
    if (batch.rows() == 0) throw invalid_parameter("sparsity_gradient: empty batch");
    if (batch.cols() != m.input_dim()) throw invalid_parameter("sparsity_gradient: dimension mismatch");
    if (!(target > 0.0 && target < 1.0)) throw invalid_parameter("sparsity_gradient: target must lie in (0,1)");

    const double n = static_cast<double>(batch.rows());
    const auto probs = hidden_conditional_batch(m, batch);
    const Matrix pooled = pooled_from_probs(probs);
    const Vector mean_pooled = pooled.colwise().mean().transpose();
    // row vector of dL/dq_j = 2(q_j - p), distributed over samples
    const Eigen::RowVectorXd outer = 2.0 * (mean_pooled.transpose().array() - target) / n;

    GradientRecord g;
    g.weights = Matrix::Zero(m.filter_dim(), m.num_filters());
    g.hidden_bias = Matrix::Zero(m.num_filters(), m.num_transforms());
    g.visible_bias = Vector::Zero(m.input_dim());
    const Matrix damp = (1.0 - pooled.array()).matrix();
    for (int s = 0; s < m.num_transforms(); ++s) {
        Matrix weighted = probs[static_cast<std::size_t>(s)].cwiseProduct(damp);
        weighted.array().rowwise() *= outer.array();
        g.weights.noalias() += m.transforms.apply_batch(s, batch).transpose() * weighted;
        g.hidden_bias.col(s) = weighted.colwise().sum().transpose();
    }
    return g;
}

struct TrainResult {
    TirbmModel model;
    std::vector<EpochMetrics> metrics;
};

// Minibatch SGD: theta += lr * (cd_gradient - sparsity_weight * sparsity_gradient).
// Deterministic given cfg.seed; shuffling and hidden sampling share one
// stream, Rng(cfg.seed, 1).
inline TrainResult train(TirbmModel m, const PatchDataset& data, const TrainConfig& cfg) {
    if (data.dim() != m.input_dim()) throw invalid_parameter("train: dataset dimension mismatch");
    if (data.count() == 0) throw invalid_parameter("train: empty dataset");
    if (cfg.batch_size < 1) throw invalid_parameter("train: batch_size must be >= 1");

    Rng rng(cfg.seed, 1);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.count()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);

    TrainResult result;
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

            const CdResult cd = cd_gradient(m, batch, cfg.cd_steps, rng);
            GradientRecord update = cd.gradient;
            if (cfg.sparsity_weight > 0.0) {
                const GradientRecord sp = sparsity_gradient(m, batch, cfg.sparsity_target);
                update.weights -= cfg.sparsity_weight * sp.weights;
                update.hidden_bias -= cfg.sparsity_weight * sp.hidden_bias;
            }
            m.weights += cfg.learning_rate * update.weights;
            m.hidden_bias += cfg.learning_rate * update.hidden_bias;
            m.visible_bias += cfg.learning_rate * update.visible_bias;

            recon_sum += cd.reconstruction_error * static_cast<double>(size);
            pooled_sum += cd.batch_mean_pooled.mean() * static_cast<double>(size);
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
