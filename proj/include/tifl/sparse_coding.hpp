#pragma once

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/rbm.hpp"
#include "tifl/rng.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

// Dictionary for transformation-invariant sparse coding; every column is
// constrained to the unit ball.
struct Dictionary {
    Matrix weights;  // filter_dim x num_filters
    TransformSet transforms;

    int input_dim() const { return transforms.input_dim(); }
    int filter_dim() const { return static_cast<int>(weights.rows()); }
    int num_filters() const { return static_cast<int>(weights.cols()); }
    int num_transforms() const { return transforms.size(); }
};

// Sparse coefficients over (filter, transformation) pairs. At most one entry
// per filter and at most gamma entries overall.
struct SparseCode {
    struct Entry {
        int filter;
        int transform;
        double coefficient;
    };

    std::vector<Entry> entries;
    int num_filters = 0;
    int num_transforms = 0;
};

inline Vector reconstruct(const Dictionary& d, const SparseCode& code) {
    Vector out = Vector::Zero(d.input_dim());
    for (const auto& e : code.entries)
        out += e.coefficient * d.transforms.apply_adjoint(e.transform, d.weights.col(e.filter));
    return out;
}

// Greedy transformation-invariant OMP. Each step picks the (filter,
// transformation) pair most correlated with the residual among filters not
// yet used, then refits all selected coefficients jointly by least squares.
// Exact ties go to the lowest (filter, transformation) index; a step whose
// best correlation is exactly zero cannot reduce the residual and stops the
// loop early.
inline SparseCode encode_omp(const Dictionary& d, const Vector& v, int gamma) {
    if (gamma < 1) throw invalid_parameter("encode_omp: gamma must be >= 1");
    if (gamma > d.num_filters()) throw invalid_parameter("encode_omp: gamma exceeds the number of filters");
    if (v.size() != d.input_dim()) throw invalid_parameter("encode_omp: dimension mismatch");

    SparseCode code;
    code.num_filters = d.num_filters();
    code.num_transforms = d.num_transforms();

    Vector residual = v;
    std::vector<bool> used(static_cast<std::size_t>(d.num_filters()), false);
    Matrix atoms(d.input_dim(), 0);

    while (static_cast<int>(code.entries.size()) < gamma && residual.norm() >= 1e-10) {
        int best_filter = -1;
        int best_transform = -1;
        double best_score = 0.0;
        // scores(j, s) = <T_s^T w_j, residual> = w_j^T (T_s residual)
        for (int s = 0; s < d.num_transforms(); ++s) {
            const Vector projected = d.weights.transpose() * d.transforms.apply(s, residual);
            for (int j = 0; j < d.num_filters(); ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double score = std::abs(projected[j]);
                if (score > best_score ||
                    (best_filter < 0 && score == best_score) ||
                    (score == best_score && (j < best_filter || (j == best_filter && s < best_transform)))) {
                    best_score = score;
                    best_filter = j;
                    best_transform = s;
                }
            }
        }
        if (best_filter < 0 || best_score == 0.0) break;

        used[static_cast<std::size_t>(best_filter)] = true;
        code.entries.push_back({best_filter, best_transform, 0.0});
        atoms.conservativeResize(Eigen::NoChange, atoms.cols() + 1);
        atoms.col(atoms.cols() - 1) = d.transforms.apply_adjoint(best_transform, d.weights.col(best_filter));

        const Vector coeffs = atoms.colPivHouseholderQr().solve(v);
        for (Eigen::Index t = 0; t < coeffs.size(); ++t) code.entries[static_cast<std::size_t>(t)].coefficient = coeffs[t];
        residual = v - atoms * coeffs;
    }
    return code;
}

// Squared reconstruction error summed over the batch (the alternating
// minimization objective).
inline double coding_objective(const Dictionary& d, const Matrix& batch, const std::vector<SparseCode>& codes) {
    if (static_cast<Eigen::Index>(codes.size()) != batch.rows())
        throw invalid_parameter("coding_objective: codes/batch length mismatch");
    double total = 0.0;
    for (Eigen::Index n = 0; n < batch.rows(); ++n) {
        const Vector diff = reconstruct(d, codes[static_cast<std::size_t>(n)]) - batch.row(n).transpose();
        total += diff.squaredNorm();
    }
    return total;
}

// Conservative step for the projected gradient update: 1 / (2 L) with
// L = 2 sum_n |H_n|_F^2 * max_s bound(sigma_max(T_s))^2, using the
// row-sum/column-sum bound on each operator norm.
inline double default_dictionary_step(const Dictionary& d, const std::vector<SparseCode>& codes) {
    double op_bound = 0.0;
    for (int s = 0; s < d.num_transforms(); ++s) {
        const auto& t = d.transforms[s];
        std::vector<double> row_sum(static_cast<std::size_t>(t.rows), 0.0);
        std::vector<double> col_sum(static_cast<std::size_t>(t.cols), 0.0);
        for (const auto& e : t.entries) {
            row_sum[static_cast<std::size_t>(e.row)] += std::abs(e.weight);
            col_sum[static_cast<std::size_t>(e.col)] += std::abs(e.weight);
        }
        double max_row = 0.0, max_col = 0.0;
        for (double x : row_sum) max_row = std::max(max_row, x);
        for (double x : col_sum) max_col = std::max(max_col, x);
        op_bound = std::max(op_bound, max_row * max_col);
    }
    double coeff_energy = 0.0;
    for (const auto& code : codes)
        for (const auto& e : code.entries) coeff_energy += e.coefficient * e.coefficient;
    const double lipschitz = 2.0 * coeff_energy * op_bound;
    return lipschitz > 0.0 ? 1.0 / (2.0 * lipschitz) : 0.0;
}

inline GradientRecord dictionary_gradient(const Dictionary& d, const Matrix& batch,
                                          const std::vector<SparseCode>& codes) {
    if (static_cast<Eigen::Index>(codes.size()) != batch.rows())
        throw invalid_parameter("dictionary_gradient: codes/batch length mismatch");
    GradientRecord g;
    g.weights = Matrix::Zero(d.filter_dim(), d.num_filters());
    for (Eigen::Index n = 0; n < batch.rows(); ++n) {
        const auto& code = codes[static_cast<std::size_t>(n)];
        if (code.entries.empty()) continue;
        const Vector diff = reconstruct(d, code) - batch.row(n).transpose();
        for (const auto& e : code.entries)
            g.weights.col(e.filter) += 2.0 * e.coefficient * d.transforms.apply(e.transform, diff);
    }
    return g;
}

// One projected gradient step on the reconstruction objective with the codes
// held fixed; columns leaving the unit ball are renormalized.
inline Dictionary dictionary_update(const Dictionary& d, const Matrix& batch, const std::vector<SparseCode>& codes,
                                    double step) {
    const GradientRecord g = dictionary_gradient(d, batch, codes);
    Dictionary next = d;
    next.weights -= step * g.weights;
    for (int j = 0; j < next.num_filters(); ++j) {
        const double norm = next.weights.col(j).norm();
        if (norm > 1.0) next.weights.col(j) /= norm;
    }
    return next;
}

// Two-sided soft thresholding response, maximized over transformations:
// out_j = max_s max(w_j^T T_s v - alpha, 0), out_{j+K} the mirrored channel.
inline Vector threshold_encode(const Dictionary& d, const Vector& v, double alpha) {
    if (alpha < 0.0) throw invalid_parameter("threshold_encode: alpha must be >= 0");
    if (v.size() != d.input_dim()) throw invalid_parameter("threshold_encode: dimension mismatch");
    const int k = d.num_filters();
    Vector out = Vector::Zero(2 * k);
    for (int s = 0; s < d.num_transforms(); ++s) {
        const Vector responses = d.weights.transpose() * d.transforms.apply(s, v);
        for (int j = 0; j < k; ++j) {
            out[j] = std::max(out[j], responses[j] - alpha);
            out[j + k] = std::max(out[j + k], -responses[j] - alpha);
        }
    }
    return out;
}

inline Matrix threshold_encode_batch(const Dictionary& d, const Matrix& batch, double alpha) {
    if (alpha < 0.0) throw invalid_parameter("threshold_encode: alpha must be >= 0");
    if (batch.cols() != d.input_dim()) throw invalid_parameter("threshold_encode: dimension mismatch");
    const int k = d.num_filters();
    Matrix out = Matrix::Zero(batch.rows(), 2 * k);
    for (int s = 0; s < d.num_transforms(); ++s) {
        const Matrix responses = d.transforms.apply_batch(s, batch) * d.weights;
        out.leftCols(k) = out.leftCols(k).cwiseMax((responses.array() - alpha).matrix());
        out.rightCols(k) = out.rightCols(k).cwiseMax(((-responses).array() - alpha).matrix());
    }
    return out;
}

struct DictionaryTrainResult {
    Dictionary dictionary;
    std::vector<EpochMetrics> metrics;  // mean_pooled_activation = mean support fraction
};

// Alternating minimization: OMP codes with the dictionary fixed, one
// projected gradient step with the codes fixed. Columns start as random
// unit vectors drawn from Rng(seed, 0).
inline DictionaryTrainResult train_dictionary(TransformSet transforms, const PatchDataset& data, int num_filters,
                                              int gamma, int iterations, std::uint64_t seed) {
    if (data.count() == 0) throw invalid_parameter("train_dictionary: empty dataset");
    if (data.dim() != transforms.input_dim()) throw invalid_parameter("train_dictionary: dataset dimension mismatch");

    Dictionary d;
    d.weights = Matrix(transforms.filter_dim(), num_filters);
    d.transforms = std::move(transforms);
    Rng rng(seed, 0);
    for (int j = 0; j < num_filters; ++j) {
        for (int i = 0; i < d.filter_dim(); ++i) d.weights(i, j) = rng.normal();
        d.weights.col(j).normalize();
    }

    DictionaryTrainResult result;
    const double n = static_cast<double>(data.count());
    for (int iter = 0; iter < iterations; ++iter) {
        const auto started = std::chrono::steady_clock::now();
        std::vector<SparseCode> codes;
        codes.reserve(static_cast<std::size_t>(data.count()));
        double support_sum = 0.0;
        for (Eigen::Index i = 0; i < data.count(); ++i) {
            codes.push_back(encode_omp(d, data.patches.row(i).transpose(), gamma));
            support_sum += static_cast<double>(codes.back().entries.size());
        }
        d = dictionary_update(d, data.patches, codes, default_dictionary_step(d, codes));
        if (!d.weights.allFinite()) throw training_diverged("training diverged at iteration " + std::to_string(iter));

        EpochMetrics metrics;
        metrics.epoch = iter;
        metrics.reconstruction_error =
            coding_objective(d, data.patches, codes) / (n * static_cast<double>(data.dim()));
        metrics.mean_pooled_activation = support_sum / (n * static_cast<double>(num_filters));
        metrics.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.metrics.push_back(metrics);
    }
    result.dictionary = std::move(d);
    return result;
}

}  // namespace tifl
