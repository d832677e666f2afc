#pragma once

// Randomized property suites shared by the unit tests and the acceptance
// runner. Every oracle here recomputes expectations through dense matrices
// and explicit loops, independent of the library's batched paths.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "support/test_util.hpp"
#include "tifl/autoencoder.hpp"
#include "tifl/classify.hpp"
#include "tifl/rbm.hpp"
#include "tifl/sparse_coding.hpp"
#include "tifl/transforms.hpp"

namespace suites {

using testutil::Matrix;
using testutil::Vector;

struct SuiteReport {
    int cases = 0;
    int failures = 0;
    std::vector<std::string> messages;

    void check(bool ok, const std::string& what) {
        ++cases;
        if (!ok) {
            ++failures;
            if (messages.size() < 8) messages.push_back(what);
        }
    }

    bool passed() const { return failures == 0; }
};

// ---- criterion 1: transform operator properties ----

inline void check_transform_case(SuiteReport& report, const tifl::SparseTransform& t, tifl::Rng& rng,
                                 const std::string& label) {
    // structural invariants
    bool indices_ok = true;
    bool sorted_ok = true;
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const auto& e = t.entries[i];
        indices_ok = indices_ok && e.row >= 0 && e.row < t.rows && e.col >= 0 && e.col < t.cols;
        if (i > 0) {
            const auto& prev = t.entries[i - 1];
            sorted_ok = sorted_ok && (prev.row < e.row || (prev.row == e.row && prev.col < e.col));
        }
    }
    report.check(indices_ok, label + ": entry index out of range");
    report.check(sorted_ok, label + ": entries not strictly sorted by (row, col)");

    std::vector<int> per_row(static_cast<std::size_t>(t.rows), 0);
    std::vector<double> row_sum(static_cast<std::size_t>(t.rows), 0.0);
    bool weights_ok = true;
    for (const auto& e : t.entries) {
        per_row[static_cast<std::size_t>(e.row)] += 1;
        row_sum[static_cast<std::size_t>(e.row)] += e.weight;
        if (t.kind == tifl::TransformKind::rotation2d || t.kind == tifl::TransformKind::scaling2d)
            weights_ok = weights_ok && e.weight >= 0.0 && e.weight <= 1.0;
        else
            weights_ok = weights_ok && e.weight == 1.0;
    }
    report.check(weights_ok, label + ": weight outside its family range");
    bool row_rule_ok = true;
    bool unity_ok = true;
    const bool bilinear =
        t.kind == tifl::TransformKind::rotation2d || t.kind == tifl::TransformKind::scaling2d;
    for (int r = 0; r < t.rows; ++r) {
        const int count = per_row[static_cast<std::size_t>(r)];
        row_rule_ok = row_rule_ok && count <= (bilinear ? 4 : 1);
        if (bilinear && count > 0) unity_ok = unity_ok && std::abs(row_sum[static_cast<std::size_t>(r)] - 1.0) <= 1e-12;
    }
    report.check(row_rule_ok, label + ": too many entries in a row");
    if (bilinear) report.check(unity_ok, label + ": non-empty bilinear row does not sum to 1");

    // dense-matrix oracle and adjoint identity
    const Matrix dense = testutil::to_dense(t);
    const Vector x = testutil::random_vector(t.cols, rng);
    const Vector h = testutil::random_vector(t.rows, rng);
    const Vector forward = t.apply(x);
    const Vector backward = t.apply_adjoint(h);
    report.check((forward - dense * x).cwiseAbs().maxCoeff() <= 1e-12, label + ": apply differs from dense product");
    report.check((backward - dense.transpose() * h).cwiseAbs().maxCoeff() <= 1e-12,
                 label + ": adjoint differs from dense transpose");
    report.check(std::abs(forward.dot(h) - x.dot(backward)) <= 1e-9 * (1.0 + std::abs(forward.dot(h))),
                 label + ": <Tx,h> != <x,T^T h>");

    // exact value preservation for selection-style operators
    if (!bilinear) {
        bool exact = true;
        for (const auto& e : t.entries) exact = exact && forward[e.row] == x[e.col];
        report.check(exact, label + ": selection row not an exact copy");
    }
}

inline SuiteReport transform_property_suite(int cases, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    for (int i = 0; i < cases; ++i) {
        switch (i % 5) {
            case 0: {
                const int dim = static_cast<int>(rng.uniform_int(3, 40));
                const int offset = static_cast<int>(rng.uniform_int(-(dim - 1), dim - 1));
                check_transform_case(report, tifl::make_shift_1d(dim, offset), rng, "shift1d");
                break;
            }
            case 1: {
                const int r = static_cast<int>(rng.uniform_int(4, 16));
                const int w = static_cast<int>(rng.uniform_int(2, r));
                const int dx = static_cast<int>(rng.uniform_int(0, r - w));
                const int dy = static_cast<int>(rng.uniform_int(0, r - w));
                check_transform_case(report, tifl::make_translation_2d(r, w, dx, dy), rng, "translation2d");
                break;
            }
            case 2: {
                const int w = static_cast<int>(rng.uniform_int(3, 14));
                const double theta = rng.uniform(0.0, 6.283185307179586);
                check_transform_case(report, tifl::make_rotation_2d(w, theta), rng, "rotation2d");
                break;
            }
            case 3: {
                const int r = static_cast<int>(rng.uniform_int(6, 14));
                const int w = static_cast<int>(rng.uniform_int(2, r));
                const double theta = rng.uniform(-1.0, 1.0);
                check_transform_case(report, tifl::make_rotation_2d(r, w, theta), rng, "rotation2d-windowed");
                break;
            }
            default: {
                const int r = static_cast<int>(rng.uniform_int(4, 16));
                const int w = static_cast<int>(rng.uniform_int(2, r));
                const int gs = static_cast<int>(rng.uniform_int(1, 3));
                const int level = static_cast<int>(rng.uniform_int(0, (r - w) / gs));
                check_transform_case(report, tifl::make_scaling_2d(r, w, level, gs), rng, "scaling2d");
                break;
            }
        }

        if (i % 50 == 0) {
            // quarter-turn rotations on odd grids are exact permutations
            const int w = 2 * static_cast<int>(rng.uniform_int(1, 6)) + 1;
            const tifl::SparseTransform quarter = tifl::make_rotation_2d(w, 1.5707963267948966);
            const Vector x = testutil::random_vector(w * w, rng);
            const Vector y = quarter.apply(x);
            bool permutation_ok = static_cast<int>(quarter.entries.size()) == w * w;
            for (const auto& e : quarter.entries) permutation_ok = permutation_ok && e.weight == 1.0;
            bool values_ok = true;
            for (int py = 0; py < w && values_ok; ++py)
                for (int px = 0; px < w; ++px)
                    if (y[py * w + px] != x[(w - 1 - px) * w + py]) {
                        values_ok = false;
                        break;
                    }
            report.check(permutation_ok, "quarter rotation is not a permutation matrix");
            report.check(values_ok, "quarter rotation output mismatches the index oracle");
        }

        if (i % 200 == 0) {
            // constant-image partition of unity through scaling
            const tifl::SparseTransform zoom = tifl::make_scaling_2d(8, 4, 0, 2);
            const Vector constant = Vector::Constant(64, 0.7);
            report.check((zoom.apply(constant).array() - 0.7).abs().maxCoeff() <= 1e-12,
                         "scaling does not preserve constants");
        }
    }
    return report;
}

// Rotation by theta then -theta on a smooth disc-supported image; the
// round trip must stay within bilinear smoothing error.
inline SuiteReport rotation_roundtrip_suite(int cases, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int w = 20;
    for (int i = 0; i < cases; ++i) {
        Vector image(w * w);
        for (Eigen::Index k = 0; k < image.size(); ++k) image[k] = rng.uniform();
        // separable 5-tap binomial blur, applied twice
        for (int pass = 0; pass < 2; ++pass) {
            const double kernel[5] = {1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
            Vector tmp = Vector::Zero(w * w);
            for (int y = 0; y < w; ++y)
                for (int x = 0; x < w; ++x)
                    for (int k = -2; k <= 2; ++k) {
                        const int xx = std::clamp(x + k, 0, w - 1);
                        tmp[y * w + x] += kernel[k + 2] * image[y * w + xx];
                    }
            image = Vector::Zero(w * w);
            for (int y = 0; y < w; ++y)
                for (int x = 0; x < w; ++x)
                    for (int k = -2; k <= 2; ++k) {
                        const int yy = std::clamp(y + k, 0, w - 1);
                        image[y * w + x] += kernel[k + 2] * tmp[yy * w + x];
                    }
        }
        const double center = (w - 1) / 2.0;
        const double radius = w / 2.0 - 2.0;
        for (int y = 0; y < w; ++y)
            for (int x = 0; x < w; ++x)
                if ((x - center) * (x - center) + (y - center) * (y - center) > radius * radius)
                    image[y * w + x] = 0.0;

        const double theta = rng.uniform(0.0, 6.283185307179586);
        const Vector back = tifl::make_rotation_2d(w, -theta).apply(tifl::make_rotation_2d(w, theta).apply(image));
        const double rms = std::sqrt((back - image).squaredNorm() / static_cast<double>(w * w));
        std::ostringstream message;
        message << "rotation roundtrip RMS " << rms << " at theta " << theta;
        report.check(rms <= 0.15, message.str());
    }
    return report;
}

// ---- criterion 2: reduction oracles ----

inline SuiteReport rbm_reduction_suite(int cases, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int input_dim = 8;
    const int filters = 5;
    tifl::TransformSetSpec spec;
    spec.input_width = input_dim;
    spec.filter_width = input_dim;
    spec.one_dimensional = true;
    spec.families.push_back({tifl::TransformKind::identity, {}, {}, 0});

    for (int i = 0; i < cases; ++i) {
        tifl::TirbmModel m;
        m.transforms = tifl::build_transform_set(spec);
        m.weights = testutil::random_matrix(input_dim, filters, rng);
        m.hidden_bias = testutil::random_matrix(filters, 1, rng);
        m.visible_bias = testutil::random_vector(input_dim, rng);

        const Vector v = testutil::random_vector(input_dim, rng, 0.0, 1.0);
        const Matrix probs = tifl::hidden_conditional(m, v);
        const Vector pooled = tifl::pooled_activation(m, v);
        bool hidden_ok = true;
        for (int j = 0; j < filters; ++j) {
            const double expected = tifl::sigmoid(m.weights.col(j).dot(v) + m.hidden_bias(j, 0));
            hidden_ok = hidden_ok && std::abs(probs(j, 0) - expected) <= 1e-12 &&
                        std::abs(pooled[j] - expected) <= 1e-12;
        }
        report.check(hidden_ok, "S=1 hidden conditional differs from the sigmoid formula");

        tifl::HiddenState h = tifl::HiddenState::all_off(filters);
        for (int j = 0; j < filters; ++j)
            if (rng.bernoulli(0.5)) h.active[static_cast<std::size_t>(j)] = 0;
        const Vector visible = tifl::visible_conditional(m, h);
        bool visible_ok = true;
        for (int d = 0; d < input_dim; ++d) {
            double pre = m.visible_bias[d];
            for (int j = 0; j < filters; ++j)
                if (h.active[static_cast<std::size_t>(j)] == 0) pre += m.weights(d, j);
            visible_ok = visible_ok && std::abs(visible[d] - tifl::sigmoid(pre)) <= 1e-12;
        }
        report.check(visible_ok, "S=1 visible conditional differs from the sigmoid formula");

        // CD against an independent plain-RBM implementation on an identical
        // random stream
        const int batch_size = 6;
        const int cd_steps = 1 + i % 3;
        Matrix batch(batch_size, input_dim);
        for (int n = 0; n < batch_size; ++n) batch.row(n) = testutil::random_binary_vector(input_dim, rng).transpose();

        tifl::Rng lib_stream(seed + 1000 + static_cast<std::uint64_t>(i));
        tifl::Rng oracle_stream(seed + 1000 + static_cast<std::uint64_t>(i));
        const tifl::CdResult lib = tifl::cd_gradient(m, batch, cd_steps, lib_stream);

        auto rbm_probs = [&](const Matrix& rows) {
            Matrix p = rows * m.weights;
            p.rowwise() += m.hidden_bias.col(0).transpose();
            return p.unaryExpr([](double z) { return tifl::sigmoid(z); });
        };
        const Matrix pos = rbm_probs(batch);
        Matrix chain = batch;
        for (int step = 0; step < cd_steps; ++step) {
            const Matrix step_probs = rbm_probs(chain);
            Matrix hidden(batch_size, filters);
            for (int n = 0; n < batch_size; ++n)
                for (int j = 0; j < filters; ++j) hidden(n, j) = oracle_stream.uniform() < step_probs(n, j) ? 1.0 : 0.0;
            chain = hidden * m.weights.transpose();
            chain.rowwise() += m.visible_bias.transpose();
            chain = chain.unaryExpr([](double z) { return tifl::sigmoid(z); });
        }
        const Matrix neg = rbm_probs(chain);
        const Matrix grad_w = (batch.transpose() * pos - chain.transpose() * neg) / batch_size;
        const Vector grad_b = (pos.colwise().mean() - neg.colwise().mean()).transpose();
        const Vector grad_c = (batch.colwise().mean() - chain.colwise().mean()).transpose();
        report.check(testutil::relative_error(lib.gradient.weights, grad_w) <= 1e-12 &&
                         testutil::relative_error(lib.gradient.hidden_bias, grad_b) <= 1e-12 &&
                         testutil::relative_error(lib.gradient.visible_bias, grad_c) <= 1e-12,
                     "S=1 CD gradient differs from the plain-RBM oracle");
    }
    return report;
}

inline SuiteReport omp_reduction_suite(int cases, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int input_dim = 10;
    const int filters = 6;
    tifl::TransformSetSpec spec;
    spec.input_width = input_dim;
    spec.filter_width = input_dim;
    spec.one_dimensional = true;
    spec.families.push_back({tifl::TransformKind::identity, {}, {}, 0});

    for (int i = 0; i < cases; ++i) {
        tifl::Dictionary d;
        d.transforms = tifl::build_transform_set(spec);
        d.weights = testutil::random_matrix(input_dim, filters, rng);
        for (int j = 0; j < filters; ++j) d.weights.col(j) *= rng.uniform(0.3, 1.0) / d.weights.col(j).norm();
        const Vector v = testutil::random_vector(input_dim, rng);

        // gamma = 1: best single atom by correlation, least-squares coefficient
        const tifl::SparseCode code = tifl::encode_omp(d, v, 1);
        int best = 0;
        for (int j = 1; j < filters; ++j)
            if (std::abs(d.weights.col(j).dot(v)) > std::abs(d.weights.col(best).dot(v))) best = j;
        const double coeff = d.weights.col(best).dot(v) / d.weights.col(best).squaredNorm();
        report.check(code.entries.size() == 1 && code.entries[0].filter == best &&
                         std::abs(code.entries[0].coefficient - coeff) <= 1e-12 * std::max(1.0, std::abs(coeff)),
                     "OMP-1 disagrees with the brute-force best atom");

        // general gamma against a textbook OMP with normal-equation refits
        const int gamma = 3;
        const tifl::SparseCode full = tifl::encode_omp(d, v, gamma);
        std::vector<int> support;
        Vector residual = v;
        while (static_cast<int>(support.size()) < gamma && residual.norm() >= 1e-10) {
            int pick = -1;
            double pick_score = -1.0;
            for (int j = 0; j < filters; ++j) {
                if (std::find(support.begin(), support.end(), j) != support.end()) continue;
                const double score = std::abs(d.weights.col(j).dot(residual));
                if (score > pick_score) {
                    pick_score = score;
                    pick = j;
                }
            }
            if (pick < 0 || pick_score == 0.0) break;
            support.push_back(pick);
            Matrix atoms(input_dim, support.size());
            for (std::size_t t = 0; t < support.size(); ++t) atoms.col(static_cast<Eigen::Index>(t)) = d.weights.col(support[t]);
            const Vector coeffs = (atoms.transpose() * atoms).ldlt().solve(atoms.transpose() * v);
            residual = v - atoms * coeffs;
        }
        bool support_ok = full.entries.size() == support.size();
        for (std::size_t t = 0; support_ok && t < support.size(); ++t)
            support_ok = full.entries[t].filter == support[t] && full.entries[t].transform == 0;
        report.check(support_ok, "OMP support differs from the textbook oracle");
        const Vector lib_residual = v - tifl::reconstruct(d, full);
        report.check(std::abs(lib_residual.norm() - residual.norm()) <= 1e-9,
                     "OMP residual differs from the textbook oracle");
    }
    return report;
}

// ---- criterion 3: gradient suites ----

inline tifl::TransformSet tiny_shift_set(int dim, int shifts) {
    tifl::TransformSetSpec spec;
    spec.input_width = dim;
    spec.filter_width = dim;
    spec.one_dimensional = true;
    tifl::TransformSetSpec::Family fam;
    fam.kind = tifl::TransformKind::shift1d;
    for (int s = 0; s < shifts; ++s) fam.shift_offsets.push_back(s);
    spec.families.push_back(fam);
    return tifl::build_transform_set(spec);
}

inline tifl::TirbmModel random_tiny_tirbm(int dim, int filters, int shifts, tifl::Rng& rng, double scale = 0.8) {
    tifl::TirbmModel m;
    m.transforms = tiny_shift_set(dim, shifts);
    m.weights = testutil::random_matrix(dim, filters, rng, -scale, scale);
    m.hidden_bias = testutil::random_matrix(filters, shifts, rng, -0.4, 0.4);
    m.visible_bias = testutil::random_vector(dim, rng, -0.4, 0.4);
    return m;
}

// P(h | v) recomputed with dense transforms and direct loops.
inline Matrix oracle_hidden_probs(const tifl::TirbmModel& m, const Vector& v) {
    const int filters = m.num_filters();
    const int transforms = m.num_transforms();
    Matrix probs(filters, transforms);
    for (int j = 0; j < filters; ++j) {
        double denom = 1.0;
        for (int s = 0; s < transforms; ++s) {
            const Matrix dense = testutil::to_dense(m.transforms[s]);
            probs(j, s) = std::exp(m.weights.col(j).dot(dense * v) + m.hidden_bias(j, s));
            denom += probs(j, s);
        }
        probs.row(j) /= denom;
    }
    return probs;
}

inline SuiteReport positive_phase_suite(int models, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int dim = 6, filters = 3, shifts = 2;
    for (int i = 0; i < models; ++i) {
        tifl::TirbmModel m = random_tiny_tirbm(dim, filters, shifts, rng);
        const Vector v = testutil::random_binary_vector(dim, rng);
        const Matrix frozen = oracle_hidden_probs(m, v);

        // implementation-side positive phase, assembled from Eq-7 probabilities
        const auto probs = tifl::hidden_conditional_batch(m, v.transpose());
        Matrix pos_w = Matrix::Zero(dim, filters);
        Matrix pos_b = Matrix::Zero(filters, shifts);
        for (int s = 0; s < shifts; ++s) {
            pos_w += m.transforms.apply(s, v) * probs[static_cast<std::size_t>(s)].row(0);
            pos_b.col(s) = probs[static_cast<std::size_t>(s)].row(0).transpose();
        }
        const Vector pos_c = v;

        // expected energy under the frozen conditional, enumerated over all
        // hidden configurations
        auto expected_energy = [&]() {
            std::vector<int> state(static_cast<std::size_t>(filters), -1);
            double total = 0.0;
            const int options = shifts + 1;
            int configs = 1;
            for (int j = 0; j < filters; ++j) configs *= options;
            for (int c = 0; c < configs; ++c) {
                int rest = c;
                double weight = 1.0;
                double energy = -m.visible_bias.dot(v);
                for (int j = 0; j < filters; ++j) {
                    const int pick = rest % options;
                    rest /= options;
                    state[static_cast<std::size_t>(j)] = pick - 1;
                    if (pick == 0) {
                        weight *= 1.0 - frozen.row(j).sum();
                    } else {
                        const int s = pick - 1;
                        weight *= frozen(j, s);
                        const Matrix dense = testutil::to_dense(m.transforms[s]);
                        energy -= m.weights.col(j).dot(dense * v) + m.hidden_bias(j, s);
                    }
                }
                total += weight * energy;
            }
            return total;
        };

        const Matrix fd_w = testutil::finite_difference(m.weights, expected_energy);
        const Matrix fd_b = testutil::finite_difference(m.hidden_bias, expected_energy);
        const Vector fd_c = testutil::finite_difference(m.visible_bias, expected_energy);
        report.check(testutil::relative_error(pos_w, -fd_w) < 1e-6, "positive phase (weights) fails FD check");
        report.check(testutil::relative_error(pos_b, -fd_b) < 1e-6, "positive phase (hidden bias) fails FD check");
        report.check(testutil::relative_error(pos_c, -fd_c) < 1e-6, "positive phase (visible bias) fails FD check");
    }
    return report;
}

inline SuiteReport sparsity_gradient_suite(int models, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int dim = 6, filters = 3, shifts = 2, batch_size = 4;
    const double target = 0.2;
    for (int i = 0; i < models; ++i) {
        tifl::TirbmModel m = random_tiny_tirbm(dim, filters, shifts, rng);
        const Matrix batch = testutil::random_matrix(batch_size, dim, rng, 0.0, 1.0);

        auto loss = [&]() {
            Vector mean_pooled = Vector::Zero(filters);
            for (int n = 0; n < batch_size; ++n) {
                const Matrix probs = oracle_hidden_probs(m, batch.row(n).transpose());
                mean_pooled += probs.rowwise().sum();
            }
            mean_pooled /= static_cast<double>(batch_size);
            return (target - mean_pooled.array()).square().sum();
        };

        const tifl::GradientRecord grad = tifl::sparsity_gradient(m, batch, target);
        const Matrix fd_w = testutil::finite_difference(m.weights, loss);
        const Matrix fd_b = testutil::finite_difference(m.hidden_bias, loss);
        report.check(testutil::relative_error(grad.weights, fd_w) < 1e-6, "sparsity gradient (weights) fails FD check");
        report.check(testutil::relative_error(grad.hidden_bias, fd_b) < 1e-6,
                     "sparsity gradient (hidden bias) fails FD check");
        report.check(grad.visible_bias.norm() == 0.0, "sparsity gradient touches the visible bias");
    }
    return report;
}

inline SuiteReport tiae_gradient_suite(int models, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int dim = 6, filters = 3, shifts = 2, batch_size = 4;
    for (int i = 0; i < models; ++i) {
        tifl::TiaeModel m;
        m.transforms = tiny_shift_set(dim, shifts);
        m.weights = testutil::random_matrix(dim, filters, rng, -0.8, 0.8);
        m.hidden_bias = testutil::random_matrix(filters, shifts, rng, -0.4, 0.4);
        m.visible_bias = testutil::random_vector(dim, rng, -0.4, 0.4);
        m.output_family = (i % 2 == 0) ? tifl::OutputFamily::sigmoid_cross_entropy
                                       : tifl::OutputFamily::linear_squared_error;
        const Matrix batch = testutil::random_matrix(batch_size, dim, rng, 0.0, 1.0);

        const tifl::TiaeBatchStats stats = tifl::tiae_gradient(m, batch);
        auto loss = [&]() { return tifl::tiae_loss(m, batch); };
        const Matrix fd_w = testutil::finite_difference(m.weights, loss);
        const Matrix fd_b = testutil::finite_difference(m.hidden_bias, loss);
        const Vector fd_c = testutil::finite_difference(m.visible_bias, loss);
        report.check(testutil::relative_error(stats.gradient.weights, fd_w) < 1e-6,
                     "autoencoder gradient (weights) fails FD check");
        report.check(testutil::relative_error(stats.gradient.hidden_bias, fd_b) < 1e-6,
                     "autoencoder gradient (hidden bias) fails FD check");
        report.check(testutil::relative_error(stats.gradient.visible_bias, fd_c) < 1e-6,
                     "autoencoder gradient (visible bias) fails FD check");
    }
    return report;
}

inline SuiteReport dictionary_gradient_suite(int models, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int dim = 8, filters = 4, shifts = 2, batch_size = 5;
    for (int i = 0; i < models; ++i) {
        tifl::Dictionary d;
        d.transforms = tiny_shift_set(dim, shifts);
        d.weights = testutil::random_matrix(dim, filters, rng, -0.6, 0.6);

        Matrix batch = testutil::random_matrix(batch_size, dim, rng);
        std::vector<tifl::SparseCode> codes;
        for (int n = 0; n < batch_size; ++n) {
            tifl::SparseCode code;
            code.num_filters = filters;
            code.num_transforms = shifts;
            for (int j = 0; j < filters; ++j) {
                if (!rng.bernoulli(0.5)) continue;
                code.entries.push_back({j, static_cast<int>(rng.uniform_int(0, shifts - 1)), rng.uniform(-1.0, 1.0)});
                if (static_cast<int>(code.entries.size()) == 2) break;  // respect |H|_0 <= gamma
            }
            codes.push_back(code);
        }

        auto objective = [&]() {
            double total = 0.0;
            for (int n = 0; n < batch_size; ++n) {
                Vector recon = Vector::Zero(dim);
                for (const auto& e : codes[static_cast<std::size_t>(n)].entries)
                    recon += e.coefficient * testutil::to_dense(d.transforms[e.transform]).transpose() *
                             d.weights.col(e.filter);
                total += (recon - batch.row(n).transpose()).squaredNorm();
            }
            return total;
        };

        const tifl::GradientRecord grad = tifl::dictionary_gradient(d, batch, codes);
        const Matrix fd_w = testutil::finite_difference(d.weights, objective);
        report.check(testutil::relative_error(grad.weights, fd_w) < 1e-6, "dictionary gradient fails FD check");
    }
    return report;
}

inline SuiteReport softmax_gradient_suite(int models, std::uint64_t seed) {
    SuiteReport report;
    tifl::Rng rng(seed);
    const int samples = 12, dim = 5, classes = 3;
    const double reg = 0.05;
    for (int i = 0; i < models; ++i) {
        const Matrix features = testutil::random_matrix(samples, dim, rng);
        std::vector<int> labels(samples);
        for (int n = 0; n < samples; ++n) labels[static_cast<std::size_t>(n)] = static_cast<int>(rng.uniform_int(0, classes - 1));

        tifl::SoftmaxClassifier c;
        c.weights = testutil::random_matrix(dim, classes, rng, -0.5, 0.5);
        c.bias = testutil::random_vector(classes, rng, -0.5, 0.5);
        c.regularization = reg;

        auto objective = [&]() {
            double loss = 0.0;
            for (int n = 0; n < samples; ++n) {
                Vector logits = c.weights.transpose() * features.row(n).transpose() + c.bias;
                const double peak = logits.maxCoeff();
                const double lse = peak + std::log((logits.array() - peak).exp().sum());
                loss += lse - logits[labels[static_cast<std::size_t>(n)]];
            }
            return loss / samples + 0.5 * reg * c.weights.squaredNorm();
        };

        Matrix grad_w;
        Vector grad_b;
        tifl::detail::softmax_gradient(features, labels, c, reg, grad_w, grad_b);
        const Matrix fd_w = testutil::finite_difference(c.weights, objective);
        const Vector fd_b = testutil::finite_difference(c.bias, objective);
        report.check(testutil::relative_error(grad_w, fd_w) < 1e-6, "softmax gradient (weights) fails FD check");
        report.check(testutil::relative_error(grad_b, fd_b) < 1e-6, "softmax gradient (bias) fails FD check");
    }
    return report;
}

// Exact log-likelihood gradient by enumerating all 2^dim visible states,
// compared against CD by cosine similarity.
struct CdCosineReport {
    double mean_cosine = 0.0;
    std::vector<double> per_model;
};

inline CdCosineReport cd_enumeration_report(int models, int cd_steps, std::uint64_t seed) {
    CdCosineReport report;
    tifl::Rng rng(seed);
    const int dim = 6, filters = 2, shifts = 2, batch_size = 40;
    for (int i = 0; i < models; ++i) {
        tifl::TirbmModel m = random_tiny_tirbm(dim, filters, shifts, rng, 0.5);
        Matrix batch(batch_size, dim);
        for (int n = 0; n < batch_size; ++n) batch.row(n) = testutil::random_binary_vector(dim, rng).transpose();

        // positive statistics of one visible vector, oracle-side
        auto positive_terms = [&](const Vector& v, Matrix& dw, Matrix& db, Vector& dc) {
            const Matrix probs = oracle_hidden_probs(m, v);
            for (int s = 0; s < shifts; ++s) {
                const Matrix dense = testutil::to_dense(m.transforms[s]);
                dw += (dense * v) * probs.col(s).transpose();
            }
            db += probs;
            dc += v;
        };

        Matrix data_w = Matrix::Zero(dim, filters), model_w = Matrix::Zero(dim, filters);
        Matrix data_b = Matrix::Zero(filters, shifts), model_b = Matrix::Zero(filters, shifts);
        Vector data_c = Vector::Zero(dim), model_c = Vector::Zero(dim);
        for (int n = 0; n < batch_size; ++n) positive_terms(batch.row(n).transpose(), data_w, data_b, data_c);
        data_w /= batch_size;
        data_b /= batch_size;
        data_c /= batch_size;

        // model expectation over all visible configurations via free energies
        std::vector<double> log_weight(1u << dim);
        double peak = -1e300;
        for (std::uint32_t bits = 0; bits < (1u << dim); ++bits) {
            Vector v(dim);
            for (int d = 0; d < dim; ++d) v[d] = (bits >> d) & 1u ? 1.0 : 0.0;
            double free_energy = -m.visible_bias.dot(v);
            for (int j = 0; j < filters; ++j) {
                double acc = 1.0;
                for (int s = 0; s < shifts; ++s) {
                    const Matrix dense = testutil::to_dense(m.transforms[s]);
                    acc += std::exp(m.weights.col(j).dot(dense * v) + m.hidden_bias(j, s));
                }
                free_energy -= std::log(acc);
            }
            log_weight[bits] = -free_energy;
            peak = std::max(peak, log_weight[bits]);
        }
        double z = 0.0;
        for (double lw : log_weight) z += std::exp(lw - peak);
        for (std::uint32_t bits = 0; bits < (1u << dim); ++bits) {
            Vector v(dim);
            for (int d = 0; d < dim; ++d) v[d] = (bits >> d) & 1u ? 1.0 : 0.0;
            const double p = std::exp(log_weight[bits] - peak) / z;
            Matrix dw = Matrix::Zero(dim, filters), db = Matrix::Zero(filters, shifts);
            Vector dc = Vector::Zero(dim);
            positive_terms(v, dw, db, dc);
            model_w += p * dw;
            model_b += p * db;
            model_c += p * dc;
        }

        Vector exact(dim * filters + filters * shifts + dim);
        Vector approx(exact.size());
        Eigen::Index k = 0;
        const Matrix ew = data_w - model_w, eb = data_b - model_b;
        const Vector ec = data_c - model_c;

        tifl::Rng cd_stream(seed + 5000 + static_cast<std::uint64_t>(i));
        const tifl::CdResult cd = tifl::cd_gradient(m, batch, cd_steps, cd_stream);
        for (Eigen::Index idx = 0; idx < ew.size(); ++idx, ++k) {
            exact[k] = ew.reshaped()[idx];
            approx[k] = cd.gradient.weights.reshaped()[idx];
        }
        for (Eigen::Index idx = 0; idx < eb.size(); ++idx, ++k) {
            exact[k] = eb.reshaped()[idx];
            approx[k] = cd.gradient.hidden_bias.reshaped()[idx];
        }
        for (Eigen::Index idx = 0; idx < ec.size(); ++idx, ++k) {
            exact[k] = ec[idx];
            approx[k] = cd.gradient.visible_bias[idx];
        }
        report.per_model.push_back(exact.dot(approx) / (exact.norm() * approx.norm()));
    }
    for (double c : report.per_model) report.mean_cosine += c;
    report.mean_cosine /= static_cast<double>(models);
    return report;
}

}  // namespace suites
