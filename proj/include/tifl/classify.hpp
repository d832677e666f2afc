#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tifl/errors.hpp"
#include "tifl/rng.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

// Multinomial softmax head with L2-regularized weights (bias unregularized).
struct SoftmaxClassifier {
    Matrix weights;  // dim x classes
    Vector bias;     // classes
    double regularization = 0.0;

    int classes() const { return static_cast<int>(bias.size()); }
};

struct FitConfig {
    int max_iterations = 2000;
    double tolerance = 1e-4;   // gradient norm target
    double initial_step = 1.0;
};

struct FitReport {
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
    double objective = 0.0;
};

namespace detail {

inline Matrix class_probabilities(const Matrix& features, const SoftmaxClassifier& c) {
    Matrix logits = features * c.weights;
    logits.rowwise() += c.bias.transpose();
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        const double peak = logits.row(n).maxCoeff();
        logits.row(n) = (logits.row(n).array() - peak).exp();
        logits.row(n) /= logits.row(n).sum();
    }
    return logits;
}

inline double softmax_objective(const Matrix& features, const std::vector<int>& labels, const SoftmaxClassifier& c,
                                double reg) {
    Matrix logits = features * c.weights;
    logits.rowwise() += c.bias.transpose();
    double loss = 0.0;
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        const double peak = logits.row(n).maxCoeff();
        const double lse = peak + std::log((logits.row(n).array() - peak).exp().sum());
        loss += lse - logits(n, labels[static_cast<std::size_t>(n)]);
    }
    return loss / static_cast<double>(features.rows()) + 0.5 * reg * c.weights.squaredNorm();
}

inline void softmax_gradient(const Matrix& features, const std::vector<int>& labels, const SoftmaxClassifier& c,
                             double reg, Matrix& grad_weights, Vector& grad_bias) {
    Matrix probs = class_probabilities(features, c);
    for (Eigen::Index n = 0; n < probs.rows(); ++n) probs(n, labels[static_cast<std::size_t>(n)]) -= 1.0;
    const double n = static_cast<double>(features.rows());
    grad_weights = features.transpose() * probs / n + reg * c.weights;
    grad_bias = probs.colwise().sum().transpose() / n;
}

}  // namespace detail

// Deterministic full-batch gradient descent with Armijo backtracking from a
// zero start. Returns when the gradient norm drops below cfg.tolerance or
// the iteration budget runs out; the report says which.
inline std::pair<SoftmaxClassifier, FitReport> fit_softmax(const Matrix& features, const std::vector<int>& labels,
                                                           double reg, const FitConfig& cfg = {}) {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw invalid_parameter("fit_softmax: features/labels length mismatch");
    if (labels.empty()) throw invalid_parameter("fit_softmax: empty input");
    if (reg < 0.0) throw invalid_parameter("fit_softmax: regularization must be >= 0");
    int classes = 0;
    for (int label : labels) {
        if (label < 0) throw invalid_parameter("fit_softmax: negative label");
        classes = std::max(classes, label + 1);
    }
    if (classes < 2) throw invalid_parameter("fit_softmax: need at least two classes");
    if (features.rows() < classes) throw invalid_parameter("fit_softmax: fewer samples than classes");
    bool multiple = false;
    for (int label : labels)
        if (label != labels.front()) multiple = true;
    if (!multiple) throw invalid_parameter("fit_softmax: degenerate single-class input");

    SoftmaxClassifier c;
    c.weights = Matrix::Zero(features.cols(), classes);
    c.bias = Vector::Zero(classes);
    c.regularization = reg;

    double objective = detail::softmax_objective(features, labels, c, reg);
    double step = cfg.initial_step;
    Matrix grad_weights;
    Vector grad_bias;
    FitReport report;
    for (report.iterations = 0; report.iterations < cfg.max_iterations; ++report.iterations) {
        detail::softmax_gradient(features, labels, c, reg, grad_weights, grad_bias);
        const double grad_sq = grad_weights.squaredNorm() + grad_bias.squaredNorm();
        report.gradient_norm = std::sqrt(grad_sq);
        if (report.gradient_norm < cfg.tolerance) {
            report.converged = true;
            break;
        }
        // Armijo backtracking keeps the descent monotone.
        SoftmaxClassifier trial = c;
        double trial_objective = objective;
        for (int halvings = 0; halvings < 60; ++halvings) {
            trial.weights = c.weights - step * grad_weights;
            trial.bias = c.bias - step * grad_bias;
            trial_objective = detail::softmax_objective(features, labels, trial, reg);
            if (trial_objective <= objective - 1e-4 * step * grad_sq) break;
            step *= 0.5;
        }
        if (trial_objective >= objective) break;  // no further progress at any step size
        c = trial;
        objective = trial_objective;
        step *= 1.25;
    }
    report.objective = objective;
    return {std::move(c), report};
}

inline std::vector<int> predict(const SoftmaxClassifier& c, const Matrix& features) {
    if (features.cols() != c.weights.rows()) throw invalid_parameter("predict: dimension mismatch");
    Matrix logits = features * c.weights;
    logits.rowwise() += c.bias.transpose();
    std::vector<int> labels(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index n = 0; n < logits.rows(); ++n) {
        int best = 0;  // ties resolve to the lowest class index
        for (int k = 1; k < c.classes(); ++k)
            if (logits(n, k) > logits(n, best)) best = k;
        labels[static_cast<std::size_t>(n)] = best;
    }
    return labels;
}

struct Evaluation {
    double accuracy = 0.0;
    Matrix confusion;  // rows = true class, cols = predicted
};

inline Evaluation evaluate(const SoftmaxClassifier& c, const Matrix& features, const std::vector<int>& labels) {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw invalid_parameter("evaluate: features/labels length mismatch");
    const std::vector<int> predicted = predict(c, features);
    Evaluation eval;
    eval.confusion = Matrix::Zero(c.classes(), c.classes());
    Eigen::Index correct = 0;
    for (std::size_t n = 0; n < labels.size(); ++n) {
        if (labels[n] < 0 || labels[n] >= c.classes()) throw invalid_parameter("evaluate: label out of range");
        eval.confusion(labels[n], predicted[n]) += 1.0;
        if (labels[n] == predicted[n]) ++correct;
    }
    eval.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());
    return eval;
}

struct CrossValResult {
    double best_reg = 0.0;
    std::vector<double> grid;                        // deduplicated, ascending
    std::vector<double> mean_accuracy;               // per grid entry
    std::vector<std::vector<double>> fold_accuracy;  // per grid entry, per fold
};

// Stratified k-fold cross validation over a regularization grid. Folds are
// assigned by dealing each class's shuffled indices round-robin; ties in
// mean accuracy go to the smaller regularizer.
inline CrossValResult cross_validate(const Matrix& features, const std::vector<int>& labels,
                                     std::vector<double> reg_grid, int folds, std::uint64_t seed,
                                     const FitConfig& cfg = {}) {
    if (folds < 2) throw invalid_parameter("cross_validate: folds must be >= 2");
    if (reg_grid.empty()) throw invalid_parameter("cross_validate: empty grid");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw invalid_parameter("cross_validate: features/labels length mismatch");

    std::sort(reg_grid.begin(), reg_grid.end());
    reg_grid.erase(std::unique(reg_grid.begin(), reg_grid.end()), reg_grid.end());

    int classes = 0;
    for (int label : labels) classes = std::max(classes, label + 1);
    std::vector<std::vector<Eigen::Index>> by_class(static_cast<std::size_t>(classes));
    for (std::size_t n = 0; n < labels.size(); ++n) by_class[static_cast<std::size_t>(labels[n])].push_back(static_cast<Eigen::Index>(n));
    for (const auto& members : by_class)
        if (!members.empty() && static_cast<int>(members.size()) < folds)
            throw invalid_parameter("cross_validate: a class has fewer members than folds");

    Rng rng(seed, 0);
    std::vector<int> fold_of(labels.size(), 0);
    for (auto& members : by_class) {
        rng.shuffle(members);
        for (std::size_t i = 0; i < members.size(); ++i)
            fold_of[static_cast<std::size_t>(members[i])] = static_cast<int>(i % static_cast<std::size_t>(folds));
    }

    CrossValResult result;
    result.grid = reg_grid;
    result.mean_accuracy.assign(reg_grid.size(), 0.0);
    result.fold_accuracy.assign(reg_grid.size(), std::vector<double>(static_cast<std::size_t>(folds), 0.0));
    for (std::size_t g = 0; g < reg_grid.size(); ++g) {
        for (int fold = 0; fold < folds; ++fold) {
            std::vector<Eigen::Index> train_rows, test_rows;
            for (std::size_t n = 0; n < labels.size(); ++n)
                (fold_of[n] == fold ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(n));
            Matrix train_x(train_rows.size(), features.cols());
            Matrix test_x(test_rows.size(), features.cols());
            std::vector<int> train_y(train_rows.size()), test_y(test_rows.size());
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                train_x.row(static_cast<Eigen::Index>(i)) = features.row(train_rows[i]);
                train_y[i] = labels[static_cast<std::size_t>(train_rows[i])];
            }
            for (std::size_t i = 0; i < test_rows.size(); ++i) {
                test_x.row(static_cast<Eigen::Index>(i)) = features.row(test_rows[i]);
                test_y[i] = labels[static_cast<std::size_t>(test_rows[i])];
            }
            const auto [model, report] = fit_softmax(train_x, train_y, reg_grid[g], cfg);
            result.fold_accuracy[g][static_cast<std::size_t>(fold)] = evaluate(model, test_x, test_y).accuracy;
        }
        double sum = 0.0;
        for (double a : result.fold_accuracy[g]) sum += a;
        result.mean_accuracy[g] = sum / static_cast<double>(folds);
    }

    std::size_t best = 0;
    for (std::size_t g = 1; g < reg_grid.size(); ++g)
        if (result.mean_accuracy[g] > result.mean_accuracy[best]) best = g;
    result.best_reg = reg_grid[best];
    return result;
}

}  // namespace tifl
