#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "tifl/checkpoint.hpp"
#include "tifl/classify.hpp"
#include "tifl/data.hpp"
#include "tifl/features.hpp"
#include "tifl/io.hpp"
#include "tifl/presets.hpp"
#include "tifl/rbm.hpp"
#include "tifl/sparse_coding.hpp"
#include "tifl/synthetic.hpp"

namespace tifl {

// Desk-scale digit-variation benchmark: a plain sparse RBM against the
// sparse TIRBM with the matching transform preset, identical budgets and
// seed policy, pooled-activation features into a cross-validated softmax.
struct MnistExperimentOptions {
    VariationKind kind = VariationKind::rot;
    BackgroundKind background = BackgroundKind::none;
    int train_count = 2000;
    int test_count = 1000;
    int num_filters = 100;
    int epochs = 20;
    double learning_rate = 0.05;
    int batch_size = 100;
    int cd_steps = 1;
    double sparsity_target = 0.05;
    double sparsity_weight = 3.0;
    std::vector<double> reg_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    int folds = 5;
    std::uint64_t seed = 7;
    std::string outdir;  // when set: checkpoints, metrics and results land here
};

struct ModelOutcome {
    std::string model;
    int num_filters = 0;
    int num_transforms = 0;
    double reg = 0.0;
    double accuracy = 0.0;
    double error = 0.0;
    double mean_pooled_activation = 0.0;  // over the varied training set, post-training
    std::string checkpoint_path;
};

struct MnistExperimentResult {
    std::string dataset;
    std::vector<ModelOutcome> outcomes;  // [0] = rbm baseline, [1] = tirbm
    std::string results_path;
};

namespace detail {

inline std::string variation_name(VariationKind kind) {
    switch (kind) {
        case VariationKind::rot:
            return "rot";
        case VariationKind::scale:
            return "scale";
        case VariationKind::trans:
            return "trans";
    }
    return "?";
}

inline std::string variation_preset(VariationKind kind) {
    switch (kind) {
        case VariationKind::rot:
            return "rot16";
        case VariationKind::scale:
            return "scale28-20";
        case VariationKind::trans:
            return "trans28-24";
    }
    return "identity";
}

}  // namespace detail

inline MnistExperimentResult run_mnist_variation_experiment(const MnistExperimentOptions& opt) {
    const PatchDataset base_train = render_digits(opt.train_count, opt.seed);
    const PatchDataset base_test = render_digits(opt.test_count, opt.seed + 1);
    const PatchDataset train_set = synthesize_variation(base_train, opt.kind, opt.background, opt.seed + 2);
    const PatchDataset test_set = synthesize_variation(base_test, opt.kind, opt.background, opt.seed + 3);

    MnistExperimentResult result;
    result.dataset = "mnist-" + detail::variation_name(opt.kind) + "-small" +
                     (opt.background == BackgroundKind::random_uniform ? "-bgrand" : "");
    if (!opt.outdir.empty()) std::filesystem::create_directories(opt.outdir);

    const std::pair<std::string, std::string> variants[] = {
        {"rbm", "identity"},
        {"tirbm", detail::variation_preset(opt.kind)},
    };
    std::vector<ResultRow> rows;
    for (const auto& [model_name, preset_name] : variants) {
        TrainConfig cfg;
        cfg.learning_rate = opt.learning_rate;
        cfg.batch_size = opt.batch_size;
        cfg.epochs = opt.epochs;
        cfg.cd_steps = opt.cd_steps;
        cfg.sparsity_target = opt.sparsity_target;
        cfg.sparsity_weight = opt.sparsity_weight;
        cfg.seed = opt.seed;

        TransformSet transforms = build_transform_set(transform_preset(preset_name, train_set.extent, 1));
        TirbmModel model = init_tirbm(std::move(transforms), opt.num_filters, VisibleFamily::binary, cfg);
        TrainResult trained = train(std::move(model), train_set, cfg);

        FeatureExtractor fx;
        fx.encoder = trained.model;
        fx.patch_extent = train_set.extent;
        fx.channels = 1;
        fx.pooling = PoolingKind::global_average;
        const Matrix train_features = extract_features(fx, train_set);
        const Matrix test_features = extract_features(fx, test_set);

        const CrossValResult cv = cross_validate(train_features, train_set.labels, opt.reg_grid, opt.folds, opt.seed);
        const SoftmaxClassifier classifier = fit_softmax(train_features, train_set.labels, cv.best_reg).first;
        const Evaluation eval = evaluate(classifier, test_features, test_set.labels);

        ModelOutcome outcome;
        outcome.model = model_name;
        outcome.num_filters = opt.num_filters;
        outcome.num_transforms = trained.model.num_transforms();
        outcome.reg = cv.best_reg;
        outcome.accuracy = eval.accuracy;
        outcome.error = 1.0 - eval.accuracy;
        outcome.mean_pooled_activation = train_features.mean();
        if (!opt.outdir.empty()) {
            outcome.checkpoint_path = opt.outdir + "/" + model_name + ".tifl";
            save_checkpoint(outcome.checkpoint_path, trained.model);
            append_metrics(opt.outdir + "/" + model_name + "_metrics.csv", trained.metrics);
            write_confusion(opt.outdir + "/" + model_name + "_confusion.txt", eval.confusion);
        }
        result.outcomes.push_back(outcome);
        rows.push_back({result.dataset, model_name, opt.num_filters, outcome.num_transforms, outcome.reg,
                        outcome.accuracy, outcome.error});
    }
    if (!opt.outdir.empty()) {
        result.results_path = opt.outdir + "/results.csv";
        write_results(result.results_path, rows);
    }
    return result;
}

// End-to-end patch pipeline on synthetic color images: ZCA-whitened patches,
// gaussian TIRBM and a gamma=1 dictionary, dense stride-1 extraction with
// quadrant pooling for the pooled path and two-sided thresholding for the
// dictionary path.
struct PipelineSmokeOptions {
    int image_count = 500;
    int image_extent = 32;
    int channels = 3;
    int patch_count = 10000;
    int patch_extent = 8;
    int num_filters = 32;
    int epochs = 3;
    int dict_patch_count = 2000;
    int dict_iterations = 3;
    double threshold_alpha = 0.25;
    std::uint64_t seed = 11;
    std::string outdir;
};

struct PipelineSmokeResult {
    int pooled_feature_dim = 0;     // 4K
    int threshold_feature_dim = 0;  // 4 * 2K
    std::string pooled_features_path;
    std::string threshold_features_path;
};

inline PipelineSmokeResult run_pipeline_smoke(const PipelineSmokeOptions& opt) {
    const PatchDataset images = render_texture_images(opt.image_count, opt.image_extent, opt.channels, opt.seed);
    const PatchDataset raw_patches = sample_patches(images, opt.patch_count, opt.patch_extent, opt.seed + 1);
    auto [prep, patches] = fit_apply_preprocessing(raw_patches, PreprocessKind::zca_whiten);

    TrainConfig cfg;
    cfg.learning_rate = 0.005;
    cfg.epochs = opt.epochs;
    cfg.seed = opt.seed;

    TransformSet transforms =
        build_transform_set(transform_preset("cifar-trans", opt.patch_extent, opt.channels));
    TirbmModel model =
        init_tirbm(transforms, opt.num_filters, VisibleFamily::gaussian_unit_variance, cfg);
    TrainResult trained = train(std::move(model), patches, cfg);

    FeatureExtractor pooled_fx;
    pooled_fx.encoder = trained.model;
    pooled_fx.patch_extent = opt.patch_extent;
    pooled_fx.channels = opt.channels;
    pooled_fx.pooling = PoolingKind::quadrant_average;
    pooled_fx.preprocessing = prep;
    const Matrix pooled_features = extract_features(pooled_fx, images);

    PatchDataset dict_patches = patches;
    dict_patches.patches = patches.patches.topRows(std::min<Eigen::Index>(opt.dict_patch_count, patches.count()));
    const DictionaryTrainResult dict =
        train_dictionary(transforms, dict_patches, opt.num_filters, 1, opt.dict_iterations, opt.seed + 2);

    FeatureExtractor threshold_fx;
    threshold_fx.encoder = ThresholdCodec{dict.dictionary, opt.threshold_alpha};
    threshold_fx.patch_extent = opt.patch_extent;
    threshold_fx.channels = opt.channels;
    threshold_fx.pooling = PoolingKind::quadrant_average;
    threshold_fx.preprocessing = prep;
    const Matrix threshold_features = extract_features(threshold_fx, images);

    PipelineSmokeResult result;
    result.pooled_feature_dim = static_cast<int>(pooled_features.cols());
    result.threshold_feature_dim = static_cast<int>(threshold_features.cols());
    if (!opt.outdir.empty()) {
        std::filesystem::create_directories(opt.outdir);
        result.pooled_features_path = opt.outdir + "/pooled_features.tifv";
        result.threshold_features_path = opt.outdir + "/threshold_features.tifv";
        save_features(result.pooled_features_path, pooled_features);
        save_features(result.threshold_features_path, threshold_features);
        save_checkpoint(opt.outdir + "/tirbm.tifl", trained.model);
        save_checkpoint(opt.outdir + "/tiomp.tifl", dict.dictionary);
        save_preprocessing(opt.outdir + "/preprocessing.tifp", prep);
        append_metrics(opt.outdir + "/tirbm_metrics.csv", trained.metrics);
        append_metrics(opt.outdir + "/tiomp_metrics.csv", dict.metrics);
    }
    return result;
}

}  // namespace tifl
