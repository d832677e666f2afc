#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "tifl/autoencoder.hpp"
#include "tifl/checkpoint.hpp"
#include "tifl/classify.hpp"
#include "tifl/data.hpp"
#include "tifl/experiments.hpp"
#include "tifl/features.hpp"
#include "tifl/io.hpp"
#include "tifl/presets.hpp"
#include "tifl/rbm.hpp"
#include "tifl/sparse_coding.hpp"
#include "tifl/synthetic.hpp"
#include "tifl/viz.hpp"

namespace tifl {

namespace cli_detail {

struct SynthArgs {
    std::string out;
    std::string kind = "rot";
    std::string background = "none";
    std::string base_images;
    std::string base_labels;
    int count = 2000;
    std::uint64_t seed = 0;
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::string metrics;
    std::string model = "tirbm";
    std::string transforms = "identity";
    std::string preprocess = "none";
    std::string visible = "binary";
    std::string output_family = "sigmoid";
    int filters = 100;
    int epochs = 10;
    double learning_rate = 0.05;
    int batch = 100;
    int cd_steps = 1;
    double sparsity_target = 0.05;
    double sparsity_weight = 3.0;
    double init_scale = 0.01;
    int gamma = 1;
    int iterations = 10;
    std::uint64_t seed = 0;
};

struct ExtractArgs {
    std::string model;
    std::string data;
    std::string out;
    std::string pooling = "quadrant";
    int stride = 1;
    double alpha = 0.25;
};

struct ClassifyArgs {
    std::string train_features;
    std::string train_data;
    std::string test_features;
    std::string test_data;
    std::string results;
    std::string confusion;
    std::string dataset_name = "dataset";
    std::string model_name = "model";
    std::vector<double> reg_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    int folds = 5;
    std::uint64_t seed = 0;
};

struct EvalArgs {
    std::string experiment;
    std::string outdir;
    std::string background = "none";
    int train_count = 2000;
    int test_count = 1000;
    int filters = 100;
    int epochs = 20;
    std::uint64_t seed = 7;
};

struct VizArgs {
    std::string checkpoint;
    std::string out;
    int transform = -1;
};

inline VariationKind parse_variation(const std::string& name) {
    if (name == "rot") return VariationKind::rot;
    if (name == "scale") return VariationKind::scale;
    if (name == "trans") return VariationKind::trans;
    throw invalid_parameter("unknown variation kind: " + name);
}

inline BackgroundKind parse_background(const std::string& name) {
    return name == "random" ? BackgroundKind::random_uniform : BackgroundKind::none;
}

inline PreprocessKind parse_preprocess(const std::string& name) {
    if (name == "none") return PreprocessKind::none;
    if (name == "standardize") return PreprocessKind::per_patch_standardize;
    if (name == "zca") return PreprocessKind::zca_whiten;
    throw invalid_parameter("unknown preprocessing kind: " + name);
}

inline void run_synth(const SynthArgs& args) {
    PatchDataset base;
    if (!args.base_images.empty()) {
        base = load_idx(args.base_images, args.base_labels);
        if (args.count > 0 && base.count() > args.count) {
            base.patches.conservativeResize(args.count, Eigen::NoChange);
            if (base.labeled()) base.labels.resize(static_cast<std::size_t>(args.count));
        }
    } else {
        base = render_digits(args.count, args.seed);
    }
    const PatchDataset varied =
        synthesize_variation(base, parse_variation(args.kind), parse_background(args.background), args.seed + 1);
    save_dataset(args.out, varied);
    std::cout << "wrote " << varied.count() << " samples to " << args.out << "\n";
}

inline void run_train(const TrainArgs& args) {
    const PatchDataset raw = load_dataset(args.data);
    auto [prep, data] = fit_apply_preprocessing(raw, parse_preprocess(args.preprocess));

    const std::string preset = args.model == "rbm" ? "identity" : args.transforms;
    TransformSet transforms = build_transform_set(transform_preset(preset, data.extent, data.channels));

    TrainConfig cfg;
    cfg.learning_rate = args.learning_rate;
    cfg.batch_size = args.batch;
    cfg.epochs = args.epochs;
    cfg.cd_steps = args.cd_steps;
    cfg.sparsity_target = args.sparsity_target;
    cfg.sparsity_weight = args.sparsity_weight;
    cfg.weight_init_scale = args.init_scale;
    cfg.seed = args.seed;

    std::vector<EpochMetrics> metrics;
    if (args.model == "tirbm" || args.model == "rbm") {
        const VisibleFamily family =
            args.visible == "gaussian" ? VisibleFamily::gaussian_unit_variance : VisibleFamily::binary;
        TrainResult trained = train(init_tirbm(std::move(transforms), args.filters, family, cfg), data, cfg);
        save_checkpoint(args.out, trained.model);
        metrics = trained.metrics;
    } else if (args.model == "tiae") {
        const OutputFamily family =
            args.output_family == "linear" ? OutputFamily::linear_squared_error : OutputFamily::sigmoid_cross_entropy;
        TiaeTrainResult trained = train_tiae(init_tiae(std::move(transforms), args.filters, family, cfg), data, cfg);
        save_checkpoint(args.out, trained.model);
        metrics = trained.metrics;
    } else if (args.model == "tiomp") {
        DictionaryTrainResult trained =
            train_dictionary(std::move(transforms), data, args.filters, args.gamma, args.iterations, args.seed);
        save_checkpoint(args.out, trained.dictionary);
        metrics = trained.metrics;
    } else {
        throw invalid_parameter("unknown model: " + args.model);
    }
    save_preprocessing(args.out + ".tifp", prep);
    if (!args.metrics.empty()) append_metrics(args.metrics, metrics);
    std::cout << "wrote checkpoint " << args.out;
    if (!metrics.empty())
        std::cout << " (final reconstruction error " << metrics.back().reconstruction_error << ")";
    std::cout << "\n";
}

inline void run_extract(const ExtractArgs& args) {
    const AnyModel model = load_checkpoint(args.model);
    FeatureExtractor fx;
    const TransformSet* transforms = nullptr;
    if (const auto* m = std::get_if<TirbmModel>(&model)) {
        fx.encoder = *m;
        transforms = &m->transforms;
    } else if (const auto* m = std::get_if<TiaeModel>(&model)) {
        fx.encoder = *m;
        transforms = &m->transforms;
    } else {
        const auto& d = std::get<Dictionary>(model);
        fx.encoder = ThresholdCodec{d, args.alpha};
        transforms = &d.transforms;
    }
    fx.patch_extent = transforms->input_width;
    fx.channels = transforms->channels;
    fx.stride = args.stride;
    fx.pooling = args.pooling == "global" ? PoolingKind::global_average : PoolingKind::quadrant_average;
    if (std::filesystem::exists(args.model + ".tifp")) fx.preprocessing = load_preprocessing(args.model + ".tifp");

    const PatchDataset data = load_dataset(args.data);
    const Matrix features = extract_features(fx, data);
    save_features(args.out, features);
    std::cout << "wrote " << features.rows() << "x" << features.cols() << " features to " << args.out << "\n";
}

inline void run_classify(const ClassifyArgs& args) {
    const Matrix train_features = load_features(args.train_features);
    const PatchDataset train_data = load_dataset(args.train_data);
    if (!train_data.labeled()) throw invalid_parameter("classify: training dataset has no labels");

    const CrossValResult cv =
        cross_validate(train_features, train_data.labels, args.reg_grid, args.folds, args.seed);
    const SoftmaxClassifier classifier = fit_softmax(train_features, train_data.labels, cv.best_reg).first;

    std::cout << "cross-validation best reg " << cv.best_reg << "\n";
    if (args.test_features.empty()) return;

    const Matrix test_features = load_features(args.test_features);
    const PatchDataset test_data = load_dataset(args.test_data);
    const Evaluation eval = evaluate(classifier, test_features, test_data.labels);
    std::cout << "test accuracy " << eval.accuracy << " (error " << 1.0 - eval.accuracy << ")\n";
    if (!args.results.empty()) {
        write_results(args.results,
                      {{args.dataset_name, args.model_name, static_cast<int>(train_features.cols()), 0, cv.best_reg,
                        eval.accuracy, 1.0 - eval.accuracy}});
    }
    if (!args.confusion.empty()) write_confusion(args.confusion, eval.confusion);
}

inline void run_eval(const EvalArgs& args) {
    if (args.experiment == "pipeline-smoke") {
        PipelineSmokeOptions opt;
        opt.seed = args.seed;
        opt.outdir = args.outdir;
        const PipelineSmokeResult result = run_pipeline_smoke(opt);
        std::cout << "pooled feature dim " << result.pooled_feature_dim << ", threshold feature dim "
                  << result.threshold_feature_dim << "\n";
        return;
    }
    MnistExperimentOptions opt;
    if (args.experiment == "mnist-rot-small")
        opt.kind = VariationKind::rot;
    else if (args.experiment == "mnist-scale-small")
        opt.kind = VariationKind::scale;
    else if (args.experiment == "mnist-trans-small")
        opt.kind = VariationKind::trans;
    else
        throw invalid_parameter("unknown experiment: " + args.experiment);
    opt.background = parse_background(args.background);
    opt.train_count = args.train_count;
    opt.test_count = args.test_count;
    opt.num_filters = args.filters;
    opt.epochs = args.epochs;
    opt.seed = args.seed;
    opt.outdir = args.outdir;
    const MnistExperimentResult result = run_mnist_variation_experiment(opt);
    for (const auto& outcome : result.outcomes) {
        std::cout << result.dataset << " " << outcome.model << ": error " << outcome.error << ", accuracy "
                  << outcome.accuracy << ", reg " << outcome.reg << "\n";
    }
    if (!result.results_path.empty()) std::cout << "results written to " << result.results_path << "\n";
}

inline void run_viz(const VizArgs& args) {
    export_filter_grid(args.checkpoint, args.out, args.transform);
    std::cout << "wrote filter grid " << args.out << "\n";
}

}  // namespace cli_detail

// Command-line entry point. Exit codes: 0 success, 1 usage error, 2 runtime
// error; failures print a single "error: ..." line to stderr first.
inline int run_cli(int argc, const char* const* argv) {
    CLI::App app{"transformation-invariant feature learning toolkit"};
    app.require_subcommand(1);
    app.allow_config_extras(false);

    cli_detail::SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a digit-variation dataset");
    synth->set_config("--config");
    synth->allow_config_extras(false);
    synth->add_option("--out", synth_args.out, "output dataset file")->required();
    synth->add_option("--kind", synth_args.kind, "variation kind")
        ->check(CLI::IsMember({"rot", "scale", "trans"}));
    synth->add_option("--background", synth_args.background, "background fill")
        ->check(CLI::IsMember({"none", "random"}));
    synth->add_option("--base-images", synth_args.base_images, "IDX image file with base digits");
    synth->add_option("--base-labels", synth_args.base_labels, "IDX label file matching --base-images");
    synth->add_option("--count", synth_args.count, "sample count (rendered digits, or cap for IDX input)");
    synth->add_option("--seed", synth_args.seed, "generator seed");

    cli_detail::TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
    train_cmd->set_config("--config");
    train_cmd->allow_config_extras(false);
    train_cmd->add_option("--data", train_args.data, "training dataset file")->required();
    train_cmd->add_option("--out", train_args.out, "checkpoint output path")->required();
    train_cmd->add_option("--metrics", train_args.metrics, "append per-epoch metrics CSV here");
    train_cmd->add_option("--model", train_args.model, "model family")
        ->check(CLI::IsMember({"tirbm", "rbm", "tiae", "tiomp"}));
    train_cmd->add_option("--transforms", train_args.transforms, "transform preset name");
    train_cmd->add_option("--preprocess", train_args.preprocess, "patch preprocessing")
        ->check(CLI::IsMember({"none", "standardize", "zca"}));
    train_cmd->add_option("--visible", train_args.visible, "visible unit family (tirbm)")
        ->check(CLI::IsMember({"binary", "gaussian"}));
    train_cmd->add_option("--output-family", train_args.output_family, "decoder family (tiae)")
        ->check(CLI::IsMember({"sigmoid", "linear"}));
    train_cmd->add_option("--filters,--k", train_args.filters, "number of filters");
    train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
    train_cmd->add_option("--learning-rate", train_args.learning_rate, "SGD learning rate");
    train_cmd->add_option("--batch", train_args.batch, "minibatch size");
    train_cmd->add_option("--cd-steps", train_args.cd_steps, "contrastive divergence steps");
    train_cmd->add_option("--sparsity-target", train_args.sparsity_target, "target pooled activation");
    train_cmd->add_option("--sparsity-weight", train_args.sparsity_weight, "sparsity penalty weight");
    train_cmd->add_option("--init-scale", train_args.init_scale, "uniform weight init scale");
    train_cmd->add_option("--gamma", train_args.gamma, "OMP support budget (tiomp)");
    train_cmd->add_option("--iterations", train_args.iterations, "alternation count (tiomp)");
    train_cmd->add_option("--seed", train_args.seed, "training seed");

    cli_detail::ExtractArgs extract_args;
    auto* extract = app.add_subcommand("extract", "encode a dataset into a feature file");
    extract->set_config("--config");
    extract->allow_config_extras(false);
    extract->add_option("--model", extract_args.model, "checkpoint path")->required();
    extract->add_option("--data", extract_args.data, "dataset file to encode")->required();
    extract->add_option("--out", extract_args.out, "feature file output path")->required();
    extract->add_option("--pooling", extract_args.pooling, "spatial pooling")
        ->check(CLI::IsMember({"quadrant", "global"}));
    extract->add_option("--stride", extract_args.stride, "window stride in pixels");
    extract->add_option("--alpha", extract_args.alpha, "threshold for dictionary encoders");

    cli_detail::ClassifyArgs classify_args;
    auto* classify = app.add_subcommand("classify", "cross-validate and evaluate a softmax head");
    classify->set_config("--config");
    classify->allow_config_extras(false);
    classify->add_option("--train-features", classify_args.train_features, "training feature file")->required();
    classify->add_option("--train-data", classify_args.train_data, "training dataset file (labels)")->required();
    classify->add_option("--test-features", classify_args.test_features, "test feature file");
    classify->add_option("--test-data", classify_args.test_data, "test dataset file (labels)");
    classify->add_option("--reg-grid", classify_args.reg_grid, "regularization grid");
    classify->add_option("--folds", classify_args.folds, "cross-validation folds");
    classify->add_option("--seed", classify_args.seed, "fold assignment seed");
    classify->add_option("--results", classify_args.results, "results CSV output path");
    classify->add_option("--confusion", classify_args.confusion, "confusion matrix output path");
    classify->add_option("--dataset-name", classify_args.dataset_name, "dataset label for the results CSV");
    classify->add_option("--model-name", classify_args.model_name, "model label for the results CSV");

    cli_detail::EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "run a scripted end-to-end experiment");
    eval->set_config("--config");
    eval->allow_config_extras(false);
    eval->add_option("--experiment", eval_args.experiment, "experiment name")
        ->required()
        ->check(CLI::IsMember({"mnist-rot-small", "mnist-scale-small", "mnist-trans-small", "pipeline-smoke"}));
    eval->add_option("--outdir", eval_args.outdir, "output directory")->required();
    eval->add_option("--background", eval_args.background, "background fill for digit variants")
        ->check(CLI::IsMember({"none", "random"}));
    eval->add_option("--train-count", eval_args.train_count, "training sample count");
    eval->add_option("--test-count", eval_args.test_count, "test sample count");
    eval->add_option("--filters", eval_args.filters, "number of filters");
    eval->add_option("--epochs", eval_args.epochs, "training epochs");
    eval->add_option("--seed", eval_args.seed, "experiment seed");

    cli_detail::VizArgs viz_args;
    auto* viz = app.add_subcommand("viz", "export a checkpoint's filters as a PGM grid");
    viz->set_config("--config");
    viz->allow_config_extras(false);
    viz->add_option("--checkpoint", viz_args.checkpoint, "checkpoint path")->required();
    viz->add_option("--out", viz_args.out, "PGM output path")->required();
    viz->add_option("--transform", viz_args.transform, "render filters mapped through this transform index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 1;
    }

    CLI::App* active = app.get_subcommands().front();
    std::cout << "resolved config [" << active->get_name() << "]\n" << active->config_to_str(true, false);

    try {
        if (active == synth) cli_detail::run_synth(synth_args);
        else if (active == train_cmd) cli_detail::run_train(train_args);
        else if (active == extract) cli_detail::run_extract(extract_args);
        else if (active == classify) cli_detail::run_classify(classify_args);
        else if (active == eval) cli_detail::run_eval(eval_args);
        else if (active == viz) cli_detail::run_viz(viz_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }
    return 0;
}

}  // namespace tifl
