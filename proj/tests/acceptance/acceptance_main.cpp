// Acceptance runner: executes every acceptance criterion at its stated
// tolerance and prints one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support/suites.hpp"
#include "tifl/experiments.hpp"
#include "tifl/io.hpp"

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int failures = 0;

void report(int id, const std::string& name, bool pass, double seconds, const std::string& detail) {
    std::printf("criterion %d [%s] (%.1fs) %s — %s\n", id, pass ? "PASS" : "FAIL", seconds, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::string format_error(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", value);
    return buffer;
}

}  // namespace

int main() {
    const auto scratch = std::filesystem::temp_directory_path() /
                         ("tifl-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(scratch);

    // 1. operator property suite
    {
        Stopwatch timer;
        auto report1 = suites::transform_property_suite(1100, 90011);
        const auto roundtrip = suites::rotation_roundtrip_suite(5, 90012);
        report1.failures += roundtrip.failures;
        report1.cases += roundtrip.cases;
        const double elapsed = timer.seconds();
        std::ostringstream detail;
        detail << report1.cases << " checks over 1100 randomized operators, " << report1.failures << " failures";
        for (const auto& m : report1.messages) detail << "; " << m;
        report(1, "operator property suite", report1.failures == 0 && elapsed < 10.0, elapsed, detail.str());
    }

    // 2. reduction oracles
    {
        Stopwatch timer;
        const auto rbm = suites::rbm_reduction_suite(100, 90021);
        const auto omp = suites::omp_reduction_suite(100, 90022);
        const double elapsed = timer.seconds();
        std::ostringstream detail;
        detail << "plain-RBM reduction failures " << rbm.failures << ", OMP reduction failures " << omp.failures;
        for (const auto& m : rbm.messages) detail << "; " << m;
        for (const auto& m : omp.messages) detail << "; " << m;
        report(2, "S=1 reduction oracles", rbm.failures == 0 && omp.failures == 0 && elapsed < 30.0, elapsed,
               detail.str());
    }

    // 3. gradient suites and the enumerated-likelihood CD check
    {
        Stopwatch timer;
        const auto positive = suites::positive_phase_suite(20, 90031);
        const auto sparsity = suites::sparsity_gradient_suite(20, 90032);
        const auto autoenc = suites::tiae_gradient_suite(20, 90033);
        const auto dict = suites::dictionary_gradient_suite(20, 90034);
        const auto softmax = suites::softmax_gradient_suite(20, 90035);
        const auto cd = suites::cd_enumeration_report(20, 50, 90036);
        const double elapsed = timer.seconds();
        const int total_failures =
            positive.failures + sparsity.failures + autoenc.failures + dict.failures + softmax.failures;
        std::ostringstream detail;
        detail << "FD failures " << total_failures << "; CD(50) mean cosine " << cd.mean_cosine;
        report(3, "gradient suites", total_failures == 0 && cd.mean_cosine > 0.9 && elapsed < 300.0, elapsed,
               detail.str());
    }

    // 4. scaled mnist-rot reproduction, kept for criteria 6 and 7
    tifl::MnistExperimentResult rot_result;
    {
        Stopwatch timer;
        tifl::MnistExperimentOptions opt;
        opt.kind = tifl::VariationKind::rot;
        opt.outdir = (scratch / "rot-a").string();
        rot_result = tifl::run_mnist_variation_experiment(opt);
        const double elapsed = timer.seconds();
        const double rbm_error = rot_result.outcomes[0].error;
        const double tirbm_error = rot_result.outcomes[1].error;
        std::ostringstream detail;
        detail << "rbm error " << format_error(rbm_error) << ", tirbm error " << format_error(tirbm_error)
               << ", ratio " << format_error(tirbm_error / rbm_error) << " (need <= 0.75)";
        report(4, "mnist-rot-small directional reproduction",
               tirbm_error <= 0.75 * rbm_error && elapsed < 1800.0, elapsed, detail.str());
    }

    // 5. trans and scale variants
    {
        Stopwatch timer;
        tifl::MnistExperimentOptions opt;
        opt.kind = tifl::VariationKind::trans;
        opt.outdir = (scratch / "trans").string();
        const auto trans = tifl::run_mnist_variation_experiment(opt);
        const double trans_elapsed = timer.seconds();

        Stopwatch scale_timer;
        opt.kind = tifl::VariationKind::scale;
        opt.outdir = (scratch / "scale").string();
        const auto scale = tifl::run_mnist_variation_experiment(opt);
        const double scale_elapsed = scale_timer.seconds();

        const bool trans_ok = trans.outcomes[1].error < trans.outcomes[0].error && trans_elapsed < 1800.0;
        const bool scale_ok = scale.outcomes[1].error <= scale.outcomes[0].error + 0.005 && scale_elapsed < 1800.0;
        std::ostringstream detail;
        detail << "trans rbm/tirbm " << format_error(trans.outcomes[0].error) << "/"
               << format_error(trans.outcomes[1].error) << " (strict improvement); scale rbm/tirbm "
               << format_error(scale.outcomes[0].error) << "/" << format_error(scale.outcomes[1].error)
               << " (non-inferiority +0.5pp)";
        report(5, "mnist-trans/scale variants", trans_ok && scale_ok, trans_elapsed + scale_elapsed, detail.str());
    }

    // 6. sparsity control on the criterion-4 models
    {
        Stopwatch timer;
        bool pass = true;
        std::ostringstream detail;
        for (const auto& outcome : rot_result.outcomes) {
            detail << outcome.model << " mean pooled activation " << format_error(outcome.mean_pooled_activation)
                   << "; ";
            pass = pass && outcome.mean_pooled_activation >= 0.025 && outcome.mean_pooled_activation <= 0.10;
        }
        detail << "band [0.025, 0.10]";
        report(6, "sparsity control", pass, timer.seconds(), detail.str());
    }

    // 7. determinism of the criterion-4 run
    {
        Stopwatch timer;
        tifl::MnistExperimentOptions opt;
        opt.kind = tifl::VariationKind::rot;
        opt.outdir = (scratch / "rot-b").string();
        const auto again = tifl::run_mnist_variation_experiment(opt);
        bool pass = true;
        for (std::size_t i = 0; i < again.outcomes.size(); ++i) {
            const std::string first = file_bytes(rot_result.outcomes[i].checkpoint_path);
            const std::string second = file_bytes(again.outcomes[i].checkpoint_path);
            pass = pass && !first.empty() && first == second;
            pass = pass && format_error(rot_result.outcomes[i].accuracy) == format_error(again.outcomes[i].accuracy);
        }
        report(7, "repeat run determinism", pass, timer.seconds(),
               pass ? "byte-identical checkpoints, identical printed accuracies"
                    : "checkpoints or accuracies differ between identical runs");
    }

    // 8. end-to-end pipeline smoke on synthetic color images
    {
        Stopwatch timer;
        bool pass = true;
        std::ostringstream detail;
        try {
            tifl::PipelineSmokeOptions opt;
            opt.outdir = (scratch / "smoke").string();
            const auto smoke = tifl::run_pipeline_smoke(opt);
            pass = smoke.pooled_feature_dim == 4 * opt.num_filters &&
                   smoke.threshold_feature_dim == 4 * 2 * opt.num_filters &&
                   std::filesystem::exists(smoke.pooled_features_path);
            detail << "pooled dim " << smoke.pooled_feature_dim << " (4K), threshold dim "
                   << smoke.threshold_feature_dim << " (8K) on 500 synthetic 32x32 color images";
        } catch (const std::exception& e) {
            pass = false;
            detail << "failed: " << e.what();
        }
        const double elapsed = timer.seconds();
        report(8, "patch pipeline smoke run", pass && elapsed < 600.0, elapsed, detail.str());
    }

    std::filesystem::remove_all(scratch);
    if (failures == 0) std::printf("all acceptance criteria passed\n");
    return failures;
}
