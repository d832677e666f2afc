#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "support/suites.hpp"
#include "support/test_util.hpp"
#include "tifl/checkpoint.hpp"
#include "tifl/io.hpp"
#include "tifl/presets.hpp"
#include "tifl/viz.hpp"

using tifl::Matrix;
using tifl::Vector;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / ("tifl-io-" + std::to_string(std::rand()) + "-" +
                                                         std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

bool same_bytes(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::string ca((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string cb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    return !ca.empty() && ca == cb;
}

}  // namespace

TEST_CASE("checkpoint round trips") {
    TempDir dir;
    tifl::Rng rng(81);
    SECTION("TIRBM checkpoints regenerate transforms bit-identically") {
        tifl::TirbmModel m;
        m.transforms = tifl::build_transform_set(tifl::transform_preset("rot16", 12));
        m.weights = testutil::random_matrix(144, 7, rng);
        m.hidden_bias = testutil::random_matrix(7, 16, rng);
        m.visible_bias = testutil::random_vector(144, rng);
        m.visible_family = tifl::VisibleFamily::gaussian_unit_variance;
        tifl::save_checkpoint(dir.file("m.tifl"), m);

        const auto loaded = std::get<tifl::TirbmModel>(tifl::load_checkpoint(dir.file("m.tifl")));
        REQUIRE(loaded.weights == m.weights);
        REQUIRE(loaded.hidden_bias == m.hidden_bias);
        REQUIRE(loaded.visible_bias == m.visible_bias);
        REQUIRE(loaded.visible_family == m.visible_family);
        REQUIRE(loaded.transforms.size() == 16);
        for (int s = 0; s < 16; ++s) {
            REQUIRE(loaded.transforms[s].entries.size() == m.transforms[s].entries.size());
            for (std::size_t k = 0; k < m.transforms[s].entries.size(); ++k) {
                REQUIRE(loaded.transforms[s].entries[k].row == m.transforms[s].entries[k].row);
                REQUIRE(loaded.transforms[s].entries[k].col == m.transforms[s].entries[k].col);
                REQUIRE(loaded.transforms[s].entries[k].weight == m.transforms[s].entries[k].weight);
            }
        }

        // a second save of the reloaded model is byte-identical
        tifl::save_checkpoint(dir.file("m2.tifl"), loaded);
        REQUIRE(same_bytes(dir.file("m.tifl"), dir.file("m2.tifl")));
    }
    SECTION("autoencoder checkpoints carry their family tag") {
        tifl::TiaeModel m;
        m.transforms = tifl::build_transform_set(tifl::transform_preset("trans28-24", 28));
        m.weights = testutil::random_matrix(576, 3, rng);
        m.hidden_bias = testutil::random_matrix(3, 9, rng);
        m.visible_bias = testutil::random_vector(784, rng);
        m.output_family = tifl::OutputFamily::linear_squared_error;
        tifl::save_checkpoint(dir.file("ae.tifl"), m);
        const auto loaded = std::get<tifl::TiaeModel>(tifl::load_checkpoint(dir.file("ae.tifl")));
        REQUIRE(loaded.output_family == tifl::OutputFamily::linear_squared_error);
        REQUIRE(loaded.weights == m.weights);
    }
    SECTION("dictionary checkpoints store the weights only") {
        tifl::Dictionary d;
        d.transforms = tifl::build_transform_set(tifl::transform_preset("scale28-20", 28));
        d.weights = testutil::random_matrix(400, 5, rng);
        tifl::save_checkpoint(dir.file("d.tifl"), d);
        const auto loaded = std::get<tifl::Dictionary>(tifl::load_checkpoint(dir.file("d.tifl")));
        REQUIRE(loaded.weights == d.weights);
        REQUIRE(loaded.transforms.size() == 5);
    }
    SECTION("corrupt checkpoints raise parse errors") {
        std::ofstream(dir.file("junk.tifl"), std::ios::binary) << "not a checkpoint";
        REQUIRE_THROWS_AS(tifl::load_checkpoint(dir.file("junk.tifl")), tifl::parse_error);
    }
}

TEST_CASE("preprocessing round trips") {
    TempDir dir;
    tifl::Rng rng(82);
    tifl::PatchDataset data;
    data.extent = 3;
    data.patches = testutil::random_matrix(40, 9, rng);
    const auto [prep, out] = tifl::fit_apply_preprocessing(data, tifl::PreprocessKind::zca_whiten);
    tifl::save_preprocessing(dir.file("p.tifp"), prep);
    const tifl::Preprocessing loaded = tifl::load_preprocessing(dir.file("p.tifp"));
    REQUIRE(loaded.kind == tifl::PreprocessKind::zca_whiten);
    REQUIRE(loaded.mean == prep.mean);
    REQUIRE(loaded.whitening == prep.whitening);
    REQUIRE(loaded.epsilon == prep.epsilon);
}

TEST_CASE("feature files") {
    TempDir dir;
    tifl::Rng rng(83);
    const Matrix features = testutil::random_matrix(17, 9, rng);
    tifl::save_features(dir.file("f.tifv"), features);
    const Matrix loaded = tifl::load_features(dir.file("f.tifv"));
    REQUIRE(loaded.rows() == 17);
    REQUIRE(loaded.cols() == 9);
    // stored as float32
    REQUIRE((loaded - features).cwiseAbs().maxCoeff() <= 1e-6);
    REQUIRE((loaded - features.cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);

    std::ofstream(dir.file("bad.tifv"), std::ios::binary) << "XXXX";
    REQUIRE_THROWS_AS(tifl::load_features(dir.file("bad.tifv")), tifl::parse_error);
}

TEST_CASE("dataset container") {
    TempDir dir;
    tifl::Rng rng(84);
    tifl::PatchDataset data;
    data.extent = 4;
    data.channels = 2;
    data.range = tifl::ValueRange::standardized;
    data.patches = testutil::random_matrix(6, 32, rng);
    data.labels = {0, 1, 2, 0, 1, 2};
    data.provenance = {{"source", "unit-test"}, {"kind", "fixture"}, {"seed", "9"}, {"params", "none"}};
    tifl::save_dataset(dir.file("d.tifd"), data);

    const tifl::PatchDataset loaded = tifl::load_dataset(dir.file("d.tifd"));
    REQUIRE(loaded.extent == 4);
    REQUIRE(loaded.channels == 2);
    REQUIRE(loaded.range == tifl::ValueRange::standardized);
    REQUIRE(loaded.labels == data.labels);
    REQUIRE((loaded.patches - data.patches).cwiseAbs().maxCoeff() <= 1e-6);
    REQUIRE(loaded.provenance.at("source") == "unit-test");
    REQUIRE(loaded.provenance.at("seed") == "9");
    REQUIRE(std::filesystem::exists(dir.file("d.tifd") + ".prov"));
}

TEST_CASE("metrics CSV") {
    TempDir dir;
    std::vector<tifl::EpochMetrics> metrics(2);
    metrics[0] = {0, 0.5, 0.04, 1.25};
    metrics[1] = {1, 0.25, 0.05, 1.5};
    tifl::append_metrics(dir.file("m.csv"), metrics);
    tifl::append_metrics(dir.file("m.csv"), {{2, 0.125, 0.06, 1.75}});

    std::ifstream in(dir.file("m.csv"));
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "epoch,reconstruction_error,mean_pooled_activation,wall_seconds");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == 3);
}

TEST_CASE("filter grid rendering") {
    TempDir dir;
    tifl::Rng rng(85);
    SECTION("four 6x6 filters tile into a 15x15 grid") {
        const Matrix filters = testutil::random_matrix(36, 4, rng);
        const tifl::GrayImage image = tifl::render_filter_grid(filters, 6);
        REQUIRE(image.width == 15);
        REQUIRE(image.height == 15);
        // separators stay black
        for (int x = 0; x < 15; ++x) {
            REQUIRE(image.at(x, 0) == 0);
            REQUIRE(image.at(x, 7) == 0);
            REQUIRE(image.at(x, 14) == 0);
        }
    }
    SECTION("a constant filter renders mid-gray") {
        Matrix filters = testutil::random_matrix(16, 2, rng);
        filters.col(1).setConstant(0.3);
        const tifl::GrayImage image = tifl::render_filter_grid(filters, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) REQUIRE(image.at(6 + x, 1 + y) == 128);
    }
    SECTION("PGM files round-trip the rendered tiles exactly") {
        const Matrix filters = testutil::random_matrix(25, 3, rng);
        const tifl::GrayImage image = tifl::render_filter_grid(filters, 5);
        tifl::write_pgm(dir.file("g.pgm"), image);
        const tifl::GrayImage loaded = tifl::read_pgm(dir.file("g.pgm"));
        REQUIRE(loaded.width == image.width);
        REQUIRE(loaded.height == image.height);
        REQUIRE(loaded.pixels == image.pixels);
        // recompute tile 0's normalization independently
        const double lo = filters.col(0).minCoeff();
        const double hi = filters.col(0).maxCoeff();
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x) {
                const auto expected =
                    static_cast<std::uint8_t>(std::lround(255.0 * (filters(y * 5 + x, 0) - lo) / (hi - lo)));
                REQUIRE(loaded.at(1 + x, 1 + y) == expected);
            }
    }
    SECTION("checkpoint export renders transformed banks at input resolution") {
        tifl::TirbmModel m;
        m.transforms = tifl::build_transform_set(tifl::transform_preset("trans28-24", 28));
        m.weights = testutil::random_matrix(576, 4, rng);
        m.hidden_bias = Matrix::Zero(4, 9);
        m.visible_bias = Vector::Zero(784);
        tifl::save_checkpoint(dir.file("m.tifl"), m);

        tifl::export_filter_grid(dir.file("m.tifl"), dir.file("raw.pgm"));
        const tifl::GrayImage raw = tifl::read_pgm(dir.file("raw.pgm"));
        REQUIRE(raw.width == 2 * 24 + 3);

        tifl::export_filter_grid(dir.file("m.tifl"), dir.file("mapped.pgm"), 3);
        const tifl::GrayImage mapped = tifl::read_pgm(dir.file("mapped.pgm"));
        REQUIRE(mapped.width == 2 * 28 + 3);
    }
}
