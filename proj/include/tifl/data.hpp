#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/rng.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

namespace detail {

inline std::uint32_t read_be_u32(std::istream& in, const std::string& what) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw parse_error("truncated IDX file while reading " + what);
    return (static_cast<std::uint32_t>(bytes[0]) << 24) | (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

}  // namespace detail

// Standard IDX image container (big-endian, magic 0x00000803). Pixel bytes
// are scaled to [0, 1].
inline PatchDataset load_idx_images(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open IDX file: " + path);
    const std::uint32_t magic = detail::read_be_u32(in, "magic");
    if (magic != 0x00000803u) throw parse_error("bad IDX image magic in " + path);
    const std::uint32_t count = detail::read_be_u32(in, "count");
    const std::uint32_t rows = detail::read_be_u32(in, "rows");
    const std::uint32_t cols = detail::read_be_u32(in, "cols");
    if (rows != cols) throw parse_error("IDX images must be square, got " + std::to_string(rows) + "x" + std::to_string(cols));

    PatchDataset data;
    data.extent = static_cast<int>(rows);
    data.channels = 1;
    data.range = ValueRange::unit_interval;
    data.patches = Matrix(count, rows * cols);
    std::vector<unsigned char> buffer(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
        if (!in) throw parse_error("truncated IDX payload in " + path);
        for (std::size_t k = 0; k < buffer.size(); ++k)
            data.patches(i, static_cast<Eigen::Index>(k)) = buffer[k] / 255.0;
    }
    data.provenance["source"] = path;
    return data;
}

// Standard IDX label container (magic 0x00000801).
inline std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open IDX file: " + path);
    const std::uint32_t magic = detail::read_be_u32(in, "magic");
    if (magic != 0x00000801u) throw parse_error("bad IDX label magic in " + path);
    const std::uint32_t count = detail::read_be_u32(in, "count");
    std::vector<unsigned char> buffer(count);
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size()));
    if (!in) throw parse_error("truncated IDX payload in " + path);
    return std::vector<int>(buffer.begin(), buffer.end());
}

// Loads an image file and, when given, the matching label file; the counts
// must agree.
inline PatchDataset load_idx(const std::string& images_path, const std::string& labels_path = "") {
    PatchDataset data = load_idx_images(images_path);
    if (!labels_path.empty()) {
        std::vector<int> labels = load_idx_labels(labels_path);
        if (static_cast<Eigen::Index>(labels.size()) != data.count())
            throw parse_error("IDX count mismatch: " + std::to_string(data.count()) + " images vs " +
                              std::to_string(labels.size()) + " labels");
        data.labels = std::move(labels);
    }
    return data;
}

enum class VariationKind { rot, scale, trans };
enum class BackgroundKind { none, random_uniform };

// Pixels above this value count as digit foreground, both for the
// no-truncation translation rule and for background noising.
inline constexpr double kForegroundThreshold = 0.1;

namespace detail {

// Per-sample geometric parameter draw; exposed so statistical tests can
// replay the exact stream the generator consumes.
inline double variation_parameter(VariationKind kind, Rng& rng) {
    switch (kind) {
        case VariationKind::rot:
            return rng.uniform(0.0, 6.283185307179586476925286766559);
        case VariationKind::scale:
            return rng.uniform(0.3, 1.0);
        case VariationKind::trans:
            return 0.0;  // translation draws integer offsets separately
    }
    return 0.0;
}

struct Bounds {
    int min_x = -1, max_x = -1, min_y = -1, max_y = -1;
    bool empty() const { return min_x < 0; }
};

inline Bounds foreground_bounds(const Vector& image, int width) {
    Bounds b;
    for (int y = 0; y < width; ++y) {
        for (int x = 0; x < width; ++x) {
            if (image[y * width + x] > kForegroundThreshold) {
                if (b.empty()) {
                    b.min_x = b.max_x = x;
                    b.min_y = b.max_y = y;
                } else {
                    b.min_x = std::min(b.min_x, x);
                    b.max_x = std::max(b.max_x, x);
                    b.min_y = std::min(b.min_y, y);
                    b.max_y = std::max(b.max_y, y);
                }
            }
        }
    }
    return b;
}

}  // namespace detail

// Digit-variation generator following the MNIST-variations recipes: random
// rotation in [0, 2pi), scale factor in [0.3, 1], or integer translations
// constrained to keep every foreground pixel in frame; optional uniform
// background noise added to background pixels only. Deterministic per seed;
// sample n draws from the derived stream Rng(seed, n), so geometry is
// unchanged by the background mode.
inline PatchDataset synthesize_variation(const PatchDataset& base, VariationKind kind, BackgroundKind background,
                                         std::uint64_t seed) {
    if (base.extent != 28 || base.channels != 1)
        throw invalid_parameter("synthesize_variation: expects 28x28 single-channel digits");
    const int width = base.extent;
    const double center = (width - 1) / 2.0;

    PatchDataset out;
    out.extent = base.extent;
    out.channels = 1;
    out.range = ValueRange::unit_interval;
    out.labels = base.labels;
    out.patches = Matrix(base.count(), base.dim());

    for (Eigen::Index n = 0; n < base.count(); ++n) {
        Rng rng(seed, static_cast<std::uint64_t>(n));
        const Vector src = base.patches.row(n).transpose();
        Vector dst = Vector::Zero(base.dim());
        switch (kind) {
            case VariationKind::rot: {
                const double theta = detail::variation_parameter(kind, rng);
                const SparseTransform rotation = make_rotation_2d(width, theta);
                dst = rotation.apply(src);
                break;
            }
            case VariationKind::scale: {
                const double factor = detail::variation_parameter(kind, rng);
                for (int y = 0; y < width; ++y)
                    for (int x = 0; x < width; ++x)
                        dst[y * width + x] = detail::bilinear_sample(src, width, center + (x - center) / factor,
                                                                     center + (y - center) / factor);
                break;
            }
            case VariationKind::trans: {
                const detail::Bounds b = detail::foreground_bounds(src, width);
                int dx = 0, dy = 0;
                if (!b.empty()) {
                    dx = static_cast<int>(rng.uniform_int(-b.min_x, width - 1 - b.max_x));
                    dy = static_cast<int>(rng.uniform_int(-b.min_y, width - 1 - b.max_y));
                }
                for (int y = 0; y < width; ++y) {
                    for (int x = 0; x < width; ++x) {
                        const int sx = x - dx;
                        const int sy = y - dy;
                        if (sx >= 0 && sx < width && sy >= 0 && sy < width) dst[y * width + x] = src[sy * width + sx];
                    }
                }
                break;
            }
        }
        if (background == BackgroundKind::random_uniform) {
            for (Eigen::Index i = 0; i < dst.size(); ++i)
                if (dst[i] <= kForegroundThreshold) dst[i] = std::min(1.0, dst[i] + rng.uniform());
        }
        out.patches.row(n) = dst.transpose();
    }

    out.provenance["source"] = base.provenance.count("source") ? base.provenance.at("source") : "base";
    out.provenance["kind"] = kind == VariationKind::rot ? "rot" : (kind == VariationKind::scale ? "scale" : "trans");
    out.provenance["seed"] = std::to_string(seed);
    out.provenance["params"] =
        std::string("background=") + (background == BackgroundKind::random_uniform ? "random_uniform" : "none");
    return out;
}

// Uniformly random square windows from a set of square images. Constant
// windows (variance below 1e-8) are rejected and resampled, at most 100
// retries per slot.
inline PatchDataset sample_patches(const PatchDataset& images, int count, int patch_extent, std::uint64_t seed) {
    if (count < 0) throw invalid_parameter("sample_patches: count must be >= 0");
    if (patch_extent < 1 || patch_extent > images.extent)
        throw invalid_parameter("sample_patches: patch extent exceeds image extent");
    const int width = images.extent;
    const int channels = images.channels;
    const int span = width - patch_extent;

    PatchDataset out;
    out.extent = patch_extent;
    out.channels = channels;
    out.range = images.range;
    out.patches = Matrix(count, static_cast<Eigen::Index>(patch_extent) * patch_extent * channels);
    out.provenance["source"] = images.provenance.count("source") ? images.provenance.at("source") : "images";
    out.provenance["kind"] = "patches";
    out.provenance["seed"] = std::to_string(seed);
    out.provenance["params"] = "extent=" + std::to_string(patch_extent);
    if (count == 0) return out;
    if (images.count() == 0) throw invalid_parameter("sample_patches: no source images");

    Rng rng(seed, 0);
    for (int i = 0; i < count; ++i) {
        bool accepted = false;
        for (int attempt = 0; attempt < 100 && !accepted; ++attempt) {
            const auto image = rng.uniform_int(0, images.count() - 1);
            const int y0 = static_cast<int>(rng.uniform_int(0, span));
            const int x0 = static_cast<int>(rng.uniform_int(0, span));
            Eigen::Index k = 0;
            for (int ch = 0; ch < channels; ++ch)
                for (int y = 0; y < patch_extent; ++y)
                    for (int x = 0; x < patch_extent; ++x)
                        out.patches(i, k++) = images.patches(image, ch * width * width + (y0 + y) * width + (x0 + x));
            const double mean = out.patches.row(i).mean();
            const double variance = (out.patches.row(i).array() - mean).square().mean();
            accepted = variance >= 1e-8;
        }
        if (!accepted) throw degenerate_data("sample_patches: retry cap hit on constant-intensity windows");
    }
    return out;
}

enum class PreprocessKind : std::uint32_t {
    none = 0,
    per_patch_standardize = 1,
    zca_whiten = 2,
};

// Fitted preprocessing statistics. Per-patch standardization is stateless;
// ZCA whitening stores the training mean and symmetric whitening matrix.
struct Preprocessing {
    PreprocessKind kind = PreprocessKind::none;
    Vector mean;
    Matrix whitening;
    double epsilon = 0.1;             // ZCA eigenvalue floor
    double variance_offset = 10.0;    // per-patch denominator offset

    Matrix apply(const Matrix& patches) const {
        switch (kind) {
            case PreprocessKind::none:
                return patches;
            case PreprocessKind::per_patch_standardize: {
                Matrix out = patches;
                for (Eigen::Index i = 0; i < out.rows(); ++i) {
                    const double mu = out.row(i).mean();
                    const double var = (out.row(i).array() - mu).square().mean();
                    out.row(i) = (out.row(i).array() - mu) / std::sqrt(var + variance_offset);
                }
                return out;
            }
            case PreprocessKind::zca_whiten: {
                if (patches.cols() != mean.size())
                    throw invalid_parameter("preprocessing: dimension mismatch at apply");
                return (patches.rowwise() - mean.transpose()) * whitening;
            }
        }
        return patches;
    }

    Vector apply(const Vector& patch) const { return apply(Matrix(patch.transpose())).row(0).transpose(); }
};

// Fits the requested preprocessing on `data` (training split only) and
// returns the fitted statistics together with the transformed dataset.
inline std::pair<Preprocessing, PatchDataset> fit_apply_preprocessing(const PatchDataset& data, PreprocessKind kind) {
    Preprocessing prep;
    prep.kind = kind;
    if (kind == PreprocessKind::zca_whiten) {
        if (data.count() < 2) throw invalid_parameter("fit_apply_preprocessing: need at least 2 samples");
        prep.mean = data.patches.colwise().mean().transpose();
        const Matrix centered = data.patches.rowwise() - prep.mean.transpose();
        const Matrix covariance = centered.transpose() * centered / static_cast<double>(data.count());
        Eigen::SelfAdjointEigenSolver<Matrix> eigen(covariance);
        const Vector scale =
            (eigen.eigenvalues().array().max(0.0) + prep.epsilon).rsqrt().matrix();
        prep.whitening = eigen.eigenvectors() * scale.asDiagonal() * eigen.eigenvectors().transpose();
    }
    PatchDataset out = data;
    out.patches = prep.apply(data.patches);
    if (kind != PreprocessKind::none) out.range = ValueRange::standardized;
    return {std::move(prep), std::move(out)};
}

inline PatchDataset apply_preprocessing(const Preprocessing& prep, const PatchDataset& data) {
    PatchDataset out = data;
    out.patches = prep.apply(data.patches);
    if (prep.kind != PreprocessKind::none) out.range = ValueRange::standardized;
    return out;
}

}  // namespace tifl
