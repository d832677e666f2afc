#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tifl/autoencoder.hpp"
#include "tifl/data.hpp"
#include "tifl/errors.hpp"
#include "tifl/rbm.hpp"
#include "tifl/sparse_coding.hpp"

namespace tifl {

enum class PoolingKind : std::uint32_t {
    quadrant_average = 0,
    global_average = 1,
};

// Thresholded sparse-coding encoder: a dictionary plus its two-sided
// threshold.
struct ThresholdCodec {
    Dictionary dictionary;
    double alpha = 0.0;
};

// Patch-level encoder plus the extraction geometry. The feature dimension
// is the number of filters (pooled encoders) or twice that (two-sided
// thresholding) -- never filters x transformations.
struct FeatureExtractor {
    std::variant<TirbmModel, TiaeModel, ThresholdCodec> encoder;
    int patch_extent = 0;
    int channels = 1;
    int stride = 1;
    PoolingKind pooling = PoolingKind::quadrant_average;
    Preprocessing preprocessing;

    int feature_dim() const {
        if (const auto* m = std::get_if<TirbmModel>(&encoder)) return m->num_filters();
        if (const auto* m = std::get_if<TiaeModel>(&encoder)) return m->num_filters();
        return 2 * std::get<ThresholdCodec>(encoder).dictionary.num_filters();
    }

    int patch_dim() const { return patch_extent * patch_extent * channels; }
};

// Spatial grid of per-window feature vectors; row (y * width + x) holds the
// feature of the window anchored at (x, y).
struct FeatureMap {
    int height = 0;
    int width = 0;
    Matrix values;  // (height * width) x dim

    int dim() const { return static_cast<int>(values.cols()); }
};

namespace detail {

inline Matrix encode_patch_rows(const FeatureExtractor& fx, const Matrix& raw_patches) {
    const Matrix prepared = fx.preprocessing.apply(raw_patches);
    if (const auto* m = std::get_if<TirbmModel>(&fx.encoder)) return pooled_activation_batch(*m, prepared);
    if (const auto* m = std::get_if<TiaeModel>(&fx.encoder)) return pooled_encode_batch(*m, prepared);
    const auto& codec = std::get<ThresholdCodec>(fx.encoder);
    return threshold_encode_batch(codec.dictionary, prepared, codec.alpha);
}

}  // namespace detail

// Invariant feature of one preprocessed-geometry patch (preprocessing is
// applied internally, mirroring training).
inline Vector patch_feature(const FeatureExtractor& fx, const Vector& patch) {
    if (patch.size() != fx.patch_dim()) throw invalid_parameter("patch_feature: geometry mismatch");
    return detail::encode_patch_rows(fx, patch.transpose()).row(0).transpose();
}

// Features of every patch-sized window of a flattened square image, at the
// configured stride.
inline FeatureMap dense_extract(const FeatureExtractor& fx, const Vector& image, int image_extent) {
    const int r = fx.patch_extent;
    if (image_extent < r) throw invalid_parameter("dense_extract: image smaller than patch");
    if (image.size() != static_cast<Eigen::Index>(image_extent) * image_extent * fx.channels)
        throw invalid_parameter("dense_extract: image size does not match geometry");

    const int per_axis = (image_extent - r) / fx.stride + 1;
    Matrix windows(static_cast<Eigen::Index>(per_axis) * per_axis, fx.patch_dim());
    Eigen::Index row = 0;
    for (int wy = 0; wy < per_axis; ++wy) {
        for (int wx = 0; wx < per_axis; ++wx, ++row) {
            const int y0 = wy * fx.stride;
            const int x0 = wx * fx.stride;
            Eigen::Index k = 0;
            for (int ch = 0; ch < fx.channels; ++ch)
                for (int y = 0; y < r; ++y)
                    for (int x = 0; x < r; ++x)
                        windows(row, k++) = image[ch * image_extent * image_extent + (y0 + y) * image_extent + (x0 + x)];
        }
    }

    FeatureMap map;
    map.height = per_axis;
    map.width = per_axis;
    map.values = detail::encode_patch_rows(fx, windows);
    return map;
}

// Average the map over its four spatial quadrants and concatenate in order
// top-left, top-right, bottom-left, bottom-right. For odd extents the middle
// row/column joins the bottom/right quadrant.
inline Vector quadrant_pool(const FeatureMap& map) {
    if (map.height < 2 || map.width < 2) throw invalid_parameter("quadrant_pool: map must be at least 2x2");
    const int dim = map.dim();
    const int split_y = map.height / 2;
    const int split_x = map.width / 2;
    Vector out = Vector::Zero(4 * dim);
    Eigen::Vector4d counts = Eigen::Vector4d::Zero();
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            const int quadrant = (y >= split_y ? 2 : 0) + (x >= split_x ? 1 : 0);
            out.segment(quadrant * dim, dim) += map.values.row(y * map.width + x).transpose();
            counts[quadrant] += 1.0;
        }
    }
    for (int q = 0; q < 4; ++q) out.segment(q * dim, dim) /= counts[q];
    return out;
}

inline Vector global_pool(const FeatureMap& map) { return map.values.colwise().mean().transpose(); }

// Image-level features for every row of `images`: dense extraction followed
// by the configured pooling. A map degenerating to a single window bypasses
// quadrant pooling (whole-image patches are their own feature).
inline Matrix extract_features(const FeatureExtractor& fx, const PatchDataset& images) {
    if (images.channels != fx.channels) throw invalid_parameter("extract_features: channel mismatch");
    const bool whole_image = images.extent == fx.patch_extent;
    const int out_dim = whole_image || fx.pooling == PoolingKind::global_average ? fx.feature_dim() : 4 * fx.feature_dim();

    Matrix out(images.count(), out_dim);
    if (whole_image) {
        out = detail::encode_patch_rows(fx, images.patches);
        return out;
    }
    for (Eigen::Index i = 0; i < images.count(); ++i) {
        const FeatureMap map = dense_extract(fx, images.patches.row(i).transpose(), images.extent);
        out.row(i) = (fx.pooling == PoolingKind::quadrant_average ? quadrant_pool(map) : global_pool(map)).transpose();
    }
    return out;
}

}  // namespace tifl
