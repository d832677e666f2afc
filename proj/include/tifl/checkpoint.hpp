#pragma once

#include <fstream>
#include <string>
#include <variant>

#include "tifl/autoencoder.hpp"
#include "tifl/data.hpp"
#include "tifl/io.hpp"
#include "tifl/rbm.hpp"
#include "tifl/sparse_coding.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

enum class ModelKind : std::uint32_t {
    tirbm = 1,
    tiae = 2,
    tiomp = 3,
};

using AnyModel = std::variant<TirbmModel, TiaeModel, Dictionary>;

namespace detail {

// The manifest stores geometry plus one parameter record per transform,
// enough to regenerate every matrix bit-identically; raw entries are never
// serialized.
inline void write_manifest(std::ostream& out, const TransformSet& set) {
    write_u32(out, static_cast<std::uint32_t>(set.input_width));
    write_u32(out, static_cast<std::uint32_t>(set.filter_width));
    write_u32(out, static_cast<std::uint32_t>(set.channels));
    write_u8(out, set.one_dimensional ? 1 : 0);
    write_u32(out, static_cast<std::uint32_t>(set.size()));
    for (const auto& t : set.transforms) {
        write_u32(out, static_cast<std::uint32_t>(t.kind));
        std::int32_t p0 = 0, p1 = 0;
        double p2 = 0.0;
        switch (t.kind) {
            case TransformKind::identity:
                break;
            case TransformKind::shift1d:
                p0 = std::get<ShiftParams>(t.params).offset;
                break;
            case TransformKind::translation2d:
                p0 = std::get<TranslationParams>(t.params).dx;
                p1 = std::get<TranslationParams>(t.params).dy;
                break;
            case TransformKind::rotation2d:
                p2 = std::get<RotationParams>(t.params).theta;
                break;
            case TransformKind::scaling2d:
                p0 = std::get<ScalingParams>(t.params).level;
                p1 = std::get<ScalingParams>(t.params).stride;
                break;
        }
        write_i32(out, p0);
        write_i32(out, p1);
        write_f64(out, p2);
    }
}

inline TransformSet read_manifest(std::istream& in, const std::string& path) {
    TransformSet set;
    set.input_width = static_cast<int>(read_u32(in, "manifest input width"));
    set.filter_width = static_cast<int>(read_u32(in, "manifest filter width"));
    set.channels = static_cast<int>(read_u32(in, "manifest channels"));
    set.one_dimensional = read_u8(in, "manifest flag") != 0;
    const std::uint32_t count = read_u32(in, "manifest size");
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto kind = static_cast<TransformKind>(read_u32(in, "transform kind"));
        const std::int32_t p0 = read_i32(in, "transform p0");
        const std::int32_t p1 = read_i32(in, "transform p1");
        const double p2 = read_f64(in, "transform p2");
        switch (kind) {
            case TransformKind::identity:
                set.transforms.push_back(make_identity(
                    set.one_dimensional ? set.input_width : set.input_width * set.input_width));
                break;
            case TransformKind::shift1d:
                set.transforms.push_back(make_shift_1d(set.input_width, p0));
                break;
            case TransformKind::translation2d:
                set.transforms.push_back(make_translation_2d(set.input_width, set.filter_width, p0, p1));
                break;
            case TransformKind::rotation2d:
                set.transforms.push_back(make_rotation_2d(set.input_width, set.filter_width, p2));
                break;
            case TransformKind::scaling2d:
                set.transforms.push_back(make_scaling_2d(set.input_width, set.filter_width, p0, p1));
                break;
            default:
                throw parse_error("unknown transform kind in " + path);
        }
    }
    return set;
}

inline void write_matrix_row_major(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) write_f64(out, m(i, j));
}

inline Matrix read_matrix_row_major(std::istream& in, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = read_f64(in, what);
    return m;
}

inline void write_checkpoint_header(std::ostream& out, ModelKind kind, int input_dim, int filter_dim,
                                    int num_filters, int num_transforms, std::uint32_t family) {
    out.write("TIFL", 4);
    write_u32(out, 1);
    write_u32(out, static_cast<std::uint32_t>(kind));
    write_u32(out, static_cast<std::uint32_t>(input_dim));
    write_u32(out, static_cast<std::uint32_t>(filter_dim));
    write_u32(out, static_cast<std::uint32_t>(num_filters));
    write_u32(out, static_cast<std::uint32_t>(num_transforms));
    write_u32(out, family);
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const TirbmModel& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write checkpoint: " + path);
    detail::write_checkpoint_header(out, ModelKind::tirbm, m.input_dim(), m.filter_dim(), m.num_filters(),
                                    m.num_transforms(), static_cast<std::uint32_t>(m.visible_family));
    detail::write_manifest(out, m.transforms);
    detail::write_matrix_row_major(out, m.weights);
    detail::write_matrix_row_major(out, m.hidden_bias);
    detail::write_matrix_row_major(out, m.visible_bias);
}

inline void save_checkpoint(const std::string& path, const TiaeModel& m) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write checkpoint: " + path);
    detail::write_checkpoint_header(out, ModelKind::tiae, m.input_dim(), m.filter_dim(), m.num_filters(),
                                    m.num_transforms(), static_cast<std::uint32_t>(m.output_family));
    detail::write_manifest(out, m.transforms);
    detail::write_matrix_row_major(out, m.weights);
    detail::write_matrix_row_major(out, m.hidden_bias);
    detail::write_matrix_row_major(out, m.visible_bias);
}

inline void save_checkpoint(const std::string& path, const Dictionary& d) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write checkpoint: " + path);
    detail::write_checkpoint_header(out, ModelKind::tiomp, d.input_dim(), d.filter_dim(), d.num_filters(),
                                    d.num_transforms(), 0);
    detail::write_manifest(out, d.transforms);
    detail::write_matrix_row_major(out, d.weights);
}

inline AnyModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open checkpoint: " + path);
    detail::expect_magic(in, "TIFL", path);
    const std::uint32_t version = detail::read_u32(in, "version");
    if (version != 1) throw parse_error("unsupported checkpoint version in " + path);
    const auto kind = static_cast<ModelKind>(detail::read_u32(in, "model kind"));
    const auto input_dim = static_cast<Eigen::Index>(detail::read_u32(in, "input dim"));
    const auto filter_dim = static_cast<Eigen::Index>(detail::read_u32(in, "filter dim"));
    const auto num_filters = static_cast<Eigen::Index>(detail::read_u32(in, "filter count"));
    const auto num_transforms = static_cast<Eigen::Index>(detail::read_u32(in, "transform count"));
    const std::uint32_t family = detail::read_u32(in, "family");
    TransformSet transforms = detail::read_manifest(in, path);
    if (transforms.input_dim() != input_dim || transforms.filter_dim() != filter_dim ||
        transforms.size() != num_transforms)
        throw parse_error("checkpoint header disagrees with manifest in " + path);

    switch (kind) {
        case ModelKind::tirbm: {
            TirbmModel m;
            m.visible_family = static_cast<VisibleFamily>(family);
            m.weights = detail::read_matrix_row_major(in, filter_dim, num_filters, "weights");
            m.hidden_bias = detail::read_matrix_row_major(in, num_filters, num_transforms, "hidden bias");
            m.visible_bias = detail::read_matrix_row_major(in, input_dim, 1, "visible bias");
            m.transforms = std::move(transforms);
            return m;
        }
        case ModelKind::tiae: {
            TiaeModel m;
            m.output_family = static_cast<OutputFamily>(family);
            m.weights = detail::read_matrix_row_major(in, filter_dim, num_filters, "weights");
            m.hidden_bias = detail::read_matrix_row_major(in, num_filters, num_transforms, "hidden bias");
            m.visible_bias = detail::read_matrix_row_major(in, input_dim, 1, "visible bias");
            m.transforms = std::move(transforms);
            return m;
        }
        case ModelKind::tiomp: {
            Dictionary d;
            d.weights = detail::read_matrix_row_major(in, filter_dim, num_filters, "weights");
            d.transforms = std::move(transforms);
            return d;
        }
        default:
            throw parse_error("unknown model kind in " + path);
    }
}

// ---- preprocessing sidecar ("TIFP") ----

inline void save_preprocessing(const std::string& path, const Preprocessing& prep) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write preprocessing file: " + path);
    out.write("TIFP", 4);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(prep.kind));
    detail::write_u32(out, static_cast<std::uint32_t>(prep.mean.size()));
    detail::write_f64(out, prep.epsilon);
    detail::write_f64(out, prep.variance_offset);
    detail::write_matrix_row_major(out, prep.mean);
    if (prep.kind == PreprocessKind::zca_whiten) detail::write_matrix_row_major(out, prep.whitening);
}

inline Preprocessing load_preprocessing(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open preprocessing file: " + path);
    detail::expect_magic(in, "TIFP", path);
    const std::uint32_t version = detail::read_u32(in, "version");
    if (version != 1) throw parse_error("unsupported preprocessing version in " + path);
    Preprocessing prep;
    prep.kind = static_cast<PreprocessKind>(detail::read_u32(in, "kind"));
    const auto dim = static_cast<Eigen::Index>(detail::read_u32(in, "dim"));
    prep.epsilon = detail::read_f64(in, "epsilon");
    prep.variance_offset = detail::read_f64(in, "variance offset");
    prep.mean = detail::read_matrix_row_major(in, dim, 1, "mean");
    if (prep.kind == PreprocessKind::zca_whiten)
        prep.whitening = detail::read_matrix_row_major(in, dim, dim, "whitening");
    return prep;
}

}  // namespace tifl
