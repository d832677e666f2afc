#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tifl/errors.hpp"

namespace tifl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class TransformKind : std::uint32_t {
    identity = 0,
    shift1d = 1,
    translation2d = 2,
    rotation2d = 3,
    scaling2d = 4,
};

struct IdentityParams {};
struct ShiftParams {
    int offset = 0;
};
struct TranslationParams {
    int dx = 0;
    int dy = 0;
};
struct RotationParams {
    double theta = 0.0;
};
struct ScalingParams {
    int level = 0;
    int stride = 0;
};

using TransformParams = std::variant<IdentityParams, ShiftParams, TranslationParams, RotationParams, ScalingParams>;

// One sparse linear operator mapping an input patch into filter space.
// Entries cover a single spatial block; multi-channel inputs replicate the
// block per channel (see TransformSet::apply). Entries are sorted by row,
// then column, which is the canonical order everywhere.
struct SparseTransform {
    struct Entry {
        int row;
        int col;
        double weight;
    };

    int rows = 0;  // spatial output dim (w*w, or w for 1-d)
    int cols = 0;  // spatial input dim (r*r, or r for 1-d)
    std::vector<Entry> entries;
    TransformKind kind = TransformKind::identity;
    TransformParams params;

    // y = T x on a single spatial block.
    Vector apply(const Vector& x) const {
        if (x.size() != cols) {
            throw invalid_parameter("apply: input length " + std::to_string(x.size()) + " != cols " +
                                    std::to_string(cols));
        }
        Vector y = Vector::Zero(rows);
        for (const Entry& e : entries) y[e.row] += e.weight * x[e.col];
        return y;
    }

    // x = T^T h, the adjoint used by decoder and gradient paths.
    Vector apply_adjoint(const Vector& h) const {
        if (h.size() != rows) {
            throw invalid_parameter("apply_adjoint: input length " + std::to_string(h.size()) + " != rows " +
                                    std::to_string(rows));
        }
        Vector x = Vector::Zero(cols);
        for (const Entry& e : entries) x[e.col] += e.weight * h[e.row];
        return x;
    }
};

namespace detail {

// Snap coordinates that are within float noise of a grid point, so rotations
// by multiples of pi/2 and degenerate scalings produce exact selection rows.
inline double snap_to_grid(double q) {
    const double r = std::round(q);
    return (std::abs(q - r) <= 1e-9) ? r : q;
}

// Append the bilinear interpolation entries for one output row sampling the
// source grid (width x height = gw x gw) at (qx, qy). Points outside the
// closed grid leave the row empty. Zero weights are dropped.
inline void append_bilinear_row(std::vector<SparseTransform::Entry>& entries, int row, int gw, double qx, double qy) {
    qx = snap_to_grid(qx);
    qy = snap_to_grid(qy);
    if (qx < 0.0 || qx > gw - 1 || qy < 0.0 || qy > gw - 1) return;
    int x0 = static_cast<int>(std::floor(qx));
    int y0 = static_cast<int>(std::floor(qy));
    if (x0 == gw - 1) x0 -= 1;  // keep x0+1 in range; fx becomes 1
    if (y0 == gw - 1) y0 -= 1;
    if (gw == 1) x0 = y0 = 0;
    const double fx = qx - x0;
    const double fy = qy - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy);
    const double w10 = fx * (1.0 - fy);
    const double w01 = (1.0 - fx) * fy;
    const double w11 = fx * fy;
    if (w00 != 0.0) entries.push_back({row, y0 * gw + x0, w00});
    if (gw > 1) {
        if (w10 != 0.0) entries.push_back({row, y0 * gw + x0 + 1, w10});
        if (w01 != 0.0) entries.push_back({row, (y0 + 1) * gw + x0, w01});
        if (w11 != 0.0) entries.push_back({row, (y0 + 1) * gw + x0 + 1, w11});
    }
}

// Bilinear read of a flattened gw x gw image at (qx, qy); out-of-grid points
// read as zero. Same interpolation rule as the transform builders.
inline double bilinear_sample(const Vector& image, int gw, double qx, double qy) {
    std::vector<SparseTransform::Entry> row;
    append_bilinear_row(row, 0, gw, qx, qy);
    double value = 0.0;
    for (const auto& e : row) value += e.weight * image[e.col];
    return value;
}

}  // namespace detail

inline SparseTransform make_identity(int dim) {
    if (dim < 1) throw invalid_parameter("make_identity: dim must be >= 1");
    SparseTransform t;
    t.rows = t.cols = dim;
    t.kind = TransformKind::identity;
    t.params = IdentityParams{};
    t.entries.reserve(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) t.entries.push_back({i, i, 1.0});
    return t;
}

// 1-d shift: T_ij = 1 iff i = j + s.
inline SparseTransform make_shift_1d(int dim, int offset) {
    if (dim < 1) throw invalid_parameter("make_shift_1d: dim must be >= 1");
    if (std::abs(offset) >= dim) {
        throw invalid_parameter("make_shift_1d: |offset| " + std::to_string(std::abs(offset)) +
                                " must be < dim " + std::to_string(dim));
    }
    SparseTransform t;
    t.rows = t.cols = dim;
    t.kind = TransformKind::shift1d;
    t.params = ShiftParams{offset};
    for (int i = 0; i < dim; ++i) {
        const int j = i - offset;
        if (j >= 0 && j < dim) t.entries.push_back({i, j, 1.0});
    }
    return t;
}

// Selection of the w x w window at offset (dx, dy) from the r x r grid.
// Non-square whenever w < r, which sidesteps boundary padding entirely.
inline SparseTransform make_translation_2d(int input_width, int filter_width, int dx, int dy) {
    const int r = input_width;
    const int w = filter_width;
    if (w < 1 || w > r) throw invalid_parameter("make_translation_2d: need 1 <= filter_width <= input_width");
    if (dx < 0 || dy < 0 || dx > r - w || dy > r - w) {
        throw invalid_parameter("make_translation_2d: window offset (" + std::to_string(dx) + "," +
                                std::to_string(dy) + ") exceeds grid");
    }
    SparseTransform t;
    t.rows = w * w;
    t.cols = r * r;
    t.kind = TransformKind::translation2d;
    t.params = TranslationParams{dx, dy};
    t.entries.reserve(static_cast<std::size_t>(w) * w);
    for (int y = 0; y < w; ++y)
        for (int x = 0; x < w; ++x) t.entries.push_back({y * w + x, (y + dy) * r + (x + dx), 1.0});
    return t;
}

// Rotation by theta about the grid center, bilinearly interpolated. The
// general form reads the centered w x w window of an r x r input, rotating
// about the center of the full input grid; r == w is the square case.
// Source points that rotate out of the grid leave all-zero rows.
inline SparseTransform make_rotation_2d(int input_width, int filter_width, double theta) {
    const int r = input_width;
    const int w = filter_width;
    if (w < 2 || w > r) throw invalid_parameter("make_rotation_2d: need 2 <= filter_width <= input_width");
    SparseTransform t;
    t.rows = w * w;
    t.cols = r * r;
    t.kind = TransformKind::rotation2d;
    t.params = RotationParams{theta};
    const double center = (r - 1) / 2.0;
    const double margin = (r - w) / 2.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (int y = 0; y < w; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x + margin - center;
            const double py = y + margin - center;
            // inverse rotation of the output point
            const double qx = c * px + s * py + center;
            const double qy = -s * px + c * py + center;
            detail::append_bilinear_row(t.entries, y * w + x, r, qx, qy);
        }
    }
    return t;
}

inline SparseTransform make_rotation_2d(int width, double theta) { return make_rotation_2d(width, width, theta); }

// Bilinear resampling of the centered (r - l*gs)^2 region onto the w x w
// output. When the region is exactly w x w this degenerates to the centered
// selection matrix.
inline SparseTransform make_scaling_2d(int input_width, int filter_width, int level, int stride) {
    const int r = input_width;
    const int w = filter_width;
    if (w < 2 || w > r) throw invalid_parameter("make_scaling_2d: need 2 <= filter_width <= input_width");
    if (stride < 1) throw invalid_parameter("make_scaling_2d: stride must be >= 1");
    if (level < 0 || level > (r - w) / stride) {
        throw invalid_parameter("make_scaling_2d: level " + std::to_string(level) + " out of range [0, " +
                                std::to_string((r - w) / stride) + "]");
    }
    const int region = r - level * stride;
    SparseTransform t;
    t.rows = w * w;
    t.cols = r * r;
    t.kind = TransformKind::scaling2d;
    t.params = ScalingParams{level, stride};
    const double offset = (r - region) / 2.0;
    const double step = static_cast<double>(region - 1) / (w - 1);
    for (int y = 0; y < w; ++y) {
        for (int x = 0; x < w; ++x) {
            detail::append_bilinear_row(t.entries, y * w + x, r, offset + x * step, offset + y * step);
        }
    }
    return t;
}

// Ordered set of transformation operators sharing one geometry. The index
// order is fixed: hidden-bias column s always refers to transforms[s].
struct TransformSet {
    std::vector<SparseTransform> transforms;
    int input_width = 0;   // r, in pixels (or vector length for 1-d sets)
    int filter_width = 0;  // w
    int channels = 1;
    bool one_dimensional = false;

    int size() const { return static_cast<int>(transforms.size()); }
    int block_rows() const { return transforms.empty() ? 0 : transforms.front().rows; }
    int block_cols() const { return transforms.empty() ? 0 : transforms.front().cols; }
    int input_dim() const { return channels * block_cols(); }   // D1
    int filter_dim() const { return channels * block_rows(); }  // D2

    const SparseTransform& operator[](int s) const { return transforms.at(static_cast<std::size_t>(s)); }

    // y = T_s x with per-channel block replication.
    Vector apply(int s, const Vector& x) const {
        const SparseTransform& t = (*this)[s];
        if (x.size() != input_dim()) throw invalid_parameter("TransformSet::apply: dimension mismatch");
        Vector y = Vector::Zero(filter_dim());
        for (int ch = 0; ch < channels; ++ch) {
            const int in0 = ch * t.cols;
            const int out0 = ch * t.rows;
            for (const auto& e : t.entries) y[out0 + e.row] += e.weight * x[in0 + e.col];
        }
        return y;
    }

    Vector apply_adjoint(int s, const Vector& h) const {
        const SparseTransform& t = (*this)[s];
        if (h.size() != filter_dim()) throw invalid_parameter("TransformSet::apply_adjoint: dimension mismatch");
        Vector x = Vector::Zero(input_dim());
        for (int ch = 0; ch < channels; ++ch) {
            const int in0 = ch * t.cols;
            const int out0 = ch * t.rows;
            for (const auto& e : t.entries) x[in0 + e.col] += e.weight * h[out0 + e.row];
        }
        return x;
    }

    // Batched forms operate on one sample per matrix row.
    Matrix apply_batch(int s, const Matrix& x) const {
        const SparseTransform& t = (*this)[s];
        if (x.cols() != input_dim()) throw invalid_parameter("TransformSet::apply_batch: dimension mismatch");
        Matrix y = Matrix::Zero(x.rows(), filter_dim());
        for (int ch = 0; ch < channels; ++ch) {
            const int in0 = ch * t.cols;
            const int out0 = ch * t.rows;
            for (const auto& e : t.entries) y.col(out0 + e.row) += e.weight * x.col(in0 + e.col);
        }
        return y;
    }

    Matrix apply_adjoint_batch(int s, const Matrix& h) const {
        const SparseTransform& t = (*this)[s];
        if (h.cols() != filter_dim()) throw invalid_parameter("TransformSet::apply_adjoint_batch: dimension mismatch");
        Matrix x = Matrix::Zero(h.rows(), input_dim());
        for (int ch = 0; ch < channels; ++ch) {
            const int in0 = ch * t.cols;
            const int out0 = ch * t.rows;
            for (const auto& e : t.entries) x.col(in0 + e.col) += e.weight * h.col(out0 + e.row);
        }
        return x;
    }
};

// Declarative geometry for build_transform_set. Families are generated in
// declaration order; the optional identity/centered-selection member comes
// first when requested.
struct TransformSetSpec {
    struct Family {
        TransformKind kind = TransformKind::identity;
        std::vector<int> shift_offsets;  // shift1d
        std::vector<double> angles;      // rotation2d
        int stride = 0;                  // translation2d / scaling2d grid step (gs)
    };

    int input_width = 0;
    int filter_width = 0;
    int channels = 1;
    bool one_dimensional = false;
    bool include_identity = false;
    std::vector<Family> families;
};

inline TransformSet build_transform_set(const TransformSetSpec& spec) {
    const int r = spec.input_width;
    const int w = spec.filter_width;
    if (r < 1 || w < 1 || w > r) throw invalid_parameter("build_transform_set: need 1 <= filter_width <= input_width");
    if (spec.channels < 1) throw invalid_parameter("build_transform_set: channels must be >= 1");
    if (spec.one_dimensional && r != w) throw invalid_parameter("build_transform_set: 1-d sets require r == w");

    TransformSet set;
    set.input_width = r;
    set.filter_width = w;
    set.channels = spec.channels;
    set.one_dimensional = spec.one_dimensional;

    if (spec.include_identity) {
        if (r == w) {
            set.transforms.push_back(make_identity(spec.one_dimensional ? r : r * r));
        } else if ((r - w) % 2 == 0) {
            set.transforms.push_back(make_translation_2d(r, w, (r - w) / 2, (r - w) / 2));
        } else {
            throw invalid_parameter("build_transform_set: centered selection requires even input/filter gap");
        }
    }

    for (const auto& fam : spec.families) {
        switch (fam.kind) {
            case TransformKind::identity:
                if (r != w) throw invalid_parameter("build_transform_set: identity family requires r == w");
                set.transforms.push_back(make_identity(spec.one_dimensional ? r : r * r));
                break;
            case TransformKind::shift1d:
                if (!spec.one_dimensional) throw invalid_parameter("build_transform_set: shift1d requires a 1-d set");
                for (int s : fam.shift_offsets) set.transforms.push_back(make_shift_1d(r, s));
                break;
            case TransformKind::translation2d: {
                if (spec.one_dimensional) throw invalid_parameter("build_transform_set: translation2d needs a 2-d set");
                if (fam.stride < 1) throw invalid_parameter("build_transform_set: translation stride must be >= 1");
                for (int dy = 0; dy <= r - w; dy += fam.stride)
                    for (int dx = 0; dx <= r - w; dx += fam.stride)
                        set.transforms.push_back(make_translation_2d(r, w, dx, dy));
                break;
            }
            case TransformKind::rotation2d:
                if (spec.one_dimensional) throw invalid_parameter("build_transform_set: rotation2d needs a 2-d set");
                for (double theta : fam.angles) set.transforms.push_back(make_rotation_2d(r, w, theta));
                break;
            case TransformKind::scaling2d: {
                if (spec.one_dimensional) throw invalid_parameter("build_transform_set: scaling2d needs a 2-d set");
                if (fam.stride < 1) throw invalid_parameter("build_transform_set: scaling stride must be >= 1");
                for (int level = 0; level <= (r - w) / fam.stride; ++level)
                    set.transforms.push_back(make_scaling_2d(r, w, level, fam.stride));
                break;
            }
        }
    }

    if (set.transforms.empty()) throw invalid_parameter("build_transform_set: resulting set is empty");
    const int rows = set.transforms.front().rows;
    const int cols = set.transforms.front().cols;
    for (const auto& t : set.transforms) {
        if (t.rows != rows || t.cols != cols)
            throw invalid_parameter("build_transform_set: families produce inconsistent block shapes");
    }
    return set;
}

}  // namespace tifl
