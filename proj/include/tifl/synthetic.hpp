#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/rng.hpp"

namespace tifl {

namespace detail {

struct Point {
    double x;
    double y;
};

using Stroke = std::vector<Point>;

inline Stroke circle_stroke(double cx, double cy, double rx, double ry, int segments = 18) {
    Stroke s;
    s.reserve(static_cast<std::size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        const double t = 6.283185307179586 * i / segments;
        s.push_back({cx + rx * std::cos(t), cy + ry * std::sin(t)});
    }
    return s;
}

inline Stroke arc_stroke(double cx, double cy, double r, double from, double to, int segments = 10) {
    Stroke s;
    s.reserve(static_cast<std::size_t>(segments) + 1);
    for (int i = 0; i <= segments; ++i) {
        const double t = from + (to - from) * i / segments;
        s.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
    }
    return s;
}

// Stroke skeletons for the ten digit classes on the unit square (y grows
// downward). The 6 and 9 are deliberately not rotations of each other: 6
// carries a long curved tail into a bottom bowl, 9 a top bowl with a
// straight stem and hooked foot.
inline const std::vector<std::vector<Stroke>>& digit_strokes() {
    static const std::vector<std::vector<Stroke>> glyphs = [] {
        std::vector<std::vector<Stroke>> g(10);
        g[0] = {circle_stroke(0.50, 0.50, 0.26, 0.36)};
        g[1] = {{{0.36, 0.26}, {0.54, 0.12}, {0.54, 0.88}}, {{0.38, 0.88}, {0.70, 0.88}}};
        g[2] = {arc_stroke(0.50, 0.32, 0.24, 3.14159265, 6.28318531 - 0.45),
                {{0.72, 0.42}, {0.26, 0.86}, {0.76, 0.86}}};
        g[3] = {{{0.28, 0.18}, {0.50, 0.12}, {0.68, 0.22}, {0.66, 0.38}, {0.50, 0.47}},
                {{0.50, 0.47}, {0.70, 0.56}, {0.72, 0.72}, {0.55, 0.87}, {0.28, 0.82}}};
        g[4] = {{{0.60, 0.10}, {0.24, 0.60}, {0.80, 0.60}}, {{0.62, 0.34}, {0.62, 0.90}}};
        g[5] = {{{0.72, 0.12}, {0.32, 0.12}, {0.30, 0.44}},
                {{0.30, 0.44}, {0.55, 0.40}, {0.70, 0.52}, {0.68, 0.72}, {0.50, 0.86}, {0.27, 0.78}}};
        g[6] = {{{0.64, 0.10}, {0.47, 0.22}, {0.35, 0.40}, {0.30, 0.60}}, {circle_stroke(0.48, 0.66, 0.18, 0.18)}};
        g[7] = {{{0.24, 0.12}, {0.76, 0.12}, {0.40, 0.88}}, {{0.33, 0.50}, {0.62, 0.50}}};
        g[8] = {{circle_stroke(0.50, 0.30, 0.17, 0.17)}, {circle_stroke(0.50, 0.67, 0.21, 0.21)}};
        g[9] = {{circle_stroke(0.48, 0.32, 0.18, 0.18)}, {{0.66, 0.32}, {0.66, 0.74}, {0.45, 0.86}}};
        return g;
    }();
    return glyphs;
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx);
    const double dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace detail

// Renders a balanced, procedurally generated digit dataset (labels cycle
// 0..9). Each sample jitters the glyph skeleton in slant, scale, position,
// stroke thickness, and ink intensity, then rasterizes with an antialiased
// distance profile. Stands in for file-based digit data in self-contained
// runs; deterministic per seed (six uniforms per sample).
inline PatchDataset render_digits(int count, std::uint64_t seed, int extent = 28) {
    if (count < 0) throw invalid_parameter("render_digits: count must be >= 0");
    if (extent < 8) throw invalid_parameter("render_digits: extent too small");

    PatchDataset data;
    data.extent = extent;
    data.channels = 1;
    data.range = ValueRange::unit_interval;
    data.patches = Matrix(count, static_cast<Eigen::Index>(extent) * extent);
    data.labels.resize(static_cast<std::size_t>(count));
    data.provenance["source"] = "synthetic-digits";
    data.provenance["kind"] = "render";
    data.provenance["seed"] = std::to_string(seed);
    data.provenance["params"] = "extent=" + std::to_string(extent);

    Rng rng(seed, 0);
    const auto& glyphs = detail::digit_strokes();
    for (int n = 0; n < count; ++n) {
        const int label = n % 10;
        data.labels[static_cast<std::size_t>(n)] = label;

        const double thickness = rng.uniform(0.050, 0.075);
        const double slant = rng.uniform(-0.12, 0.12);
        const double scale = rng.uniform(0.88, 1.00) * 0.94;
        const double shift_x = rng.uniform(-0.035, 0.035);
        const double shift_y = rng.uniform(-0.035, 0.035);
        const double ink = rng.uniform(0.88, 1.00);

        // jittered glyph: scale and shear about the glyph center
        std::vector<detail::Stroke> strokes = glyphs[static_cast<std::size_t>(label)];
        for (auto& stroke : strokes) {
            for (auto& p : stroke) {
                const double ux = p.x - 0.5;
                const double uy = p.y - 0.5;
                p.x = 0.5 + scale * (ux + slant * uy) + shift_x;
                p.y = 0.5 + scale * uy + shift_y;
            }
        }

        const double aa = 0.75 / extent;  // antialias band of ~0.75 px
        for (int y = 0; y < extent; ++y) {
            for (int x = 0; x < extent; ++x) {
                const detail::Point p{(x + 0.5) / extent, (y + 0.5) / extent};
                double dist = 1.0;
                for (const auto& stroke : strokes)
                    for (std::size_t i = 0; i + 1 < stroke.size(); ++i)
                        dist = std::min(dist, detail::segment_distance(p, stroke[i], stroke[i + 1]));
                const double value = std::clamp((thickness - dist) / aa + 0.5, 0.0, 1.0);
                data.patches(n, y * extent + x) = ink * value;
            }
        }
    }
    return data;
}

// Smooth random color images (soft blobs over a gradient background) for
// pipeline smoke runs; values in [0, 1], channel-planar rows.
inline PatchDataset render_texture_images(int count, int extent, int channels, std::uint64_t seed) {
    if (count < 0 || extent < 2 || channels < 1) throw invalid_parameter("render_texture_images: bad geometry");

    PatchDataset data;
    data.extent = extent;
    data.channels = channels;
    data.range = ValueRange::unit_interval;
    data.patches = Matrix(count, static_cast<Eigen::Index>(extent) * extent * channels);
    data.provenance["source"] = "synthetic-textures";
    data.provenance["kind"] = "render";
    data.provenance["seed"] = std::to_string(seed);
    data.provenance["params"] = "extent=" + std::to_string(extent) + ",channels=" + std::to_string(channels);

    Rng rng(seed, 0);
    for (int n = 0; n < count; ++n) {
        // shared blob geometry; per-channel amplitudes keep channels correlated
        struct Blob {
            double cx, cy, radius;
            std::array<double, 4> amp;
        };
        std::vector<Blob> blobs(6);
        for (auto& blob : blobs) {
            blob.cx = rng.uniform(0.0, extent - 1.0);
            blob.cy = rng.uniform(0.0, extent - 1.0);
            blob.radius = rng.uniform(2.0, extent / 2.0);
            for (int ch = 0; ch < channels && ch < 4; ++ch) blob.amp[static_cast<std::size_t>(ch)] = rng.uniform(-0.5, 0.5);
        }
        std::vector<double> gx(static_cast<std::size_t>(channels)), gy(static_cast<std::size_t>(channels)),
            base(static_cast<std::size_t>(channels));
        for (int ch = 0; ch < channels; ++ch) {
            gx[static_cast<std::size_t>(ch)] = rng.uniform(-0.3, 0.3);
            gy[static_cast<std::size_t>(ch)] = rng.uniform(-0.3, 0.3);
            base[static_cast<std::size_t>(ch)] = rng.uniform(0.3, 0.7);
        }
        for (int ch = 0; ch < channels; ++ch) {
            for (int y = 0; y < extent; ++y) {
                for (int x = 0; x < extent; ++x) {
                    double value = base[static_cast<std::size_t>(ch)] +
                                   gx[static_cast<std::size_t>(ch)] * (x / (extent - 1.0) - 0.5) +
                                   gy[static_cast<std::size_t>(ch)] * (y / (extent - 1.0) - 0.5);
                    for (const auto& blob : blobs) {
                        const double dx = x - blob.cx;
                        const double dy = y - blob.cy;
                        value += blob.amp[static_cast<std::size_t>(ch % 4)] *
                                 std::exp(-(dx * dx + dy * dy) / (2.0 * blob.radius * blob.radius));
                    }
                    data.patches(n, ch * extent * extent + y * extent + x) = std::clamp(value, 0.0, 1.0);
                }
            }
        }
    }
    return data;
}

}  // namespace tifl
