#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tifl/checkpoint.hpp"
#include "tifl/errors.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline void write_pgm(const std::string& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write PGM: " + path);
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
}

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open PGM: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw parse_error("bad PGM magic in " + path);
    GrayImage image;
    int maxval = 0;
    in >> image.width >> image.height >> maxval;
    if (!in || image.width < 1 || image.height < 1 || maxval != 255) throw parse_error("bad PGM header in " + path);
    in.get();  // single whitespace after maxval
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!in) throw parse_error("truncated PGM payload in " + path);
    return image;
}

// Tiles the filter columns into a near-square grid, one tile per filter in
// row-major order, each tile min-max normalized on its own (flat tiles
// render mid-gray), with 1-pixel black separators around and between tiles.
// Multi-channel filters are averaged across channels.
inline GrayImage render_filter_grid(const Matrix& filters, int tile_width, int channels = 1) {
    const int spatial = tile_width * tile_width;
    if (filters.rows() != static_cast<Eigen::Index>(spatial) * channels)
        throw invalid_parameter("render_filter_grid: filter dim does not match tile geometry");
    const int count = static_cast<int>(filters.cols());
    const int grid_cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    const int grid_rows = (count + grid_cols - 1) / grid_cols;

    GrayImage image;
    image.width = grid_cols * tile_width + grid_cols + 1;
    image.height = grid_rows * tile_width + grid_rows + 1;
    image.pixels.assign(static_cast<std::size_t>(image.width) * image.height, 0);

    for (int j = 0; j < count; ++j) {
        Vector tile = Vector::Zero(spatial);
        for (int ch = 0; ch < channels; ++ch) tile += filters.col(j).segment(ch * spatial, spatial);
        tile /= static_cast<double>(channels);
        const double lo = tile.minCoeff();
        const double hi = tile.maxCoeff();
        const int ox = (j % grid_cols) * (tile_width + 1) + 1;
        const int oy = (j / grid_cols) * (tile_width + 1) + 1;
        for (int y = 0; y < tile_width; ++y) {
            for (int x = 0; x < tile_width; ++x) {
                std::uint8_t value = 128;
                if (hi > lo) value = static_cast<std::uint8_t>(std::lround(255.0 * (tile[y * tile_width + x] - lo) / (hi - lo)));
                image.pixels[static_cast<std::size_t>(oy + y) * image.width + (ox + x)] = value;
            }
        }
    }
    return image;
}

// Renders a checkpoint's filter bank as a PGM grid. With a transform index
// the filters are first mapped back through T_s^T, showing the transformed
// bank at input resolution.
inline void export_filter_grid(const std::string& checkpoint_path, const std::string& out_path,
                               int transform_index = -1) {
    const AnyModel model = load_checkpoint(checkpoint_path);
    const Matrix* weights = nullptr;
    const TransformSet* transforms = nullptr;
    if (const auto* m = std::get_if<TirbmModel>(&model)) {
        weights = &m->weights;
        transforms = &m->transforms;
    } else if (const auto* m = std::get_if<TiaeModel>(&model)) {
        weights = &m->weights;
        transforms = &m->transforms;
    } else {
        const auto& d = std::get<Dictionary>(model);
        weights = &d.weights;
        transforms = &d.transforms;
    }

    if (transform_index < 0) {
        write_pgm(out_path, render_filter_grid(*weights, transforms->filter_width, transforms->channels));
        return;
    }
    if (transform_index >= transforms->size())
        throw invalid_parameter("export_filter_grid: transform index out of range");
    Matrix mapped(transforms->input_dim(), weights->cols());
    for (Eigen::Index j = 0; j < weights->cols(); ++j)
        mapped.col(j) = transforms->apply_adjoint(transform_index, weights->col(j));
    write_pgm(out_path, render_filter_grid(mapped, transforms->input_width, transforms->channels));
}

}  // namespace tifl
