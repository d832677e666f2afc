#pragma once

#include <map>
#include <string>
#include <vector>

#include "tifl/transforms.hpp"

namespace tifl {

enum class ValueRange : std::uint32_t {
    unit_interval = 0,  // values in [0, 1]
    standardized = 1,   // preprocessed, roughly zero-mean
};

// A set of flattened square patches (or whole images), one per row.
// Layout per row: channel-planar, row-major within each channel, i.e.
// index = channel * extent^2 + y * extent + x.
struct PatchDataset {
    Matrix patches;           // N x D1
    std::vector<int> labels;  // empty when unlabeled, else length N
    int extent = 0;           // spatial width in pixels (square)
    int channels = 1;
    ValueRange range = ValueRange::unit_interval;
    std::map<std::string, std::string> provenance;  // source, kind, seed, params

    Eigen::Index count() const { return patches.rows(); }
    Eigen::Index dim() const { return patches.cols(); }
    bool labeled() const { return !labels.empty(); }
};

}  // namespace tifl
