#pragma once

#include <cmath>
#include <string>

#include "tifl/errors.hpp"
#include "tifl/transforms.hpp"

namespace tifl {

namespace detail {

inline TransformSetSpec::Family rotation_family(int count, double step, double start = 0.0) {
    TransformSetSpec::Family fam;
    fam.kind = TransformKind::rotation2d;
    for (int i = 0; i < count; ++i) fam.angles.push_back(start + i * step);
    return fam;
}

}  // namespace detail

// Named transform-set presets wired to the standard experiment geometries:
//   identity       single identity operator at the data size (plain model)
//   rot16          16 rotations stepping pi/8, square at the data size
//   scale28-20     28 -> 20 scalings, stride 2 (5 levels)
//   trans28-24     24x24 windows over 28x28, stride 2 (9 offsets)
//   cifar-rot      5 rotations stepping pi/8 centered on 0, 6x6
//   cifar-scale    8 -> 6 scalings, stride 2 (2 levels)
//   cifar-trans    6x6 windows over 8x8, stride 2 (4 offsets)
//   cifar-combined cifar-trans + cifar-scale + 5 rotations read from the
//                  centered 6x6 window of the 8x8 patch
inline TransformSetSpec transform_preset(const std::string& name, int input_width, int channels = 1) {
    constexpr double pi = 3.14159265358979323846;
    TransformSetSpec spec;
    spec.channels = channels;

    auto expect_width = [&](int width) {
        if (input_width != width)
            throw invalid_parameter("preset " + name + " expects input width " + std::to_string(width) + ", got " +
                                    std::to_string(input_width));
    };

    if (name == "identity") {
        spec.input_width = spec.filter_width = input_width;
        TransformSetSpec::Family fam;
        fam.kind = TransformKind::identity;
        spec.families.push_back(fam);
    } else if (name == "rot16") {
        spec.input_width = spec.filter_width = input_width;
        spec.families.push_back(detail::rotation_family(16, pi / 8.0));
    } else if (name == "scale28-20") {
        expect_width(28);
        spec.input_width = 28;
        spec.filter_width = 20;
        TransformSetSpec::Family fam;
        fam.kind = TransformKind::scaling2d;
        fam.stride = 2;
        spec.families.push_back(fam);
    } else if (name == "trans28-24") {
        expect_width(28);
        spec.input_width = 28;
        spec.filter_width = 24;
        TransformSetSpec::Family fam;
        fam.kind = TransformKind::translation2d;
        fam.stride = 2;
        spec.families.push_back(fam);
    } else if (name == "cifar-rot") {
        expect_width(6);
        spec.input_width = spec.filter_width = 6;
        spec.families.push_back(detail::rotation_family(5, pi / 8.0, -2.0 * pi / 8.0));
    } else if (name == "cifar-scale") {
        expect_width(8);
        spec.input_width = 8;
        spec.filter_width = 6;
        TransformSetSpec::Family fam;
        fam.kind = TransformKind::scaling2d;
        fam.stride = 2;
        spec.families.push_back(fam);
    } else if (name == "cifar-trans") {
        expect_width(8);
        spec.input_width = 8;
        spec.filter_width = 6;
        TransformSetSpec::Family fam;
        fam.kind = TransformKind::translation2d;
        fam.stride = 2;
        spec.families.push_back(fam);
    } else if (name == "cifar-combined") {
        expect_width(8);
        spec.input_width = 8;
        spec.filter_width = 6;
        TransformSetSpec::Family trans;
        trans.kind = TransformKind::translation2d;
        trans.stride = 2;
        spec.families.push_back(trans);
        TransformSetSpec::Family scale;
        scale.kind = TransformKind::scaling2d;
        scale.stride = 2;
        spec.families.push_back(scale);
        spec.families.push_back(detail::rotation_family(5, pi / 8.0, -2.0 * pi / 8.0));
    } else {
        throw invalid_parameter("unknown transform preset: " + name);
    }
    return spec;
}

}  // namespace tifl
