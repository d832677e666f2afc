#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tifl/dataset.hpp"
#include "tifl/errors.hpp"
#include "tifl/rbm.hpp"

namespace tifl {

namespace detail {

// All project binary formats are little-endian regardless of host.
inline void write_u8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void write_u32(std::ostream& out, std::uint32_t v) {
    char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
}

inline void write_i32(std::ostream& out, std::int32_t v) { write_u32(out, static_cast<std::uint32_t>(v)); }

inline void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v & 0xffffffffull));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

inline void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

inline std::uint8_t read_u8(std::istream& in, const std::string& what) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw parse_error("truncated file while reading " + what);
    return static_cast<std::uint8_t>(c);
}

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (!in) throw parse_error("truncated file while reading " + what);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

inline std::int32_t read_i32(std::istream& in, const std::string& what) {
    return static_cast<std::int32_t>(read_u32(in, what));
}

inline std::uint64_t read_u64(std::istream& in, const std::string& what) {
    const std::uint64_t low = read_u32(in, what);
    const std::uint64_t high = read_u32(in, what);
    return low | (high << 32);
}

inline float read_f32(std::istream& in, const std::string& what) {
    const std::uint32_t bits = read_u32(in, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

inline double read_f64(std::istream& in, const std::string& what) {
    const std::uint64_t bits = read_u64(in, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void expect_magic(std::istream& in, const char* magic, const std::string& path) {
    char buffer[4];
    in.read(buffer, 4);
    if (!in || std::memcmp(buffer, magic, 4) != 0)
        throw parse_error(std::string("bad ") + magic + " magic in " + path);
}

inline std::string format_double(double v) {
    std::ostringstream out;
    out.precision(12);
    out << v;
    return out.str();
}

}  // namespace detail

// ---- feature files ("TIFV": magic, version, count, dim, f32 row-major) ----

inline void save_features(const std::string& path, const Matrix& features) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write feature file: " + path);
    out.write("TIFV", 4);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(features.rows()));
    detail::write_u32(out, static_cast<std::uint32_t>(features.cols()));
    for (Eigen::Index i = 0; i < features.rows(); ++i)
        for (Eigen::Index j = 0; j < features.cols(); ++j) detail::write_f32(out, static_cast<float>(features(i, j)));
}

inline Matrix load_features(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open feature file: " + path);
    detail::expect_magic(in, "TIFV", path);
    const std::uint32_t version = detail::read_u32(in, "version");
    if (version != 1) throw parse_error("unsupported TIFV version in " + path);
    const std::uint32_t count = detail::read_u32(in, "count");
    const std::uint32_t dim = detail::read_u32(in, "dim");
    Matrix features(count, dim);
    for (std::uint32_t i = 0; i < count; ++i)
        for (std::uint32_t j = 0; j < dim; ++j) features(i, j) = detail::read_f32(in, "features");
    return features;
}

// ---- dataset container ("TIFD" + plain-text provenance sidecar) ----

inline void save_dataset(const std::string& path, const PatchDataset& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw parse_error("cannot write dataset file: " + path);
    out.write("TIFD", 4);
    detail::write_u32(out, 1);
    detail::write_u32(out, static_cast<std::uint32_t>(data.count()));
    detail::write_u32(out, static_cast<std::uint32_t>(data.dim()));
    detail::write_u32(out, static_cast<std::uint32_t>(data.extent));
    detail::write_u32(out, static_cast<std::uint32_t>(data.channels));
    detail::write_u32(out, static_cast<std::uint32_t>(data.range));
    detail::write_u8(out, data.labeled() ? 1 : 0);
    for (Eigen::Index i = 0; i < data.count(); ++i)
        for (Eigen::Index j = 0; j < data.dim(); ++j) detail::write_f32(out, static_cast<float>(data.patches(i, j)));
    if (data.labeled())
        for (int label : data.labels) detail::write_i32(out, label);

    std::ofstream sidecar(path + ".prov", std::ios::trunc);
    for (const auto& [key, value] : data.provenance) sidecar << key << "=" << value << "\n";
}

inline PatchDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open dataset file: " + path);
    detail::expect_magic(in, "TIFD", path);
    const std::uint32_t version = detail::read_u32(in, "version");
    if (version != 1) throw parse_error("unsupported TIFD version in " + path);
    PatchDataset data;
    const std::uint32_t count = detail::read_u32(in, "count");
    const std::uint32_t dim = detail::read_u32(in, "dim");
    data.extent = static_cast<int>(detail::read_u32(in, "extent"));
    data.channels = static_cast<int>(detail::read_u32(in, "channels"));
    data.range = static_cast<ValueRange>(detail::read_u32(in, "range"));
    const bool labeled = detail::read_u8(in, "label flag") != 0;
    data.patches = Matrix(count, dim);
    for (std::uint32_t i = 0; i < count; ++i)
        for (std::uint32_t j = 0; j < dim; ++j) data.patches(i, j) = detail::read_f32(in, "patches");
    if (labeled) {
        data.labels.resize(count);
        for (std::uint32_t i = 0; i < count; ++i) data.labels[i] = detail::read_i32(in, "labels");
    }

    std::ifstream sidecar(path + ".prov");
    std::string line;
    while (std::getline(sidecar, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) data.provenance[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return data;
}

// ---- CSV outputs ----

// Append-only per-epoch metrics; the header is written when the file is new.
inline void append_metrics(const std::string& path, const std::vector<EpochMetrics>& metrics) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw parse_error("cannot write metrics file: " + path);
    if (fresh) out << "epoch,reconstruction_error,mean_pooled_activation,wall_seconds\n";
    for (const auto& m : metrics) {
        out << m.epoch << "," << detail::format_double(m.reconstruction_error) << ","
            << detail::format_double(m.mean_pooled_activation) << "," << detail::format_double(m.wall_seconds)
            << "\n";
    }
}

struct ResultRow {
    std::string dataset;
    std::string model;
    int num_filters = 0;
    int num_transforms = 0;
    double reg = 0.0;
    double accuracy = 0.0;
    double error = 0.0;
};

inline void write_results(const std::string& path, const std::vector<ResultRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw parse_error("cannot write results file: " + path);
    out << "dataset,model,K,S,reg,accuracy,error\n";
    for (const auto& r : rows) {
        out << r.dataset << "," << r.model << "," << r.num_filters << "," << r.num_transforms << ","
            << detail::format_double(r.reg) << "," << detail::format_double(r.accuracy) << ","
            << detail::format_double(r.error) << "\n";
    }
}

inline void write_confusion(const std::string& path, const Matrix& confusion) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw parse_error("cannot write confusion file: " + path);
    out << "# rows = true class, columns = predicted class\n";
    for (Eigen::Index i = 0; i < confusion.rows(); ++i) {
        for (Eigen::Index j = 0; j < confusion.cols(); ++j)
            out << (j ? " " : "") << static_cast<long long>(confusion(i, j));
        out << "\n";
    }
}

}  // namespace tifl
