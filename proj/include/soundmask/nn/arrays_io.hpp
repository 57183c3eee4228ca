#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "soundmask/error.hpp"

namespace soundmask::nn {

using NamedArrays = std::vector<std::pair<std::string, Eigen::MatrixXd>>;

// count + per array: u16 name length, name bytes, u32 rows, u32 cols, raw
// little-endian f64 column-major payload
inline void write_arrays(std::ostream& f, const NamedArrays& arrays) {
    const std::uint32_t count = static_cast<std::uint32_t>(arrays.size());
    f.write(reinterpret_cast<const char*>(&count), 4);
    for (const auto& [name, m] : arrays) {
        const std::uint16_t name_len = static_cast<std::uint16_t>(name.size());
        f.write(reinterpret_cast<const char*>(&name_len), 2);
        f.write(name.data(), name_len);
        const std::uint32_t rows = static_cast<std::uint32_t>(m.rows());
        const std::uint32_t cols = static_cast<std::uint32_t>(m.cols());
        f.write(reinterpret_cast<const char*>(&rows), 4);
        f.write(reinterpret_cast<const char*>(&cols), 4);
        f.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(sizeof(double) * m.size()));
    }
}

inline NamedArrays read_arrays(std::istream& f, const std::string& path) {
    std::uint32_t count = 0;
    f.read(reinterpret_cast<char*>(&count), 4);
    if (!f) throw FormatError(path + ": truncated array table");
    NamedArrays arrays;
    arrays.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::uint16_t name_len = 0;
        f.read(reinterpret_cast<char*>(&name_len), 2);
        std::string name(name_len, '\0');
        f.read(name.data(), name_len);
        std::uint32_t rows = 0, cols = 0;
        f.read(reinterpret_cast<char*>(&rows), 4);
        f.read(reinterpret_cast<char*>(&cols), 4);
        if (!f) throw FormatError(path + ": truncated array header");
        if (static_cast<std::uint64_t>(rows) * cols > (1ull << 28)) {
            throw FormatError(path + ": oversized array");
        }
        Eigen::MatrixXd m(rows, cols);
        f.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double) * m.size()));
        if (!f) throw FormatError(path + ": truncated array body");
        arrays.emplace_back(std::move(name), std::move(m));
    }
    return arrays;
}

}  // namespace soundmask::nn
