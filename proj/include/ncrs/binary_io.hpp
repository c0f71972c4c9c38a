#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ncrs/errors.hpp"

namespace ncrs::bin {

// All multi-byte values are stored little-endian regardless of host order.

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& os, double v) { write_u64(os, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= std::uint32_t(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
        throw DataError("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& is) { return std::bit_cast<double>(read_u64(is)); }

inline void write_f64_array(std::ostream& os, const double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            write_f64(os, data[i]);
    }
}

inline void read_f64_array(std::istream& is, double* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double))))
            throw DataError("unexpected end of file");
    } else {
        for (std::size_t i = 0; i < n; ++i)
            data[i] = read_f64(is);
    }
}

inline void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
    write_u64(os, static_cast<std::uint64_t>(v.size()));
    write_f64_array(os, v.data(), static_cast<std::size_t>(v.size()));
}

inline Eigen::VectorXd read_vector(std::istream& is) {
    const auto n = read_u64(is);
    if (n > (std::uint64_t{1} << 32))
        throw DataError("vector length out of range");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    read_f64_array(is, v.data(), n);
    return v;
}

inline void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
    write_u64(os, static_cast<std::uint64_t>(m.rows()));
    write_u64(os, static_cast<std::uint64_t>(m.cols()));
    write_f64_array(os, m.data(), static_cast<std::size_t>(m.size()));
}

inline Eigen::MatrixXd read_matrix(std::istream& is) {
    const auto r = read_u64(is);
    const auto c = read_u64(is);
    if (r > (1u << 20) || c > (1u << 20))
        throw DataError("matrix shape out of range");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    read_f64_array(is, m.data(), r * c);
    return m;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    const auto n = read_u64(is);
    if (n > (std::uint64_t{1} << 30))
        throw DataError("string length out of range");
    std::string s(n, '\0');
    if (!is.read(s.data(), static_cast<std::streamsize>(n)))
        throw DataError("unexpected end of file");
    return s;
}

inline void expect_magic(std::istream& is, std::string_view magic) {
    std::string got(magic.size(), '\0');
    if (!is.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
        throw DataError("bad magic, expected \"" + std::string(magic) + "\"");
}

} // namespace ncrs::bin
