#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "splinetool/error.hpp"
#include "splinetool/recon/signal.hpp"

namespace splinetool::io {

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// CSV layout: a "#shape,R,C" header line, then R lines of C comma-separated values.
inline std::string signal_to_csv(const recon::Signal& s) {
    std::string out = "#shape," + std::to_string(s.rows) + "," + std::to_string(s.cols) + "\n";
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t c = 0; c < s.cols; ++c) {
            if (c) out += ',';
            out += format_double(s(r, c));
        }
        out += '\n';
    }
    return out;
}

inline recon::Signal signal_from_csv(const std::string& text, const std::string& name = "signal") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.rfind("#shape,", 0) != 0) {
        fail(ErrorCode::ParseError, name + ": line 1: expected '#shape,ROWS,COLS'");
    }
    std::size_t rows = 0, cols = 0;
    {
        std::istringstream hs(line.substr(7));
        char comma = 0;
        if (!(hs >> rows >> comma >> cols) || comma != ',' || rows == 0 || cols == 0) {
            fail(ErrorCode::ParseError, name + ": line 1: malformed shape header");
        }
    }
    recon::Signal s(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string where = name + ": line " + std::to_string(r + 2);
        if (!std::getline(in, line)) fail(ErrorCode::ParseError, where + ": missing row");
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= cols) fail(ErrorCode::ParseError, where + ": too many values");
            try {
                std::size_t used = 0;
                s(r, c) = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                fail(ErrorCode::ParseError, where + ": bad value '" + cell + "'");
            }
            ++c;
        }
        if (c != cols) fail(ErrorCode::ParseError, where + ": expected " + std::to_string(cols) + " values");
    }
    return s;
}

inline constexpr char kBinaryMagic[4] = {'S', 'P', 'L', 'S'};

/// Binary layout: "SPLS", uint32 rows, uint32 cols (little endian), then
/// rows * cols little-endian IEEE doubles in row-major order.
inline std::string signal_to_binary(const recon::Signal& s) {
    static_assert(std::numeric_limits<double>::is_iec559);
    std::string out(kBinaryMagic, 4);
    const auto put_u32 = [&](std::uint32_t v) {
        for (int b = 0; b < 4; ++b) out += static_cast<char>((v >> (8 * b)) & 0xFFu);
    };
    put_u32(static_cast<std::uint32_t>(s.rows));
    put_u32(static_cast<std::uint32_t>(s.cols));
    for (double v : s.data) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int b = 0; b < 8; ++b) out += static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    return out;
}

inline recon::Signal signal_from_binary(const std::string& bytes, const std::string& name = "signal") {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0) {
        fail(ErrorCode::ParseError, name + ": missing SPLS header");
    }
    const auto get_u32 = [&](std::size_t at) {
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[at + b])) << (8 * b);
        return v;
    };
    const std::size_t rows = get_u32(4), cols = get_u32(8);
    if (rows == 0 || cols == 0 || bytes.size() != 12 + 8 * rows * cols) {
        fail(ErrorCode::ParseError, name + ": size does not match the header shape");
    }
    recon::Signal s(rows, cols);
    for (std::size_t k = 0; k < s.size(); ++k) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[12 + 8 * k + b])) << (8 * b);
        std::memcpy(&s.data[k], &bits, 8);
    }
    return s;
}

inline std::string read_file_bytes(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot open '" + filename + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Reads .bin files as binary and everything else as CSV.
inline recon::Signal read_signal(const std::string& filename) {
    const std::string bytes = read_file_bytes(filename);
    return ends_with(filename, ".bin") ? signal_from_binary(bytes, filename) : signal_from_csv(bytes, filename);
}

inline std::string encode_signal(const std::string& filename, const recon::Signal& s) {
    return ends_with(filename, ".bin") ? signal_to_binary(s) : signal_to_csv(s);
}

} // namespace splinetool::io
