#include "cimsim/matrix_io.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <limits>

#include "cimsim/errors.hpp"

namespace cimsim {

namespace {

constexpr char kMagic[4] = {'C', 'I', 'M', 'X'};

void put_u32(std::ostream& os, uint32_t v) {
    std::array<unsigned char, 4> b = {static_cast<unsigned char>(v & 0xff),
                                      static_cast<unsigned char>((v >> 8) & 0xff),
                                      static_cast<unsigned char>((v >> 16) & 0xff),
                                      static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b.data()), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    std::array<unsigned char, 4> b{};
    is.read(reinterpret_cast<char*>(b.data()), 4);
    if (!is) throw UsageError("truncated binary matrix file: " + path);
    return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) | (uint32_t(b[3]) << 24);
}

int64_t parse_int(std::string_view tok, const std::string& path, int line) {
    // trim spaces
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r')) tok.remove_suffix(1);
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
        throw UsageError(path + ":" + std::to_string(line) + ": not an integer: '" +
                         std::string(tok) + "'");
    }
    return v;
}

}  // namespace

FixedPointMatrix load_matrix_csv(const std::string& path, int bits) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<int32_t> values;
    int rows = 0;
    int cols = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int n = 0;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            std::string_view tok(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
            int64_t v = parse_int(tok, path, lineno);
            if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max()) {
                throw UsageError(path + ":" + std::to_string(lineno) + ": value out of range");
            }
            values.push_back(static_cast<int32_t>(v));
            ++n;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols < 0) {
            cols = n;
        } else if (n != cols) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": ragged row (" +
                             std::to_string(n) + " vs " + std::to_string(cols) + " columns)");
        }
        ++rows;
    }
    if (rows == 0) throw UsageError(path + ": empty matrix");
    try {
        return FixedPointMatrix::from_values(rows, cols, bits, std::move(values));
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void save_matrix_csv(const FixedPointMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            if (c) out << ',';
            out << m.at(r, c);
        }
        out << '\n';
    }
}

FixedPointMatrix load_matrix_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw UsageError(path + ": missing CIMX magic");
    }
    const uint32_t rows = get_u32(in, path);
    const uint32_t cols = get_u32(in, path);
    const uint32_t bits = get_u32(in, path);
    if (rows > (1u << 20) || cols > (1u << 20)) {
        throw UsageError(path + ": implausible shape");
    }
    std::vector<int32_t> values(static_cast<size_t>(rows) * cols);
    for (auto& v : values) {
        v = static_cast<int32_t>(get_u32(in, path));
    }
    try {
        return FixedPointMatrix::from_values(static_cast<int>(rows), static_cast<int>(cols),
                                             static_cast<int>(bits), std::move(values));
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void save_matrix_bin(const FixedPointMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out.write(kMagic, 4);
    put_u32(out, static_cast<uint32_t>(m.rows));
    put_u32(out, static_cast<uint32_t>(m.cols));
    put_u32(out, static_cast<uint32_t>(m.bits));
    for (int32_t v : m.data) put_u32(out, static_cast<uint32_t>(v));
}

FixedPointMatrix load_matrix_auto(const std::string& path, int bits) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.close();
    if (std::memcmp(magic, kMagic, 4) == 0) return load_matrix_bin(path);
    return load_matrix_csv(path, bits);
}

void save_scores_csv(const ScoreMatrix& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    for (int i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.n; ++j) {
            if (j) out << ',';
            out << s.at(i, j);
        }
        out << '\n';
    }
}

void save_scores_bin(const ScoreMatrix& s, const std::string& path) {
    for (int64_t v : s.values) {
        if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max()) {
            throw UsageError("score " + std::to_string(v) +
                             " does not fit the 32-bit binary container; use csv output");
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out.write(kMagic, 4);
    put_u32(out, static_cast<uint32_t>(s.n));
    put_u32(out, static_cast<uint32_t>(s.n));
    put_u32(out, 32u);
    for (int64_t v : s.values) put_u32(out, static_cast<uint32_t>(static_cast<int32_t>(v)));
}

ScoreMatrix load_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    std::vector<int64_t> values;
    int rows = 0;
    int cols = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        int n = 0;
        size_t start = 0;
        while (true) {
            size_t comma = line.find(',', start);
            std::string_view tok(line.data() + start,
                                 (comma == std::string::npos ? line.size() : comma) - start);
            values.push_back(parse_int(tok, path, lineno));
            ++n;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cols < 0) cols = n;
        else if (n != cols) throw UsageError(path + ": ragged row");
        ++rows;
    }
    if (rows != cols) throw UsageError(path + ": score matrix must be square");
    ScoreMatrix s;
    s.n = rows;
    s.values = std::move(values);
    return s;
}

}  // namespace cimsim
