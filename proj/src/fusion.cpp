#include "cimsim/fusion.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cimsim/errors.hpp"
#include "cimsim/matrix_io.hpp"

namespace cimsim {

int64_t FusedWeights::max_abs() const {
    int64_t m = 0;
    for (int64_t v : values) {
        const int64_t a = v < 0 ? -v : v;
        if (a > m) m = a;
    }
    return m;
}

FusedWeights fuse(const FixedPointMatrix& w_q, const FixedPointMatrix& w_k) {
    if (w_q.rows != w_q.cols || w_k.rows != w_k.cols) {
        throw std::invalid_argument("fuse: weight matrices must be square (" +
                                    std::to_string(w_q.rows) + "x" + std::to_string(w_q.cols) +
                                    " and " + std::to_string(w_k.rows) + "x" +
                                    std::to_string(w_k.cols) + ")");
    }
    if (w_q.rows != w_k.rows) {
        throw std::invalid_argument("fuse: dimension mismatch (" + std::to_string(w_q.rows) + "x" +
                                    std::to_string(w_q.cols) + " vs " + std::to_string(w_k.rows) +
                                    "x" + std::to_string(w_k.cols) + ")");
    }
    if (w_q.bits != w_k.bits) {
        throw std::invalid_argument("fuse: bit width mismatch (" + std::to_string(w_q.bits) +
                                    " vs " + std::to_string(w_k.bits) + ")");
    }
    const int d = w_q.rows;
    FusedWeights fw;
    fw.d = d;
    fw.mode = WeightMode::Exact;
    fw.values.assign(static_cast<size_t>(d) * d, 0);
    // values[i][j] = sum_m W_Q[i][m] * W_K[j][m], i.e. W_Q * W_K^T.
    // |value| <= d * 2^(2K-2) <= 2^50 for K <= 16, d <= 2^20: always in int64.
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            int64_t acc = 0;
            for (int m = 0; m < d; ++m) {
                acc += int64_t(w_q.at(i, m)) * int64_t(w_k.at(j, m));
            }
            fw.at(i, j) = acc;
        }
    }
    return fw;
}

FusedWeights requantize(const FusedWeights& exact, int weight_bits) {
    if (exact.mode != WeightMode::Exact) {
        throw std::invalid_argument("requantize: input must be in exact mode");
    }
    if (weight_bits < 2 || weight_bits > 16) {
        throw std::invalid_argument("requantize: weight bits must be in [2,16]");
    }
    const int64_t max_stored = (int64_t(1) << (weight_bits - 1)) - 1;
    const int64_t peak = exact.max_abs();
    const double scale = peak == 0 ? 1.0 : double(peak) / double(max_stored);
    FusedWeights out;
    out.d = exact.d;
    out.mode = WeightMode::Requantized;
    out.weight_bits = weight_bits;
    out.scale = scale;
    out.values.resize(exact.values.size());
    for (size_t i = 0; i < exact.values.size(); ++i) {
        out.values[i] = static_cast<int64_t>(std::round(double(exact.values[i]) / scale));
    }
    return out;
}

WeightTile tile(const FusedWeights& w, int row0, int col0, int rows, int cols) {
    if (row0 < 0 || col0 < 0 || rows < 0 || cols < 0 || row0 + rows > w.d || col0 + cols > w.d) {
        throw std::out_of_range("tile: window outside fused matrix");
    }
    WeightTile t;
    t.rows = rows;
    t.cols = cols;
    t.values.resize(static_cast<size_t>(rows) * cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            t.values[static_cast<size_t>(r) * cols + c] = w.at(row0 + r, col0 + c);
        }
    }
    return t;
}

void save_fused(const FusedWeights& w, const std::string& path) {
    std::vector<int32_t> narrow(w.values.size());
    for (size_t i = 0; i < w.values.size(); ++i) {
        const int64_t v = w.values[i];
        if (v < std::numeric_limits<int32_t>::min() || v > std::numeric_limits<int32_t>::max()) {
            throw UsageError("fused weight " + std::to_string(v) +
                             " does not fit the 32-bit container; requantize first");
        }
        narrow[i] = static_cast<int32_t>(v);
    }
    // The container's width field records the stored width (32 in exact mode).
    const int container_bits = w.mode == WeightMode::Requantized ? w.weight_bits : 32;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out.write("CIMX", 4);
    auto put_u32 = [&out](uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>((v >> 8) & 0xff),
                              static_cast<unsigned char>((v >> 16) & 0xff),
                              static_cast<unsigned char>((v >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    put_u32(static_cast<uint32_t>(w.d));
    put_u32(static_cast<uint32_t>(w.d));
    put_u32(static_cast<uint32_t>(container_bits));
    for (int32_t v : narrow) put_u32(static_cast<uint32_t>(v));
    out.close();

    std::ofstream meta(path + ".meta", std::ios::binary);
    if (!meta) throw UsageError("cannot write " + path + ".meta");
    char scale_buf[64];
    std::snprintf(scale_buf, sizeof scale_buf, "%.17g", w.scale);
    meta << "mode = " << (w.mode == WeightMode::Exact ? "exact" : "requantized") << "\n"
         << "d = " << w.d << "\n"
         << "weight_bits = " << w.weight_bits << "\n"
         << "scale = " << scale_buf << "\n";
}

FusedWeights load_fused(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string_view(magic, 4) != "CIMX") throw UsageError(path + ": missing CIMX magic");
    auto get_u32 = [&in, &path]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        if (!in) throw UsageError("truncated fused weight file: " + path);
        return uint32_t(b[0]) | (uint32_t(b[1]) << 8) | (uint32_t(b[2]) << 16) |
               (uint32_t(b[3]) << 24);
    };
    const uint32_t rows = get_u32();
    const uint32_t cols = get_u32();
    get_u32();  // container width; the sidecar is authoritative
    if (rows != cols) throw UsageError(path + ": fused weights must be square");

    FusedWeights w;
    w.d = static_cast<int>(rows);
    w.values.resize(static_cast<size_t>(rows) * cols);
    for (auto& v : w.values) v = static_cast<int32_t>(get_u32());

    std::ifstream meta(path + ".meta");
    if (!meta) throw UsageError("cannot open " + path + ".meta");
    std::string line;
    while (std::getline(meta, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "mode") {
            if (val == "exact") w.mode = WeightMode::Exact;
            else if (val == "requantized") w.mode = WeightMode::Requantized;
            else throw UsageError(path + ".meta: unknown mode '" + val + "'");
        } else if (key == "d") {
            if (std::stoi(val) != w.d) throw UsageError(path + ".meta: d mismatch with container");
        } else if (key == "weight_bits") {
            w.weight_bits = std::stoi(val);
        } else if (key == "scale") {
            w.scale = std::strtod(val.c_str(), nullptr);
        }
    }
    return w;
}

}  // namespace cimsim
