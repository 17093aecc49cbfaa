#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cimsim {

// Signed two's-complement integer matrix with a declared bit width.
// Widths are capped at 16 so every downstream accumulation fits in a signed
// 64-bit accumulator for d <= 1024 (the engine rejects configurations that
// would break that bound, see check_accumulator_bound).
struct FixedPointMatrix {
    int rows = 0;
    int cols = 0;
    int bits = 0;  // 2..16
    std::vector<int32_t> data;  // row-major

    static FixedPointMatrix zeros(int rows, int cols, int bits);
    // Validates width and range of every element.
    static FixedPointMatrix from_values(int rows, int cols, int bits,
                                        std::vector<int32_t> values);
    static FixedPointMatrix identity(int n, int bits);

    int32_t at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    int32_t& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    std::span<const int32_t> row(int r) const {
        return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)};
    }
    bool operator==(const FixedPointMatrix&) const = default;
};

// Value range of a K-bit two's-complement integer.
int32_t fixed_min(int bits);
int32_t fixed_max(int bits);

// clamp(round(value/scale)) into the K-bit range, round-half-away-from-zero.
// Throws on non-finite input, naming the offending element.
FixedPointMatrix quantize(const std::vector<double>& values, int rows, int cols,
                          int bits, double scale);

// Bit k of the K-bit two's-complement encoding of x; bit K-1 is the sign bit.
int bit_slice(int32_t x, int k, int bits);

// One bit position across a whole vector.
struct BitPlane {
    int plane_index = 0;
    bool is_sign = false;
    std::vector<uint8_t> bits;  // 0/1 per lane

    int popcount() const;
};

BitPlane extract_plane(std::span<const int32_t> v, int k, int bits);

// Rebuilds the signed value from its bit planes (the inverse of slicing).
int32_t reassemble_bits(std::span<const int> plane_bits, int bits);

// n x n wide-integer result matrix holding attention scores.
struct ScoreMatrix {
    int n = 0;
    std::vector<int64_t> values;  // row-major

    static ScoreMatrix zeros(int n);
    int64_t at(int i, int j) const { return values[static_cast<size_t>(i) * n + j]; }
    int64_t& at(int i, int j) { return values[static_cast<size_t>(i) * n + j]; }
    bool operator==(const ScoreMatrix&) const = default;
};

}  // namespace cimsim
