#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cimsim/fixedpoint.hpp"

namespace cimsim {

enum class WeightMode { Exact, Requantized };

// The pre-computed QK weight product, stored either exactly (wide integers)
// or narrowed to the macro's stored weight width with a symmetric max-abs
// scale. Fusion happens once per model; the macro then serves every token
// from the same stored tile.
struct FusedWeights {
    int d = 0;
    WeightMode mode = WeightMode::Exact;
    int weight_bits = 0;   // Requantized only
    double scale = 1.0;    // stored value * scale ~= exact value (Requantized)
    std::vector<int64_t> values;  // d x d row-major

    int64_t at(int i, int j) const { return values[static_cast<size_t>(i) * d + j]; }
    int64_t& at(int i, int j) { return values[static_cast<size_t>(i) * d + j]; }
    int64_t max_abs() const;
    bool operator==(const FusedWeights&) const = default;
};

// W_Q * W_K^T in exact integer arithmetic. Both inputs square, same size,
// same declared width.
FusedWeights fuse(const FixedPointMatrix& w_q, const FixedPointMatrix& w_k);

// Narrows exact fused weights to `weight_bits` with scale = max|v| / (2^(W-1)-1)
// (scale 1 when all zero) and round-half-away-from-zero storage.
FusedWeights requantize(const FusedWeights& exact, int weight_bits);

// Rectangular view into the fused matrix, the unit a bank stores.
struct WeightTile {
    int rows = 0;
    int cols = 0;
    std::vector<int64_t> values;  // row-major

    int64_t at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

WeightTile tile(const FusedWeights& w, int row0, int col0, int rows, int cols);

// Persist as the CIMX binary container plus a key = value sidecar
// (<path>.meta) carrying mode, weight_bits, scale and d.
void save_fused(const FusedWeights& w, const std::string& path);
FusedWeights load_fused(const std::string& path);

}  // namespace cimsim
