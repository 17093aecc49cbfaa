#pragma once

#include <string>

#include "cimsim/fixedpoint.hpp"

namespace cimsim {

// Matrix file formats.
//
// CSV: one row per line, comma-separated decimal integers.
//
// Binary ("CIMX"): 16-byte header = magic "CIMX", u32 rows, u32 cols,
// u32 bit width (all little-endian), followed by row-major 32-bit
// little-endian signed integers.

FixedPointMatrix load_matrix_csv(const std::string& path, int bits);
void save_matrix_csv(const FixedPointMatrix& m, const std::string& path);

FixedPointMatrix load_matrix_bin(const std::string& path);
void save_matrix_bin(const FixedPointMatrix& m, const std::string& path);

// Sniffs the CIMX magic; CSV parsing otherwise. `bits` applies to CSV input
// (the binary header carries its own width).
FixedPointMatrix load_matrix_auto(const std::string& path, int bits);

void save_scores_csv(const ScoreMatrix& s, const std::string& path);
// Scores reuse the CIMX container (bit-width field 32); values outside the
// 32-bit range are rejected, use CSV for those.
void save_scores_bin(const ScoreMatrix& s, const std::string& path);
ScoreMatrix load_scores_csv(const std::string& path);

}  // namespace cimsim
