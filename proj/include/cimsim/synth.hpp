#pragma once

#include <cstdint>
#include <random>

#include "cimsim/fixedpoint.hpp"

namespace cimsim {

// Deterministic generator for synthetic workloads. mt19937_64's output
// sequence is pinned by the standard and draws avoid std distributions
// (whose mappings are implementation-defined), so the same seed yields the
// same matrices on every platform.
class DetRng {
public:
    explicit DetRng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }
    // Uniform in [lo, hi]; modulo bias is irrelevant for test data.
    int64_t uniform(int64_t lo, int64_t hi);
    double unit();  // [0, 1)

private:
    std::mt19937_64 gen_;
};

// Mixes a row/config index into a base seed so sweep entries are independent.
uint64_t derive_seed(uint64_t base, uint64_t index);

// Uniform values over the full K-bit range.
FixedPointMatrix random_matrix(int rows, int cols, int bits, DetRng& rng);

// Values with all-nonzero entries (magnitude >= 1), for dense-weight studies.
FixedPointMatrix random_nonzero_matrix(int rows, int cols, int bits, DetRng& rng);

// Each bit of each element is set independently with probability
// `bit_density`; the value is whatever the bits spell in two's complement.
FixedPointMatrix random_matrix_with_bit_density(int rows, int cols, int bits,
                                                double bit_density, DetRng& rng);

// First (1 - zero_fraction) of the tokens have every bit set, the tail is
// zero padding. Mirrors padded variable-length sequences.
FixedPointMatrix padded_tokens(int n_tokens, int d, int bits, double zero_fraction);

// Fraction of zero bits over all K-bit encodings in the matrix.
double measured_bit_sparsity(const FixedPointMatrix& m);

}  // namespace cimsim
