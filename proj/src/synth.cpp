#include "cimsim/synth.hpp"

#include <stdexcept>

namespace cimsim {

int64_t DetRng::uniform(int64_t lo, int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform: empty range");
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int64_t>(next() % span);
}

double DetRng::unit() { return double(next() >> 11) * 0x1.0p-53; }

uint64_t derive_seed(uint64_t base, uint64_t index) {
    // splitmix64 step over base ^ index keeps rows decorrelated.
    uint64_t z = base ^ (index * 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

FixedPointMatrix random_matrix(int rows, int cols, int bits, DetRng& rng) {
    FixedPointMatrix m = FixedPointMatrix::zeros(rows, cols, bits);
    const int32_t lo = fixed_min(bits);
    const int32_t hi = fixed_max(bits);
    for (auto& v : m.data) v = static_cast<int32_t>(rng.uniform(lo, hi));
    return m;
}

FixedPointMatrix random_nonzero_matrix(int rows, int cols, int bits, DetRng& rng) {
    FixedPointMatrix m = FixedPointMatrix::zeros(rows, cols, bits);
    const int32_t hi = fixed_max(bits);
    for (auto& v : m.data) {
        const int32_t mag = static_cast<int32_t>(rng.uniform(1, hi));
        v = rng.next() & 1 ? mag : -mag;
    }
    return m;
}

FixedPointMatrix random_matrix_with_bit_density(int rows, int cols, int bits,
                                                double bit_density, DetRng& rng) {
    if (!(bit_density >= 0.0 && bit_density <= 1.0)) {
        throw std::invalid_argument("bit density must be in [0,1]");
    }
    FixedPointMatrix m = FixedPointMatrix::zeros(rows, cols, bits);
    for (auto& v : m.data) {
        uint32_t pattern = 0;
        for (int k = 0; k < bits; ++k) {
            if (rng.unit() < bit_density) pattern |= uint32_t(1) << k;
        }
        // sign-extend from `bits` to 32
        if (pattern & (uint32_t(1) << (bits - 1))) {
            pattern |= ~((uint32_t(1) << bits) - 1);
        }
        v = static_cast<int32_t>(pattern);
    }
    return m;
}

FixedPointMatrix padded_tokens(int n_tokens, int d, int bits, double zero_fraction) {
    if (!(zero_fraction >= 0.0 && zero_fraction <= 1.0)) {
        throw std::invalid_argument("zero fraction must be in [0,1]");
    }
    FixedPointMatrix m = FixedPointMatrix::zeros(n_tokens, d, bits);
    const int live = n_tokens - static_cast<int>(zero_fraction * n_tokens);
    for (int t = 0; t < live; ++t) {
        for (int c = 0; c < d; ++c) m.at(t, c) = -1;  // every bit set
    }
    return m;
}

double measured_bit_sparsity(const FixedPointMatrix& m) {
    if (m.data.empty()) return 0.0;
    uint64_t zeros = 0;
    for (int32_t v : m.data) {
        for (int k = 0; k < m.bits; ++k) {
            if (((static_cast<uint32_t>(v) >> k) & 1u) == 0) ++zeros;
        }
    }
    return double(zeros) / (double(m.data.size()) * m.bits);
}

}  // namespace cimsim
