#include "cimsim/fixedpoint.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cimsim {

namespace {

void check_bits(int bits) {
    if (bits < 2 || bits > 16) {
        throw std::invalid_argument("bit width must be in [2,16], got " + std::to_string(bits));
    }
}

void check_shape(int rows, int cols) {
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("negative matrix shape");
    }
}

}  // namespace

int32_t fixed_min(int bits) { return -(int32_t(1) << (bits - 1)); }
int32_t fixed_max(int bits) { return (int32_t(1) << (bits - 1)) - 1; }

FixedPointMatrix FixedPointMatrix::zeros(int rows, int cols, int bits) {
    check_bits(bits);
    check_shape(rows, cols);
    FixedPointMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.bits = bits;
    m.data.assign(static_cast<size_t>(rows) * cols, 0);
    return m;
}

FixedPointMatrix FixedPointMatrix::from_values(int rows, int cols, int bits,
                                               std::vector<int32_t> values) {
    check_bits(bits);
    check_shape(rows, cols);
    if (values.size() != static_cast<size_t>(rows) * cols) {
        throw std::invalid_argument("element count does not match shape");
    }
    const int32_t lo = fixed_min(bits);
    const int32_t hi = fixed_max(bits);
    for (size_t i = 0; i < values.size(); ++i) {
        if (values[i] < lo || values[i] > hi) {
            throw std::invalid_argument("element " + std::to_string(values[i]) + " at index " +
                                        std::to_string(i) + " outside " + std::to_string(bits) +
                                        "-bit range");
        }
    }
    FixedPointMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.bits = bits;
    m.data = std::move(values);
    return m;
}

FixedPointMatrix FixedPointMatrix::identity(int n, int bits) {
    FixedPointMatrix m = zeros(n, n, bits);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

FixedPointMatrix quantize(const std::vector<double>& values, int rows, int cols,
                          int bits, double scale) {
    check_bits(bits);
    check_shape(rows, cols);
    if (!(scale > 0.0)) {
        throw std::invalid_argument("quantize: scale must be positive");
    }
    if (values.size() != static_cast<size_t>(rows) * cols) {
        throw std::invalid_argument("quantize: element count does not match shape");
    }
    const double lo = fixed_min(bits);
    const double hi = fixed_max(bits);
    FixedPointMatrix m = FixedPointMatrix::zeros(rows, cols, bits);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double v = values[static_cast<size_t>(r) * cols + c];
            if (!std::isfinite(v)) {
                throw std::invalid_argument("quantize: non-finite value at (" +
                                            std::to_string(r) + "," + std::to_string(c) + ")");
            }
            // std::round rounds halves away from zero.
            double q = std::round(v / scale);
            if (q < lo) q = lo;
            if (q > hi) q = hi;
            m.at(r, c) = static_cast<int32_t>(q);
        }
    }
    return m;
}

int bit_slice(int32_t x, int k, int bits) {
    check_bits(bits);
    if (k < 0 || k >= bits) {
        throw std::out_of_range("bit index " + std::to_string(k) + " outside width " +
                                std::to_string(bits));
    }
    if (x < fixed_min(bits) || x > fixed_max(bits)) {
        throw std::invalid_argument("value " + std::to_string(x) + " outside " +
                                    std::to_string(bits) + "-bit range");
    }
    return (static_cast<uint32_t>(x) >> k) & 1u;
}

int BitPlane::popcount() const {
    int n = 0;
    for (uint8_t b : bits) n += b;
    return n;
}

BitPlane extract_plane(std::span<const int32_t> v, int k, int bits) {
    BitPlane p;
    p.plane_index = k;
    p.is_sign = (k == bits - 1);
    p.bits.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        p.bits[i] = static_cast<uint8_t>(bit_slice(v[i], k, bits));
    }
    return p;
}

int32_t reassemble_bits(std::span<const int> plane_bits, int bits) {
    check_bits(bits);
    if (plane_bits.size() != static_cast<size_t>(bits)) {
        throw std::invalid_argument("reassemble_bits: plane count does not match width");
    }
    int32_t v = -(plane_bits[bits - 1] << (bits - 1));
    for (int k = 0; k < bits - 1; ++k) {
        v += plane_bits[k] << k;
    }
    return v;
}

ScoreMatrix ScoreMatrix::zeros(int n) {
    if (n < 0) throw std::invalid_argument("negative score matrix size");
    ScoreMatrix s;
    s.n = n;
    s.values.assign(static_cast<size_t>(n) * n, 0);
    return s;
}

}  // namespace cimsim
