#include <doctest.h>

#include <limits>
#include <stdexcept>
#include <vector>

#include "cimsim/fixedpoint.hpp"
#include "cimsim/synth.hpp"

using namespace cimsim;

TEST_CASE("quantize maps zero to zero") {
    const auto m = quantize(std::vector<double>(6, 0.0), 2, 3, 8, 1.0);
    for (int32_t v : m.data) CHECK(v == 0);
}

TEST_CASE("quantize saturates at the positive clamp") {
    const auto m = quantize({200.0}, 1, 1, 8, 1.0);
    CHECK(m.at(0, 0) == 127);
    const auto lo = quantize({-300.0}, 1, 1, 8, 1.0);
    CHECK(lo.at(0, 0) == -128);
}

TEST_CASE("quantize rounds half away from zero") {
    // -0.6 / 0.25 = -2.4 -> -2
    CHECK(quantize({-0.6}, 1, 1, 4, 0.25).at(0, 0) == -2);
    // halves move away from zero
    CHECK(quantize({2.5}, 1, 1, 8, 1.0).at(0, 0) == 3);
    CHECK(quantize({-2.5}, 1, 1, 8, 1.0).at(0, 0) == -3);
}

TEST_CASE("quantize rejects non-finite input with coordinates") {
    std::vector<double> vals = {0.0, 1.0, std::numeric_limits<double>::infinity(), 2.0};
    CHECK_THROWS_WITH_AS(quantize(vals, 2, 2, 8, 1.0),
                         doctest::Contains("(1,0)"), std::invalid_argument);
    CHECK_THROWS_AS(quantize({1.0}, 1, 1, 8, 0.0), std::invalid_argument);
}

TEST_CASE("quantize is monotone in the input value") {
    DetRng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        double a = (rng.unit() - 0.5) * 600.0;
        double b = (rng.unit() - 0.5) * 600.0;
        if (a > b) std::swap(a, b);
        const double scale = 0.1 + rng.unit();
        CHECK(quantize({a}, 1, 1, 8, scale).at(0, 0) <= quantize({b}, 1, 1, 8, scale).at(0, 0));
    }
}

TEST_CASE("bit_slice on zero and the all-ones pattern") {
    for (int k = 0; k < 4; ++k) {
        CHECK(bit_slice(0, k, 4) == 0);
        CHECK(bit_slice(-1, k, 4) == 1);
    }
}

TEST_CASE("bit_slice of the most negative value sets only the sign bit") {
    CHECK(bit_slice(-8, 0, 4) == 0);
    CHECK(bit_slice(-8, 1, 4) == 0);
    CHECK(bit_slice(-8, 2, 4) == 0);
    CHECK(bit_slice(-8, 3, 4) == 1);
}

TEST_CASE("bit_slice rejects out-of-width indices") {
    CHECK_THROWS_AS(bit_slice(1, 4, 4), std::out_of_range);
    CHECK_THROWS_AS(bit_slice(1, -1, 4), std::out_of_range);
}

TEST_CASE("extract_plane picks one bit across the vector") {
    const std::vector<int32_t> zeros(4, 0);
    const auto p0 = extract_plane(zeros, 0, 4);
    CHECK(p0.popcount() == 0);
    CHECK_FALSE(p0.is_sign);

    // 5 = 0101, -1 = 1111
    const std::vector<int32_t> v = {5, -1};
    const auto p2 = extract_plane(v, 2, 4);
    CHECK(p2.bits == std::vector<uint8_t>{1, 1});
    const auto p3 = extract_plane(v, 3, 4);
    CHECK(p3.bits == std::vector<uint8_t>{0, 1});
    CHECK(p3.is_sign);
}

TEST_CASE("reconstruction identity holds exhaustively up to 10 bits") {
    for (int bits = 2; bits <= 10; ++bits) {
        for (int32_t x = fixed_min(bits); x <= fixed_max(bits); ++x) {
            int64_t v = -int64_t(bit_slice(x, bits - 1, bits)) << (bits - 1);
            for (int k = 0; k < bits - 1; ++k) {
                v += int64_t(bit_slice(x, k, bits)) << k;
            }
            REQUIRE(v == x);
        }
    }
}

TEST_CASE("plane extraction and reassembly round-trip a row") {
    DetRng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const int bits = static_cast<int>(rng.uniform(2, 12));
        const auto m = random_matrix(1, 16, bits, rng);
        std::vector<BitPlane> planes;
        for (int k = 0; k < bits; ++k) planes.push_back(extract_plane(m.row(0), k, bits));
        for (int c = 0; c < m.cols; ++c) {
            std::vector<int> pb(bits);
            for (int k = 0; k < bits; ++k) pb[k] = planes[k].bits[c];
            CHECK(reassemble_bits(pb, bits) == m.at(0, c));
        }
    }
}

TEST_CASE("from_values rejects out-of-range elements and bad shapes") {
    CHECK_THROWS_AS(FixedPointMatrix::from_values(1, 1, 4, {8}), std::invalid_argument);
    CHECK_THROWS_AS(FixedPointMatrix::from_values(1, 2, 4, {1}), std::invalid_argument);
    CHECK_THROWS_AS(FixedPointMatrix::zeros(1, 1, 17), std::invalid_argument);
    CHECK_THROWS_AS(FixedPointMatrix::zeros(1, 1, 1), std::invalid_argument);
}
