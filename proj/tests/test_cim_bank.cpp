#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "cimsim/cim_bank.hpp"
#include "cimsim/near_memory.hpp"
#include "cimsim/synth.hpp"

using namespace cimsim;

namespace {

MacroConfig small_config(int rows, int cols, SkipMode mode = SkipMode::ElementSkip) {
    MacroConfig cfg;
    cfg.array_rows = rows;
    cfg.array_cols = cols;
    cfg.skip_mode = mode;
    return cfg;
}

WeightTile tile_of(std::vector<int64_t> values, int rows, int cols) {
    WeightTile t;
    t.rows = rows;
    t.cols = cols;
    t.values = std::move(values);
    return t;
}

BitPlane plane_of(std::vector<uint8_t> bits, int index = 0, bool sign = false) {
    BitPlane p;
    p.plane_index = index;
    p.is_sign = sign;
    p.bits = std::move(bits);
    return p;
}

// Reference double sum over all gated cells.
int64_t brute_mac(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b,
                  const std::vector<int64_t>& w, int cols) {
    int64_t acc = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        for (size_t j = 0; j < b.size(); ++j) {
            acc += int64_t(a[i]) * int64_t(b[j]) * w[i * cols + j];
        }
    }
    return acc;
}

}  // namespace

TEST_CASE("load_weights records bit-level write traffic") {
    MacroConfig cfg;  // 64x64, 8-bit weights
    BankState bank(cfg);
    WeightTile t;
    t.rows = 64;
    t.cols = 64;
    t.values.assign(64 * 64, 1);
    bank.load_weights(t);
    CHECK(bank.counters().weight_bit_writes == 64u * 64u * 8u);
    CHECK(bank.loaded());
}

TEST_CASE("small tiles cost only their own bits; reload accumulates") {
    MacroConfig cfg;
    BankState bank(cfg);
    bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
    CHECK(bank.counters().weight_bit_writes == 2u * 2u * 8u);
    bank.load_weights(tile_of({5, 6, 7, 8}, 2, 2));
    CHECK(bank.counters().weight_bit_writes == 2u * 2u * 2u * 8u);
    // second load replaced the tile
    const auto r = bank.bit_plane_mac(plane_of({1, 1}), plane_of({1, 1}));
    CHECK(r == 5 + 6 + 7 + 8);
}

TEST_CASE("oversize tiles are rejected") {
    BankState bank(small_config(2, 2));
    WeightTile t;
    t.rows = 3;
    t.cols = 2;
    t.values.assign(6, 0);
    CHECK_THROWS_AS(bank.load_weights(t), std::invalid_argument);
}

TEST_CASE("compute before load is rejected") {
    BankState bank(small_config(2, 2));
    CHECK_THROWS_AS(bank.bit_plane_mac(plane_of({1, 1}), plane_of({1, 1})), std::logic_error);
    std::vector<int32_t> v = {1, 1};
    CHECK_THROWS_AS(bank.process_pair(v, v, 4), std::logic_error);
}

TEST_CASE("bit_plane_mac computes the gated double sum") {
    BankState bank(small_config(2, 2));
    bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
    CHECK(bank.bit_plane_mac(plane_of({1, 1}), plane_of({1, 1})) == 10);
    CHECK(bank.bit_plane_mac(plane_of({1, 0}), plane_of({0, 1})) == 2);
}

TEST_CASE("an all-zero plane is bypassed without burning a cycle") {
    for (SkipMode mode : {SkipMode::PlaneSkip, SkipMode::ElementSkip}) {
        BankState bank(small_config(2, 2, mode));
        bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
        const auto before = bank.counters();
        CHECK(bank.bit_plane_mac(plane_of({0, 0}), plane_of({1, 1})) == 0);
        CHECK(bank.counters().cycles == before.cycles);
        CHECK(bank.counters().skipped_cycles == before.skipped_cycles + 1);
        CHECK(bank.counters().wordline_activations == before.wordline_activations);
    }
    // under None the same pair costs a cycle
    BankState bank(small_config(2, 2, SkipMode::None));
    bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
    CHECK(bank.bit_plane_mac(plane_of({0, 0}), plane_of({1, 1})) == 0);
    CHECK(bank.counters().cycles == 1);
    CHECK(bank.counters().skipped_cycles == 0);
}

TEST_CASE("bit_plane_mac rejects mismatched plane lengths") {
    BankState bank(small_config(2, 2));
    bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
    CHECK_THROWS_AS(bank.bit_plane_mac(plane_of({1, 1, 1}), plane_of({1, 1})),
                    std::invalid_argument);
}

TEST_CASE("bit_plane_mac equals the brute-force sum for every pattern, R+C <= 12") {
    DetRng rng(5);
    const int rows = 6, cols = 6;
    std::vector<int64_t> w(rows * cols);
    for (auto& v : w) v = rng.uniform(-128, 127);
    for (SkipMode mode : {SkipMode::None, SkipMode::PlaneSkip, SkipMode::ElementSkip}) {
        BankState bank(small_config(rows, cols, mode));
        bank.load_weights(tile_of(w, rows, cols));
        for (uint32_t pa = 0; pa < (1u << rows); ++pa) {
            for (uint32_t pb = 0; pb < (1u << cols); ++pb) {
                std::vector<uint8_t> a(rows), b(cols);
                for (int i = 0; i < rows; ++i) a[i] = (pa >> i) & 1;
                for (int j = 0; j < cols; ++j) b[j] = (pb >> j) & 1;
                REQUIRE(bank.bit_plane_mac(plane_of(a), plane_of(b)) == brute_mac(a, b, w, cols));
            }
        }
    }
}

TEST_CASE("bit_plane_mac matches brute force on random full-width patterns") {
    DetRng rng(7);
    const int rows = 64, cols = 64;
    std::vector<int64_t> w(size_t(rows) * cols);
    for (auto& v : w) v = rng.uniform(-128, 127);
    BankState bank(small_config(rows, cols));
    bank.load_weights(tile_of(w, rows, cols));
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<uint8_t> a(rows), b(cols);
        for (auto& bit : a) bit = rng.next() & 1;
        for (auto& bit : b) bit = rng.next() & 1;
        REQUIRE(bank.bit_plane_mac(plane_of(a), plane_of(b)) == brute_mac(a, b, w, cols));
    }
}

TEST_CASE("counter detail: wordlines, reads and adders for one executed pair") {
    // w has one zero entry to separate adder_ops from bitline_reads
    const std::vector<int64_t> w = {1, 0, 3, 4};

    BankState element(small_config(2, 2, SkipMode::ElementSkip));
    element.load_weights(tile_of(w, 2, 2));
    element.bit_plane_mac(plane_of({1, 1}), plane_of({1, 0}));
    CHECK(element.counters().cycles == 1);
    CHECK(element.counters().wordline_activations == 2);  // popcount(a)
    CHECK(element.counters().bitline_reads == 2 * 1);     // popcount(a) * popcount(b)
    CHECK(element.counters().adder_ops == 2);             // w00, w10 gated non-zero

    BankState plane(small_config(2, 2, SkipMode::PlaneSkip));
    plane.load_weights(tile_of(w, 2, 2));
    plane.bit_plane_mac(plane_of({1, 1}), plane_of({1, 0}));
    CHECK(plane.counters().wordline_activations == 2);
    CHECK(plane.counters().bitline_reads == 2 * 2);  // popcount(a) * C
    CHECK(plane.counters().adder_ops == 2);
}

TEST_CASE("process_pair on zero vectors skips every plane pair") {
    MacroConfig cfg = small_config(8, 8);
    BankState bank(cfg);
    bank.load_weights(tile_of(std::vector<int64_t>(64, 7), 8, 8));
    std::vector<int32_t> zero(8, 0);
    const auto acc = bank.process_pair(zero, zero, 8);
    CHECK(acc == GroupAccumulators{});
    CHECK(bank.counters().cycles == 0);
    CHECK(bank.counters().skipped_cycles == 64);
}

TEST_CASE("process_pair routes the sign-cross term into the second group") {
    // d=1, w=[[3]], K=2, xi=[-2] (bits: b0=0, sign=1), xj=[1] (bits: b0=1, sign=0)
    BankState bank(small_config(1, 1));
    bank.load_weights(tile_of({3}, 1, 1));
    std::vector<int32_t> xi = {-2}, xj = {1};
    const auto acc = bank.process_pair(xi, xj, 2);
    CHECK(acc.sign_sign == 0);
    CHECK(acc.sign_mag == 3 * 2);  // raw 3 shifted by 2^(K-1+0)
    CHECK(acc.mag_sign == 0);
    CHECK(acc.mag_mag == 0);
    CHECK(combine_groups(acc, 2) == -6);
    CHECK(combine_groups(acc, 2) == int64_t(-2) * 3 * 1);
}

TEST_CASE("process_pair result combines to the exact product, d=2 K=4") {
    DetRng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int64_t> w(4);
        for (auto& v : w) v = rng.uniform(-128, 127);
        BankState bank(small_config(2, 2));
        bank.load_weights(tile_of(w, 2, 2));
        std::vector<int32_t> xi = {5, -1}, xj = {-8, 0};
        const auto acc = bank.process_pair(xi, xj, 4);
        int64_t expect = 0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                expect += int64_t(xi[i]) * w[size_t(i) * 2 + j] * int64_t(xj[j]);
            }
        }
        REQUIRE(combine_groups(acc, 4) == expect);
    }
}

TEST_CASE("process_pair validates ranges and widths") {
    BankState bank(small_config(2, 2));
    bank.load_weights(tile_of({1, 2, 3, 4}, 2, 2));
    std::vector<int32_t> ok = {1, -2}, wide = {9, 0};
    CHECK_THROWS_AS(bank.process_pair(wide, ok, 4), std::invalid_argument);
    CHECK_THROWS_AS(bank.process_pair(ok, ok, 1), std::invalid_argument);
    std::vector<int32_t> short_vec = {1};
    CHECK_THROWS_AS(bank.process_pair(short_vec, ok, 4), std::invalid_argument);
}

TEST_CASE("plane-skip cycle accounting: cycles + skipped == K^2, skipped == zero planes") {
    DetRng rng(29);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = static_cast<int>(rng.uniform(1, 8));
        const int kbits = static_cast<int>(rng.uniform(2, 8));
        const auto xi = random_matrix_with_bit_density(1, d, kbits, 0.3, rng);
        const auto xj = random_matrix_with_bit_density(1, d, kbits, 0.3, rng);
        std::vector<int64_t> w(size_t(d) * d);
        for (auto& v : w) v = rng.uniform(-8, 8);

        BankState bank(small_config(d, d, SkipMode::PlaneSkip));
        bank.load_weights(tile_of(w, d, d));
        bank.process_pair(xi.row(0), xj.row(0), kbits);

        // direct enumeration of zero planes
        uint64_t zero_pairs = 0;
        for (int i_star = 0; i_star < kbits; ++i_star) {
            for (int j_star = 0; j_star < kbits; ++j_star) {
                const bool a_zero = extract_plane(xi.row(0), i_star, kbits).popcount() == 0;
                const bool b_zero = extract_plane(xj.row(0), j_star, kbits).popcount() == 0;
                if (a_zero || b_zero) ++zero_pairs;
            }
        }
        REQUIRE(bank.counters().cycles + bank.counters().skipped_cycles ==
                uint64_t(kbits) * kbits);
        REQUIRE(bank.counters().skipped_cycles == zero_pairs);
    }
}

TEST_CASE("skip modes agree on results; wordline ordering invariant holds") {
    DetRng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = static_cast<int>(rng.uniform(1, 10));
        const int kbits = static_cast<int>(rng.uniform(2, 8));
        const auto xi = random_matrix_with_bit_density(1, d, kbits, 0.5, rng);
        const auto xj = random_matrix_with_bit_density(1, d, kbits, 0.5, rng);
        std::vector<int64_t> w(size_t(d) * d);
        for (auto& v : w) v = rng.uniform(-16, 16);

        int64_t results[3];
        BankCounters counters[3];
        const SkipMode modes[3] = {SkipMode::None, SkipMode::PlaneSkip, SkipMode::ElementSkip};
        for (int m = 0; m < 3; ++m) {
            BankState bank(small_config(d, d, modes[m]));
            bank.load_weights(tile_of(w, d, d));
            results[m] = combine_groups(bank.process_pair(xi.row(0), xj.row(0), kbits), kbits);
            counters[m] = bank.counters();
        }
        REQUIRE(results[0] == results[1]);
        REQUIRE(results[1] == results[2]);
        // ElementSkip <= PlaneSkip <= R * cycles
        CHECK(counters[2].wordline_activations <= counters[1].wordline_activations);
        CHECK(counters[1].wordline_activations <= uint64_t(d) * counters[1].cycles);
        CHECK(counters[2].bitline_reads <= counters[1].bitline_reads);
    }
}
