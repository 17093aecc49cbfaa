#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cimsim/config.hpp"
#include "cimsim/fixedpoint.hpp"
#include "cimsim/fusion.hpp"

namespace cimsim {

// Event counters for one bank. All fields are monotone within a run and
// aggregate by plain summation, so per-worker counters can be merged in any
// order without changing totals.
struct BankCounters {
    uint64_t cycles = 0;                // executed bit-plane pairs
    uint64_t skipped_cycles = 0;        // bypassed bit-plane pairs
    uint64_t wordline_activations = 0;
    uint64_t bitline_reads = 0;
    uint64_t adder_ops = 0;             // non-zero gated weight accumulations
    uint64_t weight_bit_writes = 0;     // array write traffic from weight loads

    BankCounters& operator+=(const BankCounters& o);
    bool operator==(const BankCounters&) const = default;
};

// The four partial sums of one score element's bit-serial decomposition:
// sign x sign, sign x magnitude, magnitude x sign, magnitude x magnitude.
// The three shifted groups are accumulated pre-shifted (shift applied when a
// plane pair's sum is folded in); sign_sign holds the single raw sign-pair
// sum, weighted by 2^(2K-2) at combination time.
struct GroupAccumulators {
    int64_t sign_sign = 0;
    int64_t sign_mag = 0;
    int64_t mag_sign = 0;
    int64_t mag_mag = 0;

    GroupAccumulators& operator+=(const GroupAccumulators& o);
    bool operator==(const GroupAccumulators&) const = default;
};

// Functional model of one weight-stationary bank.
//
// One array cycle processes one (i*, j*) bit-plane pair across the whole
// loaded tile: result = sum over rows i' and columns j' of
// a[i'] * b[j'] * w[i'][j'].
//
// Counter model, per executed pair (R rows, C columns, pa/pb = plane
// popcounts):
//   cycles               += 1
//   wordline_activations += pa when pb > 0 (a row only fires when its input
//                           bit is set; nothing fires when no column is
//                           selected)
//   bitline_reads        += pa * C, or pa * pb under ElementSkip (zero
//                           column bits mask their reads)
//   adder_ops            += number of gated terms with non-zero weight
// Under PlaneSkip and ElementSkip a pair with an all-zero plane is bypassed:
// skipped_cycles += 1 and nothing else moves. Under None it burns a cycle.
class BankState {
public:
    explicit BankState(const MacroConfig& cfg);

    // Stores a tile; write traffic is rows*cols*weight_bits regardless of
    // weight mode (the array stores weight_bits-wide words). Loading again
    // replaces the tile and keeps accumulating counters.
    void load_weights(const WeightTile& t);

    bool loaded() const { return loaded_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    // One bit-plane pair against the loaded tile. a gates rows, b gates
    // columns.
    int64_t bit_plane_mac(const BitPlane& a, const BitPlane& b);

    // All K x K plane pairs of one (xi, xj) block, routed into the four
    // groups with the shift exponents of the decomposition: sign x sign is
    // raw, sign(i) x mag(j) is shifted by K-1+j*, mag(i) x sign(j) by
    // K-1+i*, mag x mag by i*+j*. Vectors must match the tile and be in
    // range for `input_bits`.
    GroupAccumulators process_pair(std::span<const int32_t> xi, std::span<const int32_t> xj,
                                   int input_bits);

    const BankCounters& counters() const { return counters_; }
    void reset_counters() { counters_ = BankCounters{}; }

private:
    struct PlaneMask {
        std::vector<uint64_t> words;
        int pop = 0;
    };

    static PlaneMask make_mask(std::span<const int32_t> v, int k);
    // Per-row sums of the b-selected weights; reused across all i* planes of
    // one j* plane.
    std::vector<int64_t> row_dots(const PlaneMask& b) const;
    int64_t mac_pair(const PlaneMask& a, const PlaneMask& b, const std::vector<int64_t>& rd);

    MacroConfig cfg_;
    int rows_ = 0;
    int cols_ = 0;
    bool loaded_ = false;
    std::vector<int64_t> w_;          // row-major tile
    std::vector<uint64_t> w_nonzero_; // per-row bitmask of non-zero weights
    size_t words_per_row_ = 0;
    BankCounters counters_;
};

}  // namespace cimsim
