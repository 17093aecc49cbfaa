#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cimsim/cim_bank.hpp"
#include "cimsim/config.hpp"
#include "cimsim/cost_model.hpp"
#include "cimsim/fixedpoint.hpp"
#include "cimsim/fusion.hpp"

namespace cimsim {

// Signed combination of the four groups:
//   2^(2K-2) * sign_sign - sign_mag - mag_sign + mag_mag
// (the shifted groups carry their shifts already). Equals the exact integer
// product xi * W * xj^T for accumulators produced with the same K.
int64_t combine_groups(const GroupAccumulators& acc, int input_bits);

// Rejects (d, K, max|w|) combinations whose worst-case partial sums could
// leave the signed 64-bit accumulator range. Bound: each group magnitude is
// at most d^2 * max|w| * 2^(2K-2); a factor 4 of headroom covers their sum.
void check_accumulator_bound(int d, int input_bits, int64_t max_abs_weight);

// Drives one or more banks over a tiled fused weight matrix. Weights are
// written once at construction; every score element is then served from the
// stationary tiles.
class ScoreEngine {
public:
    ScoreEngine(const FusedWeights& w, const MacroConfig& cfg);

    // xi * W_QK * xj^T, exact. Block partial groups are summed and combined
    // once. Counters accumulate across calls.
    int64_t score_element(std::span<const int32_t> xi, std::span<const int32_t> xj,
                          int input_bits);

    BankCounters counters() const;  // sum over banks, including the load
    void reset_counters();
    int d() const { return d_; }

private:
    struct Placement {
        int row0, col0, rows, cols;
    };
    MacroConfig cfg_;
    int d_ = 0;
    std::vector<Placement> placements_;
    std::vector<BankState> banks_;
};

struct ScoreRun {
    ScoreMatrix scores;
    CostReport report;
};

// Computes the full N x N score matrix and the priced cost report.
// Deterministic for fixed inputs and config: work may be split across
// CIMSIM_THREADS workers, each with its own banks over the same stationary
// tiles; counter aggregation is plain summation, so totals and scores are
// byte-identical at every parallelism level. The one-time weight-load
// traffic is counted once, not per worker.
ScoreRun attention_scores(const FixedPointMatrix& x, const FusedWeights& w,
                          const MacroConfig& cfg);

}  // namespace cimsim
