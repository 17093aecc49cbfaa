#pragma once

#include <cstdint>
#include <string>

#include "cimsim/fixedpoint.hpp"

namespace cimsim {

// Ground-truth reference path: Q = X*W_Q, K = X*W_K, S = Q*K^T with naive
// triple loops in wide integers. Deliberately shares no code with the
// bit-serial engine it checks.
ScoreMatrix oracle_scores(const FixedPointMatrix& x, const FixedPointMatrix& w_q,
                          const FixedPointMatrix& w_k);

// Array-access tally for one inference, in bits, plus the word widths needed
// to express the same counts in words. The same record describes both the
// baseline (two arrays holding W_Q and W_K, with K^T re-written per
// inference) and the fused weight-stationary scheme (dynamic_write_bits is
// zero there by construction).
struct AccessTrace {
    uint64_t weight_write_bits = 0;   // one-time array weight load
    uint64_t input_read_bits = 0;     // per inference
    uint64_t dynamic_write_bits = 0;  // per-inference array weight-port writes
    uint64_t output_write_bits = 0;   // per inference
    int weight_word_bits = 8;
    int input_word_bits = 8;
    int output_word_bits = 32;
    std::string description;

    uint64_t total_bits() const {
        return weight_write_bits + input_read_bits + dynamic_write_bits + output_write_bits;
    }
    uint64_t per_inference_bits() const {
        return input_read_bits + dynamic_write_bits + output_write_bits;
    }
};

// Counting model (printed in every report through `description`):
//   baseline: W_Q and W_K each occupy a d x d x W array (2*d^2*W bits written
//   once); X streams into both projection arrays (2*N*d*K bits read); Q and K
//   stream out (2*N*d*K bits written); K^T is re-written into an array for
//   the score stage (N*d*W bits, dynamic); Q streams back in as activations
//   (N*d*K bits read); S streams out (N^2*32 bits).
//   proposed: the fused product occupies one d x d x W array (d^2*W bits
//   written once); X is read once into the input buffer (N*d*K bits); no
//   dynamic array writes; S streams out (N^2*32 bits).
AccessTrace baseline_trace(int n_tokens, int d, int input_bits, int weight_bits);
AccessTrace proposed_trace(int n_tokens, int d, int input_bits, int weight_bits);

}  // namespace cimsim
