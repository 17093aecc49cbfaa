#include "cimsim/oracle.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace cimsim {

ScoreMatrix oracle_scores(const FixedPointMatrix& x, const FixedPointMatrix& w_q,
                          const FixedPointMatrix& w_k) {
    if (w_q.rows != w_q.cols || w_k.rows != w_k.cols || w_q.rows != w_k.rows) {
        throw std::invalid_argument("oracle_scores: weight shapes must match and be square");
    }
    if (x.cols != w_q.rows) {
        throw std::invalid_argument("oracle_scores: X has " + std::to_string(x.cols) +
                                    " columns, weights are " + std::to_string(w_q.rows) + "x" +
                                    std::to_string(w_q.cols));
    }
    const int n = x.rows;
    const int d = x.cols;

    auto project = [&](const FixedPointMatrix& w) {
        std::vector<int64_t> out(static_cast<size_t>(n) * d, 0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                int64_t acc = 0;
                for (int m = 0; m < d; ++m) {
                    acc += int64_t(x.at(i, m)) * int64_t(w.at(m, j));
                }
                out[static_cast<size_t>(i) * d + j] = acc;
            }
        }
        return out;
    };

    const std::vector<int64_t> q = project(w_q);
    const std::vector<int64_t> k = project(w_k);

    ScoreMatrix s = ScoreMatrix::zeros(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            __int128 acc = 0;
            for (int m = 0; m < d; ++m) {
                acc += static_cast<__int128>(q[static_cast<size_t>(i) * d + m]) *
                       static_cast<__int128>(k[static_cast<size_t>(j) * d + m]);
            }
            if (acc > std::numeric_limits<int64_t>::max() ||
                acc < std::numeric_limits<int64_t>::min()) {
                throw std::overflow_error("oracle_scores: score exceeds 64-bit range");
            }
            s.at(i, j) = static_cast<int64_t>(acc);
        }
    }
    return s;
}

namespace {

const char* kBaselineModel =
    "baseline: W_Q and W_K each occupy a dxdxW array (2*d^2*W bits written once); "
    "X streams into both projection arrays (2*N*d*K bits read); Q and K stream out "
    "(2*N*d*K bits written); K^T is re-written into an array for the score stage "
    "(N*d*W bits, dynamic); Q streams back in as activations (N*d*K bits read); "
    "S streams out (N^2*32 bits).";

const char* kProposedModel =
    "proposed: the fused QK product occupies one dxdxW array (d^2*W bits written once); "
    "X is read once into the input buffer (N*d*K bits); no dynamic array writes; "
    "S streams out (N^2*32 bits).";

void check_dims(int n_tokens, int d, int input_bits, int weight_bits) {
    if (n_tokens < 0 || d < 1 || input_bits < 1 || weight_bits < 1) {
        throw std::invalid_argument("trace: dimensions must be positive (N may be zero)");
    }
}

}  // namespace

AccessTrace baseline_trace(int n_tokens, int d, int input_bits, int weight_bits) {
    check_dims(n_tokens, d, input_bits, weight_bits);
    const uint64_t n = static_cast<uint64_t>(n_tokens);
    const uint64_t dd = static_cast<uint64_t>(d);
    const uint64_t k = static_cast<uint64_t>(input_bits);
    const uint64_t w = static_cast<uint64_t>(weight_bits);
    AccessTrace t;
    t.weight_write_bits = 2 * dd * dd * w;
    t.input_read_bits = 2 * n * dd * k + n * dd * k;
    t.dynamic_write_bits = n * dd * w;
    t.output_write_bits = 2 * n * dd * k + n * n * 32;
    t.weight_word_bits = weight_bits;
    t.input_word_bits = input_bits;
    t.output_word_bits = 32;
    t.description = kBaselineModel;
    return t;
}

AccessTrace proposed_trace(int n_tokens, int d, int input_bits, int weight_bits) {
    check_dims(n_tokens, d, input_bits, weight_bits);
    const uint64_t n = static_cast<uint64_t>(n_tokens);
    const uint64_t dd = static_cast<uint64_t>(d);
    const uint64_t k = static_cast<uint64_t>(input_bits);
    const uint64_t w = static_cast<uint64_t>(weight_bits);
    AccessTrace t;
    t.weight_write_bits = dd * dd * w;
    t.input_read_bits = n * dd * k;
    t.dynamic_write_bits = 0;
    t.output_write_bits = n * n * 32;
    t.weight_word_bits = weight_bits;
    t.input_word_bits = input_bits;
    t.output_word_bits = 32;
    t.description = kProposedModel;
    return t;
}

}  // namespace cimsim
