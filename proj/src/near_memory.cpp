#include "cimsim/near_memory.hpp"

#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace cimsim {

int64_t combine_groups(const GroupAccumulators& acc, int input_bits) {
    if (input_bits < 2 || input_bits > 16) {
        throw std::invalid_argument("combine_groups: input bits must be in [2,16]");
    }
    const int64_t sign_weight = int64_t(1) << (2 * input_bits - 2);
    return acc.sign_sign * sign_weight - acc.sign_mag - acc.mag_sign + acc.mag_mag;
}

void check_accumulator_bound(int d, int input_bits, int64_t max_abs_weight) {
    if (d < 1) throw std::invalid_argument("dimension must be positive");
    const __int128 bound = static_cast<__int128>(d) * d * max_abs_weight *
                           (static_cast<__int128>(1) << (2 * input_bits - 2));
    if (bound > std::numeric_limits<int64_t>::max() / 4) {
        throw std::invalid_argument(
            "accumulator overflow risk: d=" + std::to_string(d) + ", K=" +
            std::to_string(input_bits) + ", max|w|=" + std::to_string(max_abs_weight) +
            " exceeds the signed 64-bit budget; reduce widths or requantize weights");
    }
}

ScoreEngine::ScoreEngine(const FusedWeights& w, const MacroConfig& cfg) : cfg_(cfg), d_(w.d) {
    cfg_.validate();
    if (w.d < 1) throw std::invalid_argument("ScoreEngine: empty weight matrix");
    for (int r0 = 0; r0 < d_; r0 += cfg_.array_rows) {
        const int rows = std::min(cfg_.array_rows, d_ - r0);
        for (int c0 = 0; c0 < d_; c0 += cfg_.array_cols) {
            const int cols = std::min(cfg_.array_cols, d_ - c0);
            placements_.push_back({r0, c0, rows, cols});
        }
    }
    banks_.reserve(placements_.size());
    for (const Placement& p : placements_) {
        BankState bank(cfg_);
        bank.load_weights(tile(w, p.row0, p.col0, p.rows, p.cols));
        banks_.push_back(std::move(bank));
    }
}

int64_t ScoreEngine::score_element(std::span<const int32_t> xi, std::span<const int32_t> xj,
                                   int input_bits) {
    if (xi.size() != static_cast<size_t>(d_) || xj.size() != static_cast<size_t>(d_)) {
        throw std::invalid_argument("score_element: vector length " + std::to_string(xi.size()) +
                                    "/" + std::to_string(xj.size()) + " does not match d=" +
                                    std::to_string(d_));
    }
    GroupAccumulators acc;
    for (size_t b = 0; b < placements_.size(); ++b) {
        const Placement& p = placements_[b];
        acc += banks_[b].process_pair(xi.subspan(p.row0, p.rows), xj.subspan(p.col0, p.cols),
                                      input_bits);
    }
    return combine_groups(acc, input_bits);
}

BankCounters ScoreEngine::counters() const {
    BankCounters total;
    for (const BankState& b : banks_) total += b.counters();
    return total;
}

void ScoreEngine::reset_counters() {
    for (BankState& b : banks_) b.reset_counters();
}

ScoreRun attention_scores(const FixedPointMatrix& x, const FusedWeights& w,
                          const MacroConfig& cfg) {
    cfg.validate();
    if (x.rows < 1) throw std::invalid_argument("attention_scores: token matrix must have rows");
    if (x.cols != w.d) {
        throw std::invalid_argument("attention_scores: X has " + std::to_string(x.cols) +
                                    " columns but weights are " + std::to_string(w.d) + "x" +
                                    std::to_string(w.d));
    }
    if (x.bits > cfg.input_bits) {
        throw std::invalid_argument("attention_scores: data width " + std::to_string(x.bits) +
                                    " exceeds macro input width " + std::to_string(cfg.input_bits));
    }
    check_accumulator_bound(w.d, x.bits, w.max_abs());

    const int n = x.rows;
    const uint64_t total_elements = uint64_t(n) * uint64_t(n);
    int workers = resolve_thread_count();
    if (uint64_t(workers) > total_elements) workers = static_cast<int>(total_elements);
    if (workers < 1) workers = 1;

    ScoreMatrix scores = ScoreMatrix::zeros(n);
    std::vector<BankCounters> worker_counters(workers);

    auto run_range = [&](int worker, uint64_t begin, uint64_t end) {
        ScoreEngine engine(w, cfg);
        engine.reset_counters();  // the one-time load is accounted below, once
        for (uint64_t e = begin; e < end; ++e) {
            const int i = static_cast<int>(e / n);
            const int j = static_cast<int>(e % n);
            scores.at(i, j) = engine.score_element(x.row(i), x.row(j), x.bits);
        }
        worker_counters[worker] = engine.counters();
    };

    if (workers == 1) {
        run_range(0, 0, total_elements);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        const uint64_t chunk = (total_elements + workers - 1) / workers;
        for (int t = 0; t < workers; ++t) {
            const uint64_t begin = uint64_t(t) * chunk;
            const uint64_t end = std::min(total_elements, begin + chunk);
            threads.emplace_back(run_range, t, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    RunCounters rc;
    for (const BankCounters& c : worker_counters) rc.bank += c;
    // Weight-stationary: the tiles are written exactly once regardless of how
    // many workers hold copies.
    rc.bank.weight_bit_writes = uint64_t(w.d) * uint64_t(w.d) * uint64_t(cfg.weight_bits);
    rc.nm_shift_adds = rc.bank.cycles;    // one shifted group accumulation per executed pair
    rc.buffer_accesses = 2 * rc.bank.cycles;  // a- and b-plane fetch per executed pair
    rc.input_bits_read = uint64_t(n) * uint64_t(x.cols) * uint64_t(x.bits);
    rc.elements = total_elements;

    ScoreRun run;
    run.scores = std::move(scores);
    run.report = price(rc, cfg.energy, cfg, n, w.d, x.bits);
    return run;
}

}  // namespace cimsim
