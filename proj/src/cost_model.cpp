#include "cimsim/cost_model.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cimsim {

RunCounters& RunCounters::operator+=(const RunCounters& o) {
    bank += o.bank;
    nm_shift_adds += o.nm_shift_adds;
    buffer_accesses += o.buffer_accesses;
    input_bits_read += o.input_bits_read;
    elements += o.elements;
    return *this;
}

CostReport price(const RunCounters& counters, const EnergyCoefficients& coeff,
                 const MacroConfig& cfg, int n_tokens, int d, int data_bits) {
    CostReport r;
    r.counters = counters;
    r.config = cfg;
    r.n_tokens = n_tokens;
    r.d = d;
    r.data_bits = data_bits;

    r.total_ops = 2 * counters.bank.adder_ops + counters.nm_shift_adds;
    r.latency_s = cfg.clock_hz > 0 ? double(counters.bank.cycles) / cfg.clock_hz : 0.0;
    r.energy_j = double(r.total_ops) * coeff.e_op +
                 double(counters.bank.wordline_activations) * coeff.e_wordline +
                 double(counters.bank.bitline_reads) * coeff.e_bitline_read +
                 double(counters.bank.adder_ops) * coeff.e_adder +
                 double(counters.buffer_accesses) * coeff.e_buffer_access;
    r.power_w = r.latency_s > 0 ? r.energy_j / r.latency_s : 0.0;
    r.throughput_ops_per_s = r.latency_s > 0 ? double(r.total_ops) / r.latency_s : 0.0;
    r.efficiency_ops_per_j = r.energy_j > 0 ? double(r.total_ops) / r.energy_j : 0.0;
    r.ops_per_cycle =
        counters.bank.cycles > 0 ? double(r.total_ops) / double(counters.bank.cycles) : 0.0;
    const uint64_t pairs = counters.bank.cycles + counters.bank.skipped_cycles;
    r.skip_fraction = pairs > 0 ? double(counters.bank.skipped_cycles) / double(pairs) : 0.0;

    r.proposed = proposed_trace(n_tokens, d, data_bits, cfg.weight_bits);
    // Live counters are authoritative where they exist; the analytic fields
    // only fill in what the engine does not meter.
    r.proposed.weight_write_bits = counters.bank.weight_bit_writes;
    r.proposed.input_read_bits = counters.input_bits_read;
    r.baseline = baseline_trace(n_tokens, d, data_bits, cfg.weight_bits);

    const double prop_total = double(r.proposed.total_bits());
    const double prop_dyn = double(r.proposed.per_inference_bits());
    r.access_ratio_total = prop_total > 0 ? double(r.baseline.total_bits()) / prop_total : 0.0;
    r.access_ratio_per_inference =
        prop_dyn > 0 ? double(r.baseline.per_inference_bits()) / prop_dyn : 0.0;
    return r;
}

namespace {

nlohmann::ordered_json trace_json(const AccessTrace& t) {
    nlohmann::ordered_json j;
    j["weight_write"] = {{"bits", t.weight_write_bits},
                         {"words", t.weight_write_bits / t.weight_word_bits}};
    j["input_read"] = {{"bits", t.input_read_bits},
                       {"words", t.input_read_bits / t.input_word_bits}};
    j["dynamic_write"] = {{"bits", t.dynamic_write_bits},
                          {"words", t.dynamic_write_bits / t.weight_word_bits}};
    j["output_write"] = {{"bits", t.output_write_bits},
                         {"words", t.output_write_bits / t.output_word_bits}};
    j["total_bits"] = t.total_bits();
    j["per_inference_bits"] = t.per_inference_bits();
    j["counting_model"] = t.description;
    return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const CostReport& r) {
    nlohmann::ordered_json j;
    j["schema"] = "cimsim-report-v1";
    j["config"] = {{"array_rows", r.config.array_rows},
                   {"array_cols", r.config.array_cols},
                   {"weight_bits", r.config.weight_bits},
                   {"input_bits", r.config.input_bits},
                   {"clock_hz", r.config.clock_hz},
                   {"skip_mode", to_string(r.config.skip_mode)},
                   {"energy",
                    {{"e_op", r.config.energy.e_op},
                     {"e_wordline", r.config.energy.e_wordline},
                     {"e_bitline_read", r.config.energy.e_bitline_read},
                     {"e_adder", r.config.energy.e_adder},
                     {"e_buffer_access", r.config.energy.e_buffer_access}}}};
    j["workload"] = {{"n_tokens", r.n_tokens}, {"d", r.d}, {"data_bits", r.data_bits}};
    j["counters"] = {{"cycles", r.counters.bank.cycles},
                     {"skipped_cycles", r.counters.bank.skipped_cycles},
                     {"plane_pairs", r.counters.bank.cycles + r.counters.bank.skipped_cycles},
                     {"wordline_activations", r.counters.bank.wordline_activations},
                     {"bitline_reads", r.counters.bank.bitline_reads},
                     {"adder_ops", r.counters.bank.adder_ops},
                     {"nm_shift_adds", r.counters.nm_shift_adds},
                     {"weight_bits_written", r.counters.bank.weight_bit_writes},
                     {"input_bits_read", r.counters.input_bits_read},
                     {"buffer_accesses", r.counters.buffer_accesses},
                     {"elements", r.counters.elements}};
    j["skip"] = {{"skip_fraction", r.skip_fraction},
                 {"cycle_reduction_vs_no_skip", r.skip_fraction}};
    j["cost"] = {{"total_ops", r.total_ops},
                 {"latency_s", r.latency_s},
                 {"energy_j", r.energy_j},
                 {"power_w", r.power_w},
                 {"throughput_ops_per_s", r.throughput_ops_per_s},
                 {"efficiency_ops_per_j", r.efficiency_ops_per_j},
                 {"ops_per_cycle", r.ops_per_cycle}};
    j["access_trace"] = {
        {"proposed", trace_json(r.proposed)},
        {"baseline", trace_json(r.baseline)},
        {"ratios",
         {{"total_bits", r.access_ratio_total},
          {"per_inference_bits", r.access_ratio_per_inference}}},
        {"reference",
         {{"memory_access_reduction_x", kReferenceMemoryAccessReduction},
          {"energy_reduction_x", kReferenceEnergyReduction},
          {"note", "reference reductions were published without their counting rules; "
                   "the ratios above follow the counting model printed in each trace"}}}};
    return j;
}

double scale_power(double watts, const NodeScalingParams& p) {
    if (p.l_from_nm <= 0 || p.l_to_nm <= 0 || p.v_from <= 0 || p.v_to <= 0 || p.f_from_hz <= 0 ||
        p.f_to_hz <= 0) {
        throw std::invalid_argument("scale_power: parameters must be positive");
    }
    return watts * (p.l_to_nm / p.l_from_nm) * (p.v_to / p.v_from) * (p.v_to / p.v_from) *
           (p.f_to_hz / p.f_from_hz);
}

double scale_area(double mm2, const NodeScalingParams& p) {
    if (p.l_from_nm <= 0 || p.l_to_nm <= 0) {
        throw std::invalid_argument("scale_area: parameters must be positive");
    }
    return mm2 * (p.l_to_nm / p.l_from_nm) * (p.l_to_nm / p.l_from_nm);
}

namespace {

struct BlockSplit {
    std::vector<int> sizes;
};

BlockSplit split_dim(int d, int block) {
    BlockSplit s;
    for (int off = 0; off < d; off += block) {
        s.sizes.push_back(std::min(block, d - off));
    }
    return s;
}

}  // namespace

std::vector<WorkloadEstimate> estimate_workload_energy(std::span<const WorkloadEntry> workload,
                                                       const EnergyCoefficients& coeff,
                                                       const MacroConfig& cfg) {
    cfg.validate();
    std::vector<WorkloadEstimate> out;
    out.reserve(workload.size());
    for (const WorkloadEntry& e : workload) {
        if (e.n_tokens < 1 || e.d < 1 || e.heads < 1 || e.layers < 1) {
            throw std::invalid_argument("workload entry '" + e.name + "': dimensions must be positive");
        }
        if (!(e.bit_sparsity >= 0.0 && e.bit_sparsity <= 1.0)) {
            throw std::invalid_argument("workload entry '" + e.name + "': sparsity must be in [0,1]");
        }
        const double q = 1.0 - e.bit_sparsity;  // probability a bit is set
        const double kbits = cfg.input_bits;
        const double pairs_per_block = kbits * kbits;
        const BlockSplit rows = split_dim(e.d, cfg.array_rows);
        const BlockSplit cols = split_dim(e.d, cfg.array_cols);

        double cycles = 0, skipped = 0, wl = 0, reads = 0, adders = 0;
        for (int rb : rows.sizes) {
            for (int cb : cols.sizes) {
                const double p_nz_a = 1.0 - std::pow(1.0 - q, rb);
                const double p_nz_b = 1.0 - std::pow(1.0 - q, cb);
                double executed;
                if (cfg.skip_mode == SkipMode::None) {
                    executed = pairs_per_block;
                } else {
                    executed = pairs_per_block * p_nz_a * p_nz_b;
                    skipped += pairs_per_block - executed;
                }
                cycles += executed;
                // E[popcount(a) * 1{b nonzero}] = R*q * P(b nonzero)
                wl += pairs_per_block * (rb * q) * p_nz_b;
                if (cfg.skip_mode == SkipMode::ElementSkip) {
                    reads += pairs_per_block * (rb * q) * (cb * q);
                } else {
                    reads += pairs_per_block * (rb * q) * p_nz_b * cb;
                }
                // dense non-zero weights assumed
                adders += pairs_per_block * rb * cb * q * q;
            }
        }
        const double reps = double(e.n_tokens) * double(e.n_tokens) * e.heads * e.layers;
        cycles *= reps;
        skipped *= reps;
        wl *= reps;
        reads *= reps;
        adders *= reps;

        WorkloadEstimate est;
        est.entry = e;
        est.cycles = cycles;
        est.skipped_cycles = skipped;
        est.total_ops = 2.0 * adders + cycles;  // shift-adds == executed pairs
        est.energy_j = est.total_ops * coeff.e_op + wl * coeff.e_wordline +
                       reads * coeff.e_bitline_read + adders * coeff.e_adder +
                       2.0 * cycles * coeff.e_buffer_access;
        est.latency_s = cycles / cfg.clock_hz;
        out.push_back(std::move(est));
    }
    return out;
}

RunCounters exact_workload_counters(const FixedPointMatrix& x, const FusedWeights& w,
                                    const MacroConfig& cfg) {
    cfg.validate();
    if (x.cols != w.d) {
        throw std::invalid_argument("exact_workload_counters: X columns must equal weight dimension");
    }
    const int n = x.rows;
    const int d = x.cols;
    const int kbits = x.bits;
    const BlockSplit rows = split_dim(d, cfg.array_rows);
    const BlockSplit cols = split_dim(d, cfg.array_cols);

    // Plane popcounts and masks per (token, block range, bit).
    struct Slice {
        std::vector<uint64_t> mask;  // per plane, single word (block <= 64) padded otherwise
        int pop = 0;
    };
    auto slice_planes = [&](int token, int off, int len) {
        std::vector<Slice> planes(kbits);
        for (int k = 0; k < kbits; ++k) {
            Slice s;
            s.mask.assign((len + 63) / 64, 0);
            for (int i = 0; i < len; ++i) {
                if ((static_cast<uint32_t>(x.at(token, off + i)) >> k) & 1u) {
                    s.mask[i / 64] |= uint64_t(1) << (i % 64);
                    ++s.pop;
                }
            }
            planes[k] = std::move(s);
        }
        return planes;
    };

    RunCounters rc;
    int row_off = 0;
    for (int bi = 0; bi < static_cast<int>(rows.sizes.size()); ++bi) {
        const int rb = rows.sizes[bi];
        int col_off = 0;
        for (int bj = 0; bj < static_cast<int>(cols.sizes.size()); ++bj) {
            const int cb = cols.sizes[bj];
            // Non-zero weight masks for this block.
            const size_t bwords = (cb + 63) / 64;
            std::vector<uint64_t> wnz(static_cast<size_t>(rb) * bwords, 0);
            for (int r = 0; r < rb; ++r) {
                for (int c = 0; c < cb; ++c) {
                    if (w.at(row_off + r, col_off + c) != 0) {
                        wnz[r * bwords + c / 64] |= uint64_t(1) << (c % 64);
                    }
                }
            }

            std::vector<std::vector<Slice>> a_planes(n), b_planes(n);
            for (int t = 0; t < n; ++t) {
                a_planes[t] = slice_planes(t, row_off, rb);
                b_planes[t] = slice_planes(t, col_off, cb);
            }
            // Per-row gated non-zero counts for each (token, plane) on the b
            // side, reused across every i-token and i* plane.
            std::vector<std::vector<std::vector<uint32_t>>> gated(n);
            for (int t = 0; t < n; ++t) {
                gated[t].resize(kbits);
                for (int k = 0; k < kbits; ++k) {
                    auto& g = gated[t][k];
                    g.assign(rb, 0);
                    if (b_planes[t][k].pop == 0) continue;
                    for (int r = 0; r < rb; ++r) {
                        uint32_t cnt = 0;
                        for (size_t bw = 0; bw < bwords; ++bw) {
                            cnt += static_cast<uint32_t>(
                                std::popcount(wnz[r * bwords + bw] & b_planes[t][k].mask[bw]));
                        }
                        g[r] = cnt;
                    }
                }
            }

            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    for (int j_star = 0; j_star < kbits; ++j_star) {
                        const Slice& b = b_planes[j][j_star];
                        for (int i_star = 0; i_star < kbits; ++i_star) {
                            const Slice& a = a_planes[i][i_star];
                            const bool zero_plane = (a.pop == 0 || b.pop == 0);
                            if (zero_plane && cfg.skip_mode != SkipMode::None) {
                                rc.bank.skipped_cycles += 1;
                                continue;
                            }
                            rc.bank.cycles += 1;
                            rc.nm_shift_adds += 1;
                            rc.buffer_accesses += 2;
                            if (b.pop > 0) {
                                rc.bank.wordline_activations += a.pop;
                                const uint64_t cols_read = cfg.skip_mode == SkipMode::ElementSkip
                                                               ? uint64_t(b.pop)
                                                               : uint64_t(cb);
                                rc.bank.bitline_reads += uint64_t(a.pop) * cols_read;
                            }
                            const auto& g = gated[j][j_star];
                            for (size_t word = 0; word < a.mask.size(); ++word) {
                                uint64_t bits = a.mask[word];
                                while (bits) {
                                    const int r = static_cast<int>(word * 64) + std::countr_zero(bits);
                                    bits &= bits - 1;
                                    rc.bank.adder_ops += g[r];
                                }
                            }
                        }
                    }
                }
            }
            col_off += cb;
        }
        row_off += rb;
    }
    rc.bank.weight_bit_writes = uint64_t(d) * uint64_t(d) * uint64_t(cfg.weight_bits);
    rc.input_bits_read = uint64_t(n) * uint64_t(d) * uint64_t(kbits);
    rc.elements = uint64_t(n) * uint64_t(n);
    return rc;
}

}  // namespace cimsim
