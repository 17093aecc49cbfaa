#include "cimsim/cim_bank.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace cimsim {

BankCounters& BankCounters::operator+=(const BankCounters& o) {
    cycles += o.cycles;
    skipped_cycles += o.skipped_cycles;
    wordline_activations += o.wordline_activations;
    bitline_reads += o.bitline_reads;
    adder_ops += o.adder_ops;
    weight_bit_writes += o.weight_bit_writes;
    return *this;
}

GroupAccumulators& GroupAccumulators::operator+=(const GroupAccumulators& o) {
    sign_sign += o.sign_sign;
    sign_mag += o.sign_mag;
    mag_sign += o.mag_sign;
    mag_mag += o.mag_mag;
    return *this;
}

BankState::BankState(const MacroConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

void BankState::load_weights(const WeightTile& t) {
    if (t.rows < 1 || t.cols < 1) {
        throw std::invalid_argument("load_weights: empty tile");
    }
    if (t.rows > cfg_.array_rows || t.cols > cfg_.array_cols) {
        throw std::invalid_argument("load_weights: tile " + std::to_string(t.rows) + "x" +
                                    std::to_string(t.cols) + " exceeds array " +
                                    std::to_string(cfg_.array_rows) + "x" +
                                    std::to_string(cfg_.array_cols));
    }
    rows_ = t.rows;
    cols_ = t.cols;
    w_ = t.values;
    words_per_row_ = static_cast<size_t>((cols_ + 63) / 64);
    w_nonzero_.assign(static_cast<size_t>(rows_) * words_per_row_, 0);
    for (int r = 0; r < rows_; ++r) {
        for (int c = 0; c < cols_; ++c) {
            if (t.at(r, c) != 0) {
                w_nonzero_[r * words_per_row_ + c / 64] |= uint64_t(1) << (c % 64);
            }
        }
    }
    loaded_ = true;
    counters_.weight_bit_writes +=
        uint64_t(t.rows) * uint64_t(t.cols) * uint64_t(cfg_.weight_bits);
}

BankState::PlaneMask BankState::make_mask(std::span<const int32_t> v, int k) {
    PlaneMask m;
    m.words.assign((v.size() + 63) / 64, 0);
    for (size_t i = 0; i < v.size(); ++i) {
        if ((static_cast<uint32_t>(v[i]) >> k) & 1u) {
            m.words[i / 64] |= uint64_t(1) << (i % 64);
            ++m.pop;
        }
    }
    return m;
}

std::vector<int64_t> BankState::row_dots(const PlaneMask& b) const {
    std::vector<int64_t> rd(rows_, 0);
    for (int r = 0; r < rows_; ++r) {
        const int64_t* wr = w_.data() + static_cast<size_t>(r) * cols_;
        int64_t acc = 0;
        for (size_t word = 0; word < b.words.size(); ++word) {
            uint64_t bits = b.words[word];
            while (bits) {
                const int j = std::countr_zero(bits);
                acc += wr[word * 64 + j];
                bits &= bits - 1;
            }
        }
        rd[r] = acc;
    }
    return rd;
}

int64_t BankState::mac_pair(const PlaneMask& a, const PlaneMask& b,
                            const std::vector<int64_t>& rd) {
    const bool zero_plane = (a.pop == 0 || b.pop == 0);
    if (zero_plane && cfg_.skip_mode != SkipMode::None) {
        counters_.skipped_cycles += 1;
        return 0;
    }
    counters_.cycles += 1;
    if (b.pop > 0) {
        counters_.wordline_activations += static_cast<uint64_t>(a.pop);
        const uint64_t cols_read = cfg_.skip_mode == SkipMode::ElementSkip
                                       ? static_cast<uint64_t>(b.pop)
                                       : static_cast<uint64_t>(cols_);
        counters_.bitline_reads += static_cast<uint64_t>(a.pop) * cols_read;
    }
    int64_t mac = 0;
    for (size_t word = 0; word < a.words.size(); ++word) {
        uint64_t bits = a.words[word];
        while (bits) {
            const int r = static_cast<int>(word * 64) + std::countr_zero(bits);
            bits &= bits - 1;
            mac += rd[r];
            uint64_t gated_nonzero = 0;
            const uint64_t* wnz = w_nonzero_.data() + static_cast<size_t>(r) * words_per_row_;
            for (size_t bw = 0; bw < words_per_row_; ++bw) {
                gated_nonzero += static_cast<uint64_t>(std::popcount(wnz[bw] & b.words[bw]));
            }
            counters_.adder_ops += gated_nonzero;
        }
    }
    return mac;
}

int64_t BankState::bit_plane_mac(const BitPlane& a, const BitPlane& b) {
    if (!loaded_) throw std::logic_error("bit_plane_mac: no weights loaded");
    if (a.bits.size() != static_cast<size_t>(rows_) ||
        b.bits.size() != static_cast<size_t>(cols_)) {
        throw std::invalid_argument("bit_plane_mac: plane lengths " +
                                    std::to_string(a.bits.size()) + "/" +
                                    std::to_string(b.bits.size()) + " do not match tile " +
                                    std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    PlaneMask ma, mb;
    ma.words.assign((a.bits.size() + 63) / 64, 0);
    for (size_t i = 0; i < a.bits.size(); ++i) {
        if (a.bits[i]) {
            ma.words[i / 64] |= uint64_t(1) << (i % 64);
            ++ma.pop;
        }
    }
    mb.words.assign((b.bits.size() + 63) / 64, 0);
    for (size_t i = 0; i < b.bits.size(); ++i) {
        if (b.bits[i]) {
            mb.words[i / 64] |= uint64_t(1) << (i % 64);
            ++mb.pop;
        }
    }
    const std::vector<int64_t> rd = mb.pop > 0 ? row_dots(mb) : std::vector<int64_t>(rows_, 0);
    return mac_pair(ma, mb, rd);
}

GroupAccumulators BankState::process_pair(std::span<const int32_t> xi,
                                          std::span<const int32_t> xj, int input_bits) {
    if (!loaded_) throw std::logic_error("process_pair: no weights loaded");
    if (xi.size() != static_cast<size_t>(rows_) || xj.size() != static_cast<size_t>(cols_)) {
        throw std::invalid_argument("process_pair: vector lengths do not match tile");
    }
    if (input_bits < 2 || input_bits > 16) {
        throw std::invalid_argument("process_pair: input bits must be in [2,16]");
    }
    const int32_t lo = fixed_min(input_bits);
    const int32_t hi = fixed_max(input_bits);
    for (int32_t v : xi) {
        if (v < lo || v > hi) throw std::invalid_argument("process_pair: xi value out of range");
    }
    for (int32_t v : xj) {
        if (v < lo || v > hi) throw std::invalid_argument("process_pair: xj value out of range");
    }

    const int kbits = input_bits;
    std::vector<PlaneMask> planes_a(kbits), planes_b(kbits);
    for (int k = 0; k < kbits; ++k) {
        planes_a[k] = make_mask(xi, k);
        planes_b[k] = make_mask(xj, k);
    }

    GroupAccumulators acc;
    std::vector<int64_t> rd(rows_, 0);
    for (int j_star = 0; j_star < kbits; ++j_star) {
        const PlaneMask& b = planes_b[j_star];
        bool rd_ready = false;  // row sums are shared by every i* plane of this j*
        for (int i_star = 0; i_star < kbits; ++i_star) {
            const PlaneMask& a = planes_a[i_star];
            const bool skippable =
                cfg_.skip_mode != SkipMode::None && (a.pop == 0 || b.pop == 0);
            if (!rd_ready && !skippable) {
                rd = b.pop > 0 ? row_dots(b) : std::vector<int64_t>(rows_, 0);
                rd_ready = true;
            }
            const int64_t mac = mac_pair(a, b, rd);
            if (mac == 0) continue;
            const bool a_sign = (i_star == kbits - 1);
            const bool b_sign = (j_star == kbits - 1);
            if (a_sign && b_sign) {
                acc.sign_sign += mac;
            } else if (a_sign) {
                acc.sign_mag += mac * (int64_t(1) << (kbits - 1 + j_star));
            } else if (b_sign) {
                acc.mag_sign += mac * (int64_t(1) << (kbits - 1 + i_star));
            } else {
                acc.mag_mag += mac * (int64_t(1) << (i_star + j_star));
            }
        }
    }
    return acc;
}

}  // namespace cimsim
