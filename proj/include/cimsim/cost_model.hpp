#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cimsim/cim_bank.hpp"
#include "cimsim/config.hpp"
#include "cimsim/oracle.hpp"

namespace cimsim {

// Published figures of the reference macro, used as comparison points in
// reports and as constants for the scaling formulas. They are never pass/fail
// thresholds except where an arithmetic identity makes them one.
inline constexpr double kReferenceThroughputOpsPerS = 42.27e9;   // peak
inline constexpr double kReferenceEfficiencyOpsPerJ = 34.09e12;  // TOPS/W * 1e12
inline constexpr double kReferencePowerW = 1.24e-3;              // 65 nm, 1.0 V, 100 MHz
inline constexpr double kReferenceAreaMm2 = 0.35;                // 65 nm
inline constexpr double kReferenceScaledPowerW = 0.26e-3;        // published 28 nm figure
inline constexpr double kReferenceScaledAreaMm2 = 0.064;         // published 28 nm figure
inline constexpr double kReferenceMemoryAccessReduction = 6.9;   // vs baseline CIM
inline constexpr double kReferenceEnergyReduction = 4.9;         // vs baseline CIM

// Aggregated event counts of one full attention-score run.
struct RunCounters {
    BankCounters bank;
    uint64_t nm_shift_adds = 0;    // one shifted group accumulation per executed pair
    uint64_t buffer_accesses = 0;  // two plane fetches per executed pair
    uint64_t input_bits_read = 0;  // X into the input buffer, once
    uint64_t elements = 0;         // score elements computed

    RunCounters& operator+=(const RunCounters& o);
    bool operator==(const RunCounters&) const = default;
};

// Priced summary. Operation counting: each gated weight accumulation is one
// multiply plus one add (2 ops), each near-memory shift-add is one op.
struct CostReport {
    RunCounters counters;
    uint64_t total_ops = 0;
    double latency_s = 0.0;
    double energy_j = 0.0;
    double power_w = 0.0;
    double throughput_ops_per_s = 0.0;
    double efficiency_ops_per_j = 0.0;
    double ops_per_cycle = 0.0;
    double skip_fraction = 0.0;            // skipped / (executed + skipped)
    AccessTrace proposed;
    AccessTrace baseline;
    double access_ratio_total = 0.0;           // baseline total bits / proposed total bits
    double access_ratio_per_inference = 0.0;   // excludes the one-time weight load
    MacroConfig config;
    int n_tokens = 0;
    int d = 0;
    int data_bits = 0;
};

CostReport price(const RunCounters& counters, const EnergyCoefficients& coeff,
                 const MacroConfig& cfg, int n_tokens, int d, int data_bits);

nlohmann::ordered_json report_to_json(const CostReport& r);

// Process-node scaling: power scales with length ratio, voltage ratio squared
// and frequency ratio; area with length ratio squared.
struct NodeScalingParams {
    double l_from_nm = 65.0;
    double l_to_nm = 28.0;
    double v_from = 1.0;
    double v_to = 1.0;
    double f_from_hz = 100e6;
    double f_to_hz = 100e6;
};

double scale_power(double watts, const NodeScalingParams& p);
double scale_area(double mm2, const NodeScalingParams& p);

// Analytic workload model. `bit_sparsity` is the probability that any single
// input bit is zero; bits are treated as independent and weights as fully
// non-zero, which makes the estimate exact at sparsity 0 and an expectation
// otherwise.
struct WorkloadEntry {
    std::string name;
    int n_tokens = 1;
    int d = 1;
    int heads = 1;
    int layers = 1;
    double bit_sparsity = 0.0;
};

struct WorkloadEstimate {
    WorkloadEntry entry;
    double total_ops = 0.0;
    double cycles = 0.0;
    double skipped_cycles = 0.0;
    double energy_j = 0.0;
    double latency_s = 0.0;
};

std::vector<WorkloadEstimate> estimate_workload_energy(std::span<const WorkloadEntry> workload,
                                                       const EnergyCoefficients& coeff,
                                                       const MacroConfig& cfg);

// Bit-statistics walk over a concrete input: reproduces the engine's counters
// exactly by applying the same counting rules to the plane popcounts, without
// running any MAC arithmetic. Serves as the independent route for validating
// the analytic model against live runs.
RunCounters exact_workload_counters(const FixedPointMatrix& x, const FusedWeights& w,
                                    const MacroConfig& cfg);

}  // namespace cimsim
