#pragma once

#include <string>

namespace cimsim {

// Zero-skip accounting granularity.
//
// None:        every bit-plane pair burns an array cycle.
// PlaneSkip:   a pair is bypassed when either whole plane is zero.
// ElementSkip: same bypass, and zero column bits additionally mask their
//              bitline reads (the per-row wordline gate is structural: a row
//              only fires when its input bit is set, in every mode).
enum class SkipMode { None, PlaneSkip, ElementSkip };

std::string to_string(SkipMode m);
SkipMode parse_skip_mode(const std::string& s);

// Per-event energy prices. The default folds everything into a single
// per-operation benchmark of 29.33 fJ, the reciprocal of the reference
// macro's 34.09 TOPS/W operating point; the fine-grained prices default to
// zero and can be overridden for sensitivity studies.
struct EnergyCoefficients {
    double e_op = 29.33e-15;       // J per arithmetic operation (add or multiply)
    double e_wordline = 0.0;       // J per wordline activation
    double e_bitline_read = 0.0;   // J per weight-bit read
    double e_adder = 0.0;          // J per accumulator add
    double e_buffer_access = 0.0;  // J per input-buffer access
};

// Array geometry and operating point. Defaults reproduce the reference
// macro: 64x64 array storing 8-bit weights, 8-bit inputs, 100 MHz clock.
struct MacroConfig {
    int array_rows = 64;
    int array_cols = 64;
    int weight_bits = 8;
    int input_bits = 8;
    double clock_hz = 100e6;
    SkipMode skip_mode = SkipMode::ElementSkip;
    EnergyCoefficients energy;

    void validate() const;
};

// Flat key = value file, '#' comments. Unknown keys are rejected.
MacroConfig load_config(const std::string& path);

// Worker count for score-element parallelism: the CIMSIM_THREADS environment
// variable caps it (0 or unset = hardware concurrency). Results are
// byte-identical at any level.
int resolve_thread_count();

}  // namespace cimsim
