#include "cimsim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "cimsim/errors.hpp"

namespace cimsim {

std::string to_string(SkipMode m) {
    switch (m) {
        case SkipMode::None: return "none";
        case SkipMode::PlaneSkip: return "plane";
        case SkipMode::ElementSkip: return "element";
    }
    return "?";
}

SkipMode parse_skip_mode(const std::string& s) {
    if (s == "none") return SkipMode::None;
    if (s == "plane") return SkipMode::PlaneSkip;
    if (s == "element") return SkipMode::ElementSkip;
    throw UsageError("unknown skip mode '" + s + "' (expected none|plane|element)");
}

void MacroConfig::validate() const {
    if (array_rows < 1 || array_cols < 1) {
        throw std::invalid_argument("array dimensions must be positive");
    }
    if (weight_bits < 2 || weight_bits > 16) {
        throw std::invalid_argument("weight bits must be in [2,16]");
    }
    if (input_bits < 2 || input_bits > 16) {
        throw std::invalid_argument("input bits must be in [2,16]");
    }
    if (!(clock_hz > 0.0)) {
        throw std::invalid_argument("clock frequency must be positive");
    }
    if (energy.e_op < 0 || energy.e_wordline < 0 || energy.e_bitline_read < 0 ||
        energy.e_adder < 0 || energy.e_buffer_access < 0) {
        throw std::invalid_argument("energy coefficients must be non-negative");
    }
}

MacroConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config " + path);
    MacroConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
            return s;
        };
        if (trim(line).empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "array_rows") cfg.array_rows = std::stoi(val);
            else if (key == "array_cols") cfg.array_cols = std::stoi(val);
            else if (key == "weight_bits") cfg.weight_bits = std::stoi(val);
            else if (key == "input_bits") cfg.input_bits = std::stoi(val);
            else if (key == "clock_hz") cfg.clock_hz = std::stod(val);
            else if (key == "skip_mode") cfg.skip_mode = parse_skip_mode(val);
            else if (key == "e_op") cfg.energy.e_op = std::stod(val);
            else if (key == "e_wordline") cfg.energy.e_wordline = std::stod(val);
            else if (key == "e_bitline_read") cfg.energy.e_bitline_read = std::stod(val);
            else if (key == "e_adder") cfg.energy.e_adder = std::stod(val);
            else if (key == "e_buffer_access") cfg.energy.e_buffer_access = std::stod(val);
            else throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw UsageError(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(path + ": " + e.what());
    }
    return cfg;
}

int resolve_thread_count() {
    const char* env = std::getenv("CIMSIM_THREADS");
    long cap = 0;
    if (env && *env) {
        cap = std::strtol(env, nullptr, 10);
        if (cap < 0) cap = 0;
    }
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (cap == 0) return static_cast<int>(hw);
    return static_cast<int>(cap < static_cast<long>(hw) ? cap : static_cast<long>(hw));
}

}  // namespace cimsim
