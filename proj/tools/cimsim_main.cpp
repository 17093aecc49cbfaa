#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cimsim/config.hpp"
#include "cimsim/cost_model.hpp"
#include "cimsim/errors.hpp"
#include "cimsim/fusion.hpp"
#include "cimsim/matrix_io.hpp"
#include "cimsim/near_memory.hpp"
#include "cimsim/oracle.hpp"
#include "cimsim/synth.hpp"

namespace {

using cimsim::MacroConfig;

struct CommonOpts {
    std::string config_path;
    std::string skip_mode;
    uint64_t seed = 0;
};

MacroConfig make_config(const CommonOpts& opts) {
    MacroConfig cfg;
    if (!opts.config_path.empty()) cfg = cimsim::load_config(opts.config_path);
    if (!opts.skip_mode.empty()) cfg.skip_mode = cimsim::parse_skip_mode(opts.skip_mode);
    cfg.validate();
    return cfg;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cimsim::UsageError("cannot write " + path);
    out << text;
}

int cmd_fuse(const std::string& wq_path, const std::string& wk_path,
             const std::string& weight_mode, int input_bits, const std::string& out_path) {
    const auto wq = cimsim::load_matrix_auto(wq_path, input_bits);
    const auto wk = cimsim::load_matrix_auto(wk_path, input_bits);
    cimsim::FusedWeights fused = cimsim::fuse(wq, wk);
    if (weight_mode == "int8") {
        fused = cimsim::requantize(fused, 8);
    } else if (weight_mode != "exact") {
        throw cimsim::UsageError("unknown weight mode '" + weight_mode + "' (expected exact|int8)");
    }
    cimsim::save_fused(fused, out_path);
    std::printf("fused %dx%d weights (%s mode): max|w| = %lld, scale = %.17g -> %s\n", fused.d,
                fused.d, weight_mode.c_str(), static_cast<long long>(fused.max_abs()), fused.scale,
                out_path.c_str());
    return 0;
}

int cmd_score(const std::string& x_path, const std::string& fused_path, const CommonOpts& common,
              const std::string& out_path, const std::string& report_path,
              const std::string& format) {
    const MacroConfig cfg = make_config(common);
    const auto x = cimsim::load_matrix_auto(x_path, cfg.input_bits);
    const auto fused = cimsim::load_fused(fused_path);
    try {
        cimsim::check_accumulator_bound(fused.d, x.bits, fused.max_abs());
    } catch (const std::invalid_argument& e) {
        throw cimsim::UsageError(e.what());
    }
    const cimsim::ScoreRun run = cimsim::attention_scores(x, fused, cfg);

    if (format == "csv") {
        cimsim::save_scores_csv(run.scores, out_path);
    } else if (format == "bin") {
        cimsim::save_scores_bin(run.scores, out_path);
    } else if (format == "json") {
        nlohmann::ordered_json j;
        j["n"] = run.scores.n;
        j["values"] = run.scores.values;
        write_text(out_path, j.dump(2) + "\n");
    } else {
        throw cimsim::UsageError("unknown format '" + format + "' (expected csv|bin|json)");
    }

    nlohmann::ordered_json report = cimsim::report_to_json(run.report);
    report["workload"]["weight_mode"] =
        fused.mode == cimsim::WeightMode::Exact ? "exact" : "requantized";
    report["workload"]["weight_scale"] = fused.scale;
    const std::string rp = report_path.empty() ? out_path + ".report.json" : report_path;
    write_text(rp, report.dump(2) + "\n");
    return 0;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

int cmd_bench(const std::string& n_list, const std::string& d_list, const std::string& k_list,
              const std::string& sparsity_list, const CommonOpts& common,
              const std::string& out_path) {
    const MacroConfig base_cfg = make_config(common);
    std::ostringstream csv;
    csv << "n,d,k_bits,sparsity,skip_mode,total_ops,cycles,skipped_cycles,energy_j,latency_s,"
           "throughput_ops_per_s,access_ratio_per_inference\n";
    uint64_t row = 0;
    for (int n : parse_int_list(n_list)) {
        for (int d : parse_int_list(d_list)) {
            for (int k : parse_int_list(k_list)) {
                for (double sparsity : parse_double_list(sparsity_list)) {
                    if (n < 1 || d < 1) throw cimsim::UsageError("bench: n and d must be positive");
                    if (!(sparsity >= 0.0 && sparsity <= 1.0)) {
                        throw cimsim::UsageError("bench: sparsity must be in [0,1]");
                    }
                    MacroConfig cfg = base_cfg;
                    cfg.input_bits = k;
                    cimsim::DetRng rng(cimsim::derive_seed(common.seed, row));
                    const auto x =
                        cimsim::random_matrix_with_bit_density(n, d, k, 1.0 - sparsity, rng);
                    const auto wq = cimsim::random_matrix(d, d, k, rng);
                    const auto wk = cimsim::random_matrix(d, d, k, rng);
                    const auto fused = cimsim::fuse(wq, wk);
                    const cimsim::ScoreRun run = cimsim::attention_scores(x, fused, cfg);
                    const auto& r = run.report;
                    char buf[512];
                    std::snprintf(buf, sizeof buf,
                                  "%d,%d,%d,%.17g,%s,%llu,%llu,%llu,%.17g,%.17g,%.17g,%.17g\n", n,
                                  d, k, sparsity, cimsim::to_string(cfg.skip_mode).c_str(),
                                  static_cast<unsigned long long>(r.total_ops),
                                  static_cast<unsigned long long>(r.counters.bank.cycles),
                                  static_cast<unsigned long long>(r.counters.bank.skipped_cycles),
                                  r.energy_j, r.latency_s, r.throughput_ops_per_s,
                                  r.access_ratio_per_inference);
                    csv << buf;
                    ++row;
                }
            }
        }
    }
    write_text(out_path, csv.str());
    return 0;
}

int cmd_trace(int n, int d, int k, int w, const std::string& out_path) {
    const auto baseline = cimsim::baseline_trace(n, d, k, w);
    const auto proposed = cimsim::proposed_trace(n, d, k, w);
    nlohmann::ordered_json j;
    j["schema"] = "cimsim-trace-v1";
    j["workload"] = {{"n_tokens", n}, {"d", d}, {"input_bits", k}, {"weight_bits", w}};
    auto trace_json = [](const cimsim::AccessTrace& t) {
        return nlohmann::ordered_json{
            {"weight_write_bits", t.weight_write_bits},
            {"input_read_bits", t.input_read_bits},
            {"dynamic_write_bits", t.dynamic_write_bits},
            {"output_write_bits", t.output_write_bits},
            {"total_bits", t.total_bits()},
            {"per_inference_bits", t.per_inference_bits()},
            {"counting_model", t.description}};
    };
    j["proposed"] = trace_json(proposed);
    j["baseline"] = trace_json(baseline);
    j["ratios"] = {
        {"total_bits", proposed.total_bits() > 0
                           ? double(baseline.total_bits()) / double(proposed.total_bits())
                           : 0.0},
        {"per_inference_bits",
         proposed.per_inference_bits() > 0
             ? double(baseline.per_inference_bits()) / double(proposed.per_inference_bits())
             : 0.0}};
    j["reference"] = {{"memory_access_reduction_x", cimsim::kReferenceMemoryAccessReduction},
                      {"energy_reduction_x", cimsim::kReferenceEnergyReduction}};
    write_text(out_path, j.dump(2) + "\n");
    return 0;
}

int cmd_scale(double power_w, double area_mm2, const cimsim::NodeScalingParams& params,
              const std::string& out_path) {
    nlohmann::ordered_json j;
    j["schema"] = "cimsim-scale-v1";
    j["params"] = {{"l_from_nm", params.l_from_nm}, {"l_to_nm", params.l_to_nm},
                   {"v_from", params.v_from},       {"v_to", params.v_to},
                   {"f_from_hz", params.f_from_hz}, {"f_to_hz", params.f_to_hz}};
    j["input"] = {{"power_w", power_w}, {"area_mm2", area_mm2}};
    j["scaled"] = {{"power_w", cimsim::scale_power(power_w, params)},
                   {"area_mm2", cimsim::scale_area(area_mm2, params)}};
    j["reference"] = {
        {"power_w_65nm", cimsim::kReferencePowerW},
        {"area_mm2_65nm", cimsim::kReferenceAreaMm2},
        {"published_power_w_28nm", cimsim::kReferenceScaledPowerW},
        {"published_area_mm2_28nm", cimsim::kReferenceScaledAreaMm2},
        {"note", "the published 28 nm power figure (0.26 mW) differs from the stated scaling "
                 "formula applied to the 65 nm operating point (0.342 mW); both are shown"}};
    write_text(out_path, j.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bit-exact simulator and cost model for a weight-stationary CIM "
                 "attention-score macro"};
    app.require_subcommand(1);

    CommonOpts common;

    // fuse
    auto* fuse = app.add_subcommand("fuse", "pre-compute the combined QK weight matrix");
    std::string wq_path, wk_path, fuse_out, weight_mode = "exact";
    int fuse_bits = 8;
    fuse->add_option("--wq", wq_path, "W_Q matrix (csv or bin)")->required();
    fuse->add_option("--wk", wk_path, "W_K matrix (csv or bin)")->required();
    fuse->add_option("--weight-mode", weight_mode, "exact|int8 (default exact)");
    fuse->add_option("--bits", fuse_bits, "bit width of csv weight inputs (default 8)");
    fuse->add_option("--out", fuse_out, "output fused-weights file")->required();

    // score
    auto* score = app.add_subcommand("score", "compute the attention score matrix");
    std::string x_path, fused_path, score_out, report_path, format = "csv";
    score->add_option("--x", x_path, "token matrix (csv or bin)")->required();
    score->add_option("--fused", fused_path, "fused weights file")->required();
    score->add_option("--config", common.config_path, "macro config file");
    score->add_option("--skip-mode", common.skip_mode, "none|plane|element");
    score->add_option("--out", score_out, "score matrix output")->required();
    score->add_option("--report", report_path, "cost report path (default <out>.report.json)");
    score->add_option("--format", format, "csv|bin|json (default csv)");

    // bench
    auto* bench = app.add_subcommand("bench", "sweep synthetic workloads into a csv table");
    std::string n_list, d_list = "64", k_list = "8", sparsity_list = "0", bench_out;
    bench->add_option("--n-list", n_list, "comma-separated token counts")->required();
    bench->add_option("--d-list", d_list, "comma-separated dimensions (default 64)");
    bench->add_option("--k-list", k_list, "comma-separated input bit widths (default 8)");
    bench->add_option("--sparsity-list", sparsity_list, "comma-separated bit sparsities (default 0)");
    bench->add_option("--config", common.config_path, "macro config file");
    bench->add_option("--skip-mode", common.skip_mode, "none|plane|element");
    bench->add_option("--seed", common.seed, "seed for synthetic inputs (default 0)");
    bench->add_option("--out", bench_out, "output csv path")->required();

    // trace
    auto* trace = app.add_subcommand("trace", "analytic access-trace comparison vs baseline");
    int tr_n = 64, tr_d = 64, tr_k = 8, tr_w = 8;
    std::string trace_out;
    trace->add_option("--n", tr_n, "token count (default 64)");
    trace->add_option("--d", tr_d, "dimension (default 64)");
    trace->add_option("--k", tr_k, "input bits (default 8)");
    trace->add_option("--w", tr_w, "weight bits (default 8)");
    trace->add_option("--out", trace_out, "output path (default stdout)");

    // scale
    auto* scale = app.add_subcommand("scale", "process-node power/area scaling");
    double sc_power = cimsim::kReferencePowerW;
    double sc_area = cimsim::kReferenceAreaMm2;
    cimsim::NodeScalingParams params;
    params.v_to = 0.8;
    std::string scale_out;
    scale->add_option("--power", sc_power, "power in watts (default 1.24e-3)");
    scale->add_option("--area", sc_area, "area in mm^2 (default 0.35)");
    scale->add_option("--from-nm", params.l_from_nm, "source node (default 65)");
    scale->add_option("--to-nm", params.l_to_nm, "target node (default 28)");
    scale->add_option("--from-v", params.v_from, "source supply (default 1.0)");
    scale->add_option("--to-v", params.v_to, "target supply (default 0.8)");
    scale->add_option("--from-f", params.f_from_hz, "source clock (default 100e6)");
    scale->add_option("--to-f", params.f_to_hz, "target clock (default 100e6)");
    scale->add_option("--out", scale_out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (fuse->parsed()) return cmd_fuse(wq_path, wk_path, weight_mode, fuse_bits, fuse_out);
        if (score->parsed())
            return cmd_score(x_path, fused_path, common, score_out, report_path, format);
        if (bench->parsed())
            return cmd_bench(n_list, d_list, k_list, sparsity_list, common, bench_out);
        if (trace->parsed()) return cmd_trace(tr_n, tr_d, tr_k, tr_w, trace_out);
        if (scale->parsed()) return cmd_scale(sc_power, sc_area, params, scale_out);
    } catch (const cimsim::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
