// Command-line front end: run one scenario, compare the five algorithms over
// seeds, or sweep a parameter. Artifacts land as CSV/JSON under --out.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evcharge/baselines.hpp"
#include "evcharge/data_io.hpp"
#include "evcharge/engine.hpp"
#include "evcharge/errors.hpp"

namespace {

using namespace evc;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Seed lists accept "1..10" ranges and comma lists.
std::vector<unsigned long long> parse_seeds(const std::vector<std::string>& specs) {
    std::vector<unsigned long long> seeds;
    for (const std::string& spec : specs) {
        std::string item;
        std::stringstream ss(spec);
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const std::size_t dots = item.find("..");
            if (dots != std::string::npos) {
                const unsigned long long lo = std::stoull(item.substr(0, dots));
                const unsigned long long hi = std::stoull(item.substr(dots + 2));
                for (unsigned long long s = lo; s <= hi; ++s) seeds.push_back(s);
            } else {
                seeds.push_back(std::stoull(item));
            }
        }
    }
    if (seeds.empty()) throw config_error("empty seed list");
    return seeds;
}

ScenarioConfig build_config(const std::string& config_path,
                            const std::vector<std::string>& overrides) {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    for (const std::string& kv : overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos) throw config_error("expected key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

int cmd_run(const std::string& config_path, const std::string& algorithm, long long seed,
            const std::string& out_dir, const std::vector<std::string>& overrides) {
    ScenarioConfig cfg = build_config(config_path, overrides);
    if (!algorithm.empty()) cfg.algorithm = algorithm;
    if (seed >= 0) cfg.rng_seed = static_cast<unsigned long long>(seed);
    cfg.validate();

    const SeriesBundle series = load_or_synthesize_series(cfg);
    const std::vector<EvRecord> fleet = generate_fleet(cfg, cfg.grid());
    try {
        const RunResult result = engine::run_algorithm(cfg.algorithm, cfg, series, fleet);
        const ExportPaths paths = export_results(result, cfg, out_dir);
        std::cout << "algorithm=" << result.algorithm << " seed=" << result.seed
                  << " total_cost=" << fmt(result.total_cost)
                  << " mean_qos=" << fmt(result.mean_qos)
                  << " terminal_q=" << fmt(result.terminal_q_sum)
                  << " unmet_kwh=" << fmt(result.total_unmet_kwh) << "\n";
        std::cout << "wrote " << paths.slots_csv << " " << paths.evs_csv << " "
                  << paths.summary_json << "\n";
        return 0;
    } catch (const engine_fault& f) {
        std::filesystem::create_directories(out_dir);
        const std::string dump_path = out_dir + "/state_dump.json";
        std::ofstream dump(dump_path);
        dump << f.state_dump << "\n";
        std::cerr << "run aborted: " << f.what() << "\nstate dump: " << dump_path << "\n";
        return 1;
    }
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& seed_specs,
                const std::string& out_dir, const std::vector<std::string>& overrides) {
    ScenarioConfig cfg = build_config(config_path, overrides);
    cfg.validate();
    const std::vector<unsigned long long> seeds = parse_seeds(seed_specs);
    const std::vector<engine::CompareRow> rows = engine::compare(cfg, seeds);

    std::filesystem::create_directories(out_dir);
    const std::string csv_path = out_dir + "/compare.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "seed,algorithm,total_cost,norm_cost,mean_qos,unmet_kwh,error\n";
    for (const auto& r : rows)
        csv << r.seed << "," << r.algorithm << "," << fmt_full(r.total_cost) << ","
            << fmt_full(r.norm_cost) << "," << fmt_full(r.mean_qos) << ","
            << fmt_full(r.unmet_kwh) << "," << (r.failed ? "\"" + r.error + "\"" : "") << "\n";

    // Per-algorithm mean/std of the normalized cost and QoS.
    std::cout << "algorithm        norm_cost(mean/std)   mean_qos(mean/std)   cells\n";
    for (const std::string& name : algorithm_names()) {
        double sc = 0, sc2 = 0, sq = 0, sq2 = 0;
        int n = 0;
        for (const auto& r : rows) {
            if (r.algorithm != name || r.failed) continue;
            sc += r.norm_cost;
            sc2 += r.norm_cost * r.norm_cost;
            sq += r.mean_qos;
            sq2 += r.mean_qos * r.mean_qos;
            ++n;
        }
        if (n == 0) {
            std::printf("%-16s (all cells failed)\n", name.c_str());
            continue;
        }
        const double mc = sc / n, mq = sq / n;
        const double vc = std::max(0.0, sc2 / n - mc * mc);
        const double vq = std::max(0.0, sq2 / n - mq * mq);
        std::printf("%-16s %8.4f / %-8.4f   %8.4f / %-8.4f   %d\n", name.c_str(), mc,
                    std::sqrt(vc), mq, std::sqrt(vq), n);
        csv << "mean_std," << name << ",," << fmt_full(mc) << "," << fmt_full(mq) << ",,"
            << "\n";
    }
    std::cout << "wrote " << csv_path << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::string& values_csv, const std::string& out_dir,
              const std::vector<std::string>& overrides) {
    ScenarioConfig cfg = build_config(config_path, overrides);
    cfg.validate();
    std::vector<std::string> values;
    std::stringstream ss(values_csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) values.push_back(item);
    if (values.empty()) throw config_error("empty sweep value list");

    const std::vector<engine::SweepRow> rows = engine::sweep(cfg, param, values);
    std::filesystem::create_directories(out_dir);
    const std::string csv_path = out_dir + "/sweep.csv";
    std::ofstream csv(csv_path, std::ios::binary);
    csv << "parameter,value,total_cost,norm_cost,mean_qos,unmet_kwh,runtime_ms,error\n";
    std::cout << "parameter value     total_cost  norm_cost  mean_qos  unmet_kwh\n";
    for (const auto& r : rows) {
        csv << r.parameter << "," << r.value << "," << fmt_full(r.total_cost) << ","
            << fmt_full(r.norm_cost) << "," << fmt_full(r.mean_qos) << ","
            << fmt_full(r.unmet_kwh) << "," << fmt_full(r.runtime_ms) << ","
            << (r.failed ? "\"" + r.error + "\"" : "") << "\n";
        if (r.failed)
            std::printf("%-9s %-9s failed: %s\n", r.parameter.c_str(), r.value.c_str(),
                        r.error.c_str());
        else
            std::printf("%-9s %-9s %10.4f %10.4f %9.4f %10.4f\n", r.parameter.c_str(),
                        r.value.c_str(), r.total_cost, r.norm_cost, r.mean_qos, r.unmet_kwh);
    }
    std::cout << "wrote " << csv_path << "\n";
    return 0;
}

std::string config_help_text() {
    std::string text = "Config file keys (flat `key = value` lines, # comments):\n";
    for (const auto& [key, help] : ScenarioConfig::key_help())
        text += "  " + key + std::string(key.size() < 28 ? 28 - key.size() : 1, ' ') + help + "\n";
    return text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging management simulator"};
    app.footer(config_help_text());
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", algorithm;
    long long seed = -1;
    std::vector<std::string> overrides, seed_specs;
    std::string param, values_csv, data_path;

    CLI::App* run = app.add_subcommand("run", "run one scenario and export artifacts");
    run->add_option("--config", config_path, "scenario config file");
    run->add_option("--algorithm", algorithm, "proposed | occma | ocsa_f | ocsa_n | edf");
    run->add_option("--seed", seed, "override rng_seed");
    run->add_option("--out", out_dir, "output directory (default out)");
    run->add_option("--set", overrides, "key=value config override (repeatable)");

    CLI::App* compare = app.add_subcommand("compare", "run all five algorithms over seeds");
    compare->add_option("--config", config_path, "scenario config file");
    compare->add_option("--seeds", seed_specs, "seed list, e.g. 1..10 or 1,2,5")->required();
    compare->add_option("--out", out_dir, "output directory (default out)");
    compare->add_option("--set", overrides, "key=value config override (repeatable)");

    CLI::App* sweep = app.add_subcommand("sweep", "run one scenario per parameter value");
    sweep->add_option("--config", config_path, "scenario config file");
    sweep->add_option("--param", param, "v_charg | v_dead | n | m | seed | algorithm")
        ->required();
    sweep->add_option("--values", values_csv, "comma-separated values")->required();
    sweep->add_option("--out", out_dir, "output directory (default out)");
    sweep->add_option("--set", overrides, "key=value config override (repeatable)");

    CLI::App* gen = app.add_subcommand("gen-data", "write the bundled synthetic day CSV");
    gen->add_option("path", data_path, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, algorithm, seed, out_dir, overrides);
        if (compare->parsed()) return cmd_compare(config_path, seed_specs, out_dir, overrides);
        if (sweep->parsed()) return cmd_sweep(config_path, param, values_csv, out_dir, overrides);
        if (gen->parsed()) {
            evc::write_raw_day_csv(data_path);
            std::cout << "wrote " << data_path << "\n";
            return 0;
        }
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
