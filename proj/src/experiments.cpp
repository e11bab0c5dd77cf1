#include <chrono>

#include "evcharge/baselines.hpp"
#include "evcharge/engine.hpp"
#include "evcharge/errors.hpp"

namespace evc::engine {

RunResult run_algorithm(const std::string& algorithm, const ScenarioConfig& cfg,
                        const SeriesBundle& series, const std::vector<EvRecord>& fleet) {
    if (algorithm == "proposed") return run(cfg, series, fleet);
    if (algorithm == "edf") return baselines::edf_only(cfg, series, fleet);
    if (algorithm == "occma") return baselines::occma(cfg, series, fleet);
    if (algorithm == "ocsa_f")
        return baselines::ocsa(cfg, series, fleet, baselines::OcsaVariant::with_price_forecast);
    if (algorithm == "ocsa_n")
        return baselines::ocsa(cfg, series, fleet, baselines::OcsaVariant::no_price_forecast);
    std::string msg = "unknown algorithm '" + algorithm + "'; valid:";
    for (const auto& n : algorithm_names()) msg += " " + n;
    throw config_error(msg);
}

namespace {

bool is_sweep_parameter(const std::string& parameter) {
    for (const char* p : {"v_charg", "v_dead", "n", "m", "seed", "algorithm"})
        if (parameter == p) return true;
    return false;
}

ScenarioConfig apply_parameter(ScenarioConfig cfg, const std::string& parameter,
                               const std::string& value) {
    if (parameter == "v_charg") cfg.set("v_charg_init", value);
    else if (parameter == "v_dead") cfg.set("v_dead", value);
    else if (parameter == "n") cfg.set("n_evs", value);
    else if (parameter == "m") cfg.set("n_stations", value);
    else if (parameter == "seed") cfg.set("rng_seed", value);
    else cfg.set("algorithm", value);
    return cfg;
}

} // namespace

std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& parameter,
                            const std::vector<std::string>& values) {
    // A bad parameter name is a usage error, not a per-cell failure.
    if (!is_sweep_parameter(parameter))
        throw config_error("unknown sweep parameter '" + parameter +
                           "'; valid: v_charg v_dead n m seed algorithm");
    std::vector<SweepRow> rows;
    for (const std::string& value : values) {
        SweepRow row;
        row.parameter = parameter;
        row.value = value;
        try {
            const ScenarioConfig cell = apply_parameter(cfg, parameter, value);
            cell.validate();
            const SeriesBundle series = load_or_synthesize_series(cell);
            const std::vector<EvRecord> fleet = generate_fleet(cell, cell.grid());
            const auto start = std::chrono::steady_clock::now();
            const RunResult run = run_algorithm(cell.algorithm, cell, series, fleet);
            row.runtime_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
            const RunResult best = baselines::occma(cell, series, fleet);
            row.total_cost = run.total_cost;
            row.norm_cost = best.total_cost > 0.0 ? run.total_cost / best.total_cost : 0.0;
            row.mean_qos = run.mean_qos;
            row.unmet_kwh = run.total_unmet_kwh;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<CompareRow> compare(const ScenarioConfig& cfg,
                                const std::vector<unsigned long long>& seeds) {
    std::vector<CompareRow> rows;
    for (unsigned long long seed : seeds) {
        ScenarioConfig cell = cfg;
        cell.rng_seed = seed;
        SeriesBundle series;
        std::vector<EvRecord> fleet;
        bool setup_ok = true;
        std::string setup_err;
        try {
            cell.validate();
            series = load_or_synthesize_series(cell);
            fleet = generate_fleet(cell, cell.grid());
        } catch (const std::exception& e) {
            setup_ok = false;
            setup_err = e.what();
        }
        std::vector<CompareRow> seed_rows;
        double occma_cost = 0.0;
        for (const std::string& name : algorithm_names()) {
            CompareRow row;
            row.seed = seed;
            row.algorithm = name;
            if (!setup_ok) {
                row.failed = true;
                row.error = setup_err;
                seed_rows.push_back(std::move(row));
                continue;
            }
            try {
                const RunResult r = run_algorithm(name, cell, series, fleet);
                row.total_cost = r.total_cost;
                row.mean_qos = r.mean_qos;
                row.unmet_kwh = r.total_unmet_kwh;
                if (name == "occma") occma_cost = r.total_cost;
            } catch (const std::exception& e) {
                row.failed = true;
                row.error = e.what();
            }
            seed_rows.push_back(std::move(row));
        }
        for (CompareRow& row : seed_rows) {
            row.norm_cost = !row.failed && occma_cost > 0.0 ? row.total_cost / occma_cost : 0.0;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace evc::engine
