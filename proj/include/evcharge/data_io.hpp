#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evcharge/results.hpp"
#include "evcharge/types.hpp"

namespace evc {

// Scenario configuration. Defaults are the reference experiment values; a
// config file (flat key = value lines, '#' comments) or CLI flags override.
struct ScenarioConfig {
    int n_evs = 25;
    int n_stations = 2;
    double max_load_kw = 100.0;
    double peak_kw = 120.0;
    double v_charg_init = 350.0;
    double v_dead = 200.0;
    double eta = 1.0;
    double alpha = 0.001;
    double b_max = 20.0;
    int k_actions = 5;
    double charging_efficiency = 0.9;
    unsigned long long rng_seed = 1;
    double arrival_mean_hour = 8.0;
    double arrival_std_hour = 1.0;
    double departure_mean_hour = 17.0;
    double departure_std_hour = 1.0;
    // Negative noise levels mean "0.1 * series mean".
    double forecast_price_noise_std = -1.0;
    double forecast_renewable_noise_std = -1.0;
    double forecast_base_noise_std = -1.0;
    bool forecast_from_truth = false; // true: estimates use the real series
    std::string algorithm = "proposed";
    int slot_count = 96;
    double slot_hours = 0.25;
    double solar_capacity_kw = 30.0;
    double wind_capacity_kw = 10.0;
    double battery_capacity_kwh = 40.0;
    double max_rate_kw = 6.6;
    double target_soc = 1.0;
    double solar_installed = 0.0; // for ingestion: 0 means normalize by series max
    double wind_installed = 0.0;
    std::string series_csv; // empty: use the built-in synthetic day

    TimeGrid grid() const { return {slot_count, slot_hours, 0.0}; }
    void validate() const;
    void set(const std::string& key, const std::string& value); // throws config_error
    std::map<std::string, std::string> echo() const;            // stable key order

    static const std::vector<std::pair<std::string, std::string>>& key_help();
};

ScenarioConfig load_config(const std::string& path);

bool is_known_algorithm(const std::string& name);
const std::vector<std::string>& algorithm_names();

// Slot-resampled signal series plus the slot-start timestamps.
struct SeriesBundle {
    std::vector<std::int64_t> slot_start_epoch;
    std::vector<double> base_load_kw;
    std::vector<double> price_per_kwh;
    std::vector<double> solar_per_unit;
    std::vector<double> wind_per_unit;
};

struct ColumnMap {
    std::string timestamp = "timestamp";
    std::string base_load = "base_load";
    std::string price = "price";
    std::string solar = "solar";
    std::string wind = "wind";
};

struct SeriesNormalization {
    double max_load_kw = 100.0;
    double solar_installed = 0.0; // 0: normalize by series max
    double wind_installed = 0.0;
    double price_scale = 1.0;
};

// Ingests a CSV with a header row, one timestamp column (ISO-8601 or epoch
// seconds) and one numeric column per mapped signal. Rows are averaged into
// slots; base load is normalized to its max then rescaled, renewables are
// divided by installed capacity into per-unit profiles.
SeriesBundle load_series(const std::string& path, const ColumnMap& columns,
                         const TimeGrid& grid, const SeriesNormalization& norm);

// Built-in synthetic day (deterministic), already normalized. Stands in for
// a real downloaded day so everything runs offline.
SeriesBundle synthetic_day(const TimeGrid& grid, double max_load_kw);

// Writes a raw one-minute-resolution day that load_series can ingest back.
void write_raw_day_csv(const std::string& path);

// Writes the resampled bundle in the ingestible CSV format (full precision).
void write_series_csv(const std::string& path, const SeriesBundle& series,
                      const TimeGrid& grid);

GridSignals to_signals(const SeriesBundle& series, const ScenarioConfig& cfg);
SeriesBundle load_or_synthesize_series(const ScenarioConfig& cfg);

// Seeded synthetic fleet per the scenario parameters.
std::vector<EvRecord> generate_fleet(const ScenarioConfig& cfg, const TimeGrid& grid);

// Per-slot noisy copy of a series (clipped at zero; per-unit profiles also at
// one). sigma < 0 selects 0.1 * series mean.
SeriesBundle make_forecast(const SeriesBundle& truth, const ScenarioConfig& cfg);

// Writes slots.csv, evs.csv and summary.json under out_dir.
struct ExportPaths {
    std::string slots_csv;
    std::string evs_csv;
    std::string summary_json;
};
ExportPaths export_results(const RunResult& run, const ScenarioConfig& cfg,
                           const std::string& out_dir);

} // namespace evc
