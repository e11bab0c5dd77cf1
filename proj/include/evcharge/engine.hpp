#pragma once

#include <string>
#include <vector>

#include "evcharge/data_io.hpp"
#include "evcharge/results.hpp"
#include "evcharge/types.hpp"

namespace evc::engine {

struct RunOptions {
    bool deadline_game = true; // false reproduces the plain-EDF variant
};

// Runs the online slot loop: observe, decide purchases, update the virtual
// queues, dispatch EDF, update SOC, estimate finishes, play the deadline
// game, admit arrivals, adapt the trade-off weights.
RunResult run(const ScenarioConfig& cfg, const SeriesBundle& series,
              std::vector<EvRecord> fleet, const RunOptions& opts = {});

// Runs any of the five algorithms on the same inputs.
RunResult run_algorithm(const std::string& algorithm, const ScenarioConfig& cfg,
                        const SeriesBundle& series, const std::vector<EvRecord>& fleet);

struct SweepRow {
    std::string parameter;
    std::string value;
    bool failed = false;
    std::string error;
    double total_cost = 0.0;
    double norm_cost = 0.0; // relative to the offline-optimal run on the same inputs
    double mean_qos = 0.0;
    double unmet_kwh = 0.0;
    double runtime_ms = 0.0;
};

// One run per value of the swept parameter (v_charg, v_dead, n, m, seed or
// algorithm); per-cell failures are reported in the row, other cells finish.
std::vector<SweepRow> sweep(const ScenarioConfig& cfg, const std::string& parameter,
                            const std::vector<std::string>& values);

struct CompareRow {
    unsigned long long seed = 0;
    std::string algorithm;
    bool failed = false;
    std::string error;
    double total_cost = 0.0;
    double norm_cost = 0.0;
    double mean_qos = 0.0;
    double unmet_kwh = 0.0;
};

// Runs all five algorithms per seed on shared fleets and series.
std::vector<CompareRow> compare(const ScenarioConfig& cfg,
                                const std::vector<unsigned long long>& seeds);

} // namespace evc::engine
