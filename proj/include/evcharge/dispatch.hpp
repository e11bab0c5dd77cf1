#pragma once

#include <map>
#include <vector>

#include "evcharge/types.hpp"

namespace evc {

// Per-EV grid-side energy grant for one slot.
struct EdfShare {
    int ev_id = 0;
    double grid_kwh = 0.0;
};

// Earliest-deadline-first split of a station's slot budget (grid-side kWh).
// Order: deadline ascending, then larger remaining demand, then lower id.
// Each EV receives min(rate cap, remaining demand / eps_c, budget left).
std::vector<EdfShare> edf_allocate(const std::vector<const EvRecord*>& roster,
                                   double budget_kwh, double eps_c, double slot_hours);

// Applies grid-side energy to the battery; SOC moves by eps_c*delivered/cap,
// capped at the target. Returns the grid-side energy that could not be used.
double apply_charge(EvRecord& ev, double delivered_kwh, double eps_c);

// Exact water-fill: smallest level such that sum_s clip(level - floor[s], 0,
// ceil - floor[s]) == volume. Returns +inf when the volume does not fit.
double water_fill_level(const std::vector<double>& floors, double ceil, double volume);

// Per-slot fill implied by the level (full headroom when volume does not fit).
std::vector<double> water_fill_plan(const std::vector<double>& floors, double ceil,
                                    double volume);

// Inputs for the finish-time estimate: forecast signals and a snapshot of
// every EV still owed energy.
struct FinishForecast {
    const std::vector<double>* base_load_kw = nullptr;
    const std::vector<double>* station_renewable_kwh = nullptr; // aggregated, per slot
    double peak_kw = 0.0;
    double eps_c = 0.9;
};

// Plan computed when estimating finish times; exposed so tests can check the
// flatness of the planned aggregate profile.
struct FinishPlan {
    int from_slot = 0;
    int horizon_end = 0;                  // earliest deadline among present EVs
    std::vector<double> grid_plan_kwh;    // planned purchases per horizon slot
    std::vector<double> budget_kwh;       // purchases + forecast renewables
    std::map<int, int> finish;            // EV id -> estimated finish slot
};

// Estimates every EV's finishing slot by flattening the planned aggregate
// load over [from_slot, earliest deadline] and replaying EDF under the
// resulting budgets. EVs with no remaining demand estimate at from_slot;
// EVs that do not finish inside the horizon estimate at their own deadline.
FinishPlan estimate_finish(const std::vector<EvRecord>& evs, const FinishForecast& fc,
                           const TimeGrid& grid, int from_slot);

} // namespace evc
