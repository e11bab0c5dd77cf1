#pragma once

#include <optional>
#include <vector>

namespace evc {

// Discrete simulation day: slot_count slots of slot_hours each, slot 0
// starting at origin_hour on the wall clock.
struct TimeGrid {
    int slot_count = 96;
    double slot_hours = 0.25;
    double origin_hour = 0.0;

    bool valid_slot(int t) const { return t >= 0 && t < slot_count; }
    double hours(int slots) const { return slots * slot_hours; }
    double hour_of_slot(int t) const { return origin_hour + t * slot_hours; }
    int slot_of_hour(double h) const;
    void validate() const;
};

// One EV: static charging parameters plus mutable charging-session state.
struct EvRecord {
    int id = 0;
    int station = 0;
    int arrival_slot = 0;
    int deadline_slot = 0;          // current deadline, moves with the game
    int original_deadline_slot = 0; // as submitted on arrival
    double capacity_kwh = 40.0;
    double target_soc = 1.0;
    double soc = 0.0;
    double max_rate_kw = 6.6;
    std::optional<int> finish_estimate_slot;
    double b_queue = 0.0;   // accumulated waiting pressure, slot units
    double b_max = 20.0;
    double v_dead = 200.0;  // risk trade-off weight in the deadline game

    // Battery-side energy still owed; clamps at zero once the target is met.
    double remaining_demand_kwh() const;
    bool fully_charged(double tol = 1e-9) const { return remaining_demand_kwh() <= tol; }
};

// Battery-side demand implied by the current SOC (zero when already at or
// above target).
double ev_demand(const EvRecord& ev);

// Fairness index over the charging/waiting split, durations in hours.
// Requires arrival <= finish <= deadline.
double qos(int arrival_slot, int finish_slot, int deadline_slot, const TimeGrid& grid);

// Per-station scheduler state: roster plus the two virtual queues driving
// the purchase decision.
struct StationState {
    int id = 0;
    std::vector<int> roster;     // EV ids currently present
    double q_queue = 0.0;        // unserved battery-side demand, kWh
    double z_queue = 0.0;        // deadline-pressure queue, kWh
    double eta = 1.0;            // z-queue growth factor
    double v_charg = 350.0;      // cost trade-off weight
    double solar_capacity_kw = 30.0;
    double wind_capacity_kw = 10.0;
    double lambda_max_kwh = 40.0; // running max of per-slot arriving demand
};

// Exogenous day-long signals, one sample per slot.
struct GridSignals {
    std::vector<double> base_load_kw;
    std::vector<double> price_per_kwh;
    std::vector<double> solar_per_unit; // in [0,1], fraction of installed capacity
    std::vector<double> wind_per_unit;
    double peak_kw = 120.0;
    double charging_efficiency = 0.9;

    double renewable_kw(const StationState& st, int t) const {
        return st.solar_capacity_kw * solar_per_unit[t] + st.wind_capacity_kw * wind_per_unit[t];
    }
    void validate(const TimeGrid& grid) const;
};

// Candidate-deadline menu: signed slot offsets applied to the original
// deadline, clipped into [lo, hi].
struct ActionSpace {
    std::vector<int> offsets; // strictly increasing

    static ActionSpace symmetric(int k); // k actions centered on offset 0
    std::vector<int> candidates(int original_deadline, int lo, int hi) const;
    // Candidates still ahead of after_slot, unclamped below: options whose
    // time has passed drop out of the menu instead of sliding forward, so
    // the menu empties once the whole window is behind the EV.
    std::vector<int> future_candidates(int original_deadline, int after_slot, int last) const;
    void validate() const;
};

// Probability vector over the k candidate deadlines of one EV.
struct MixedStrategy {
    std::vector<double> weights;

    bool valid(double tol = 1e-9) const;
    double mean_deadline(const std::vector<int>& candidates) const;
};

} // namespace evc
