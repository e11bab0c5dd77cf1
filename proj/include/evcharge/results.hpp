#pragma once

#include <map>
#include <string>
#include <vector>

#include "evcharge/queues.hpp"

namespace evc {

// Everything decided and observed in one slot. Per-station vectors are
// indexed by station id; per-EV values keyed by EV id.
struct SlotDecision {
    int slot = 0;
    double price_per_kwh = 0.0;
    double base_load_kw = 0.0;
    std::vector<double> purchases_kwh;
    std::vector<double> renewable_used_kwh;
    std::vector<double> curtailed_kwh;
    std::vector<double> totals_kwh; // purchases + used renewable
    std::vector<double> q_after;
    std::vector<double> z_after;
    std::map<int, double> ev_rates_kw;
    std::map<int, int> finish_estimates;
    std::map<int, int> deadline_choices;
    std::map<int, double> b_after;
    std::map<int, std::vector<double>> strategies; // EV id -> mixed strategy
    double cost = 0.0;                             // price * total purchases
    double objective = 0.0;                        // purchase QP objective
    double peak_multiplier = 0.0;
    bool peak_binding = false;
    double unused_kwh = 0.0; // bought or curtailment-exempt energy EDF could not place
    DriftAudit audit;
};

struct EvOutcome {
    int id = 0;
    int station = 0;
    int arrival_slot = 0;
    int finish_slot = 0;
    int original_deadline_slot = 0;
    int final_deadline_slot = 0;
    double capacity_kwh = 0.0;
    double initial_soc = 0.0;
    double final_soc = 0.0;
    double demand_kwh = 0.0;
    double delivered_kwh = 0.0; // battery side
    double unmet_kwh = 0.0;
    double qos = 0.0;
};

struct RunResult {
    std::string algorithm;
    unsigned long long seed = 0;
    std::vector<SlotDecision> slots;
    std::vector<EvOutcome> evs;

    double total_cost = 0.0;
    double mean_qos = 0.0;
    double total_demand_kwh = 0.0;
    double total_delivered_kwh = 0.0; // battery side
    double total_unmet_kwh = 0.0;
    double total_purchased_kwh = 0.0;
    double total_renewable_used_kwh = 0.0;
    double total_curtailed_kwh = 0.0;
    double terminal_q_sum = 0.0;
    double terminal_z_sum = 0.0;

    void finalize_totals(); // fills the aggregates from slots/evs
};

} // namespace evc
