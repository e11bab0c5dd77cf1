#include "evcharge/results.hpp"

namespace evc {

void RunResult::finalize_totals() {
    total_cost = 0.0;
    total_purchased_kwh = 0.0;
    total_renewable_used_kwh = 0.0;
    total_curtailed_kwh = 0.0;
    for (const SlotDecision& s : slots) {
        total_cost += s.cost;
        for (double x : s.purchases_kwh) total_purchased_kwh += x;
        for (double r : s.renewable_used_kwh) total_renewable_used_kwh += r;
        for (double c : s.curtailed_kwh) total_curtailed_kwh += c;
    }
    terminal_q_sum = 0.0;
    terminal_z_sum = 0.0;
    if (!slots.empty()) {
        for (double q : slots.back().q_after) terminal_q_sum += q;
        for (double z : slots.back().z_after) terminal_z_sum += z;
    }
    total_demand_kwh = 0.0;
    total_delivered_kwh = 0.0;
    total_unmet_kwh = 0.0;
    double qos_sum = 0.0;
    for (const EvOutcome& ev : evs) {
        total_demand_kwh += ev.demand_kwh;
        total_delivered_kwh += ev.delivered_kwh;
        total_unmet_kwh += ev.unmet_kwh;
        qos_sum += ev.qos;
    }
    mean_qos = evs.empty() ? 0.0 : qos_sum / static_cast<double>(evs.size());
}

} // namespace evc
