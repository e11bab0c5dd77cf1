#pragma once

#include <vector>

#include "evcharge/solver.hpp"

namespace evc {

// Per-slot purchase decision across all stations: one diagonal QP in the
// per-station grid purchases, coupled by the shared peak-headroom row.

struct PurchaseInputs {
    double q_queue = 0.0;
    double z_queue = 0.0;
    double eta = 1.0;
    double v_charg = 350.0;
    double lambda_max_kwh = 0.0;
    double service_cap_kwh = 0.0; // min(deliverable this slot, q_queue)
    double renewable_kwh = 0.0;   // raw renewable energy available this slot
};

struct AssembledPurchase {
    QpProblem qp;                          // variables: grid purchases per station
    std::vector<double> usable_renewable_kwh; // after curtailment to the service cap
};

struct PurchaseDecision {
    std::vector<double> purchases_kwh;
    std::vector<double> usable_renewable_kwh;
    std::vector<double> totals_kwh; // purchases + usable renewable
    double multiplier = 0.0;        // peak-coupling dual
    double objective = 0.0;
    bool peak_binding = false;
};

// Builds the drift-plus-penalty QP for one slot. headroom_kwh is the energy
// the grid can still supply under the peak cap; negative headroom is a model
// error raised by the caller.
AssembledPurchase assemble_purchase_problem(const std::vector<PurchaseInputs>& stations,
                                            double price_per_kwh, double eps_c,
                                            double headroom_kwh);

// Solves the assembled problem; throws engine_fault if the QP reports
// infeasible.
PurchaseDecision decide_purchases(const std::vector<PurchaseInputs>& stations,
                                  double price_per_kwh, double eps_c, double headroom_kwh);

// Multiplicative trade-off adaptation from the roster's deadline shifts.
double update_tradeoff_weight(double v_charg, double deadline_shift_sum, double alpha);

} // namespace evc
