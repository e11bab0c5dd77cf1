#pragma once

#include <vector>

namespace evc {

// Virtual-queue recursions and the quadratic drift bounds used to audit
// every simulated step. All energies are per-slot kWh, times in slots.

// Unserved-demand queue: service eps_c*y leaves first, arrivals join after.
double update_q(double q, double y_kwh, double lambda_arriving_kwh, double eps_c);

// Deadline-pressure queue: grows with eta*q, drains with service.
double update_z(double z, double q, double y_kwh, double eta, double eps_c);

// Waiting queue of one EV: increment (target-soc)*(mean_deadline - finish),
// capped at b_max and floored at zero.
double update_b(double b, double soc, double target_soc, double mean_deadline_slot,
                double finish_slot, double b_max);

// Upper bounds on the one-step change of the squared queues. Valid whenever
// the realized arrival satisfies lambda <= lambda_max (q case) and
// mean_deadline >= finish with target-soc in [0,1] (b case).
double drift_bound_q(double q, double y_kwh, double lambda_max_kwh, double eps_c);
double drift_bound_z(double z, double q, double y_kwh, double eta, double eps_c);
double drift_bound_b(double b, double mean_deadline_slot, double finish_slot);

// Audit rows recorded by the engine every slot; dominance of bound over
// realized drift is asserted by tests and the acceptance suite.
struct StationDriftRow {
    int slot = 0;
    int station = 0;
    double q_before = 0, q_after = 0;
    double z_before = 0, z_after = 0;
    double y_kwh = 0;
    double lambda_kwh = 0;
    double lambda_max_kwh = 0;
    double bound_q = 0, bound_z = 0;

    double q_drift() const { return q_after * q_after - q_before * q_before; }
    double z_drift() const { return z_after * z_after - z_before * z_before; }
    // Tolerances scale with the squared-queue magnitude; the z bound is an
    // exact identity when its clamp is inactive, so rounding dust is all
    // that separates the two sides.
    bool q_dominated(double tol = 1e-9) const {
        return q_drift() <= bound_q + tol * (1.0 + q_before * q_before + q_after * q_after);
    }
    bool z_dominated(double tol = 1e-9) const {
        return z_drift() <= bound_z + tol * (1.0 + z_before * z_before + z_after * z_after);
    }
};

struct EvDriftRow {
    int slot = 0;
    int ev = 0;
    double b_before = 0, b_after = 0;
    double gap_slots = 0; // mean chosen deadline minus estimated finish
    double bound_b = 0;
    bool clamped = false;    // floor or b_max clamp fired
    bool applicable = false; // gap >= 0, the bound's validity domain

    double b_drift() const { return b_after * b_after - b_before * b_before; }
    bool b_dominated(double tol = 1e-9) const {
        return b_drift() <= bound_b + tol * (1.0 + b_before * b_before + b_after * b_after);
    }
};

struct DriftAudit {
    std::vector<StationDriftRow> stations;
    std::vector<EvDriftRow> evs;
};

} // namespace evc
