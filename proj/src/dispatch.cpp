#include "evcharge/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evc {

std::vector<EdfShare> edf_allocate(const std::vector<const EvRecord*>& roster,
                                   double budget_kwh, double eps_c, double slot_hours) {
    if (budget_kwh < 0.0) throw std::invalid_argument("edf_allocate: negative budget");
    std::vector<const EvRecord*> order;
    order.reserve(roster.size());
    for (const EvRecord* ev : roster)
        if (!ev->fully_charged()) order.push_back(ev);
    std::sort(order.begin(), order.end(), [](const EvRecord* a, const EvRecord* b) {
        if (a->deadline_slot != b->deadline_slot) return a->deadline_slot < b->deadline_slot;
        const double ra = a->remaining_demand_kwh(), rb = b->remaining_demand_kwh();
        if (ra != rb) return ra > rb;
        return a->id < b->id;
    });

    std::vector<EdfShare> shares;
    shares.reserve(order.size());
    double left = budget_kwh;
    for (const EvRecord* ev : order) {
        if (left <= 0.0) break;
        const double cap = ev->max_rate_kw * slot_hours;
        const double need = ev->remaining_demand_kwh() / eps_c;
        const double grant = std::min({cap, need, left});
        if (grant > 0.0) {
            shares.push_back({ev->id, grant});
            left -= grant;
        }
    }
    return shares;
}

double apply_charge(EvRecord& ev, double delivered_kwh, double eps_c) {
    if (delivered_kwh < 0.0) throw std::invalid_argument("apply_charge: negative delivery");
    const double headroom_kwh = std::max(0.0, (ev.target_soc - ev.soc) * ev.capacity_kwh);
    const double usable = std::min(delivered_kwh, headroom_kwh / eps_c);
    ev.soc = std::min(ev.target_soc, ev.soc + eps_c * usable / ev.capacity_kwh);
    return delivered_kwh - usable;
}

double water_fill_level(const std::vector<double>& floors, double ceil, double volume) {
    if (volume <= 0.0) {
        double lo = std::numeric_limits<double>::infinity();
        for (double f : floors) lo = std::min(lo, f);
        return lo;
    }
    double capacity = 0.0;
    for (double f : floors) capacity += std::max(0.0, ceil - f);
    if (volume > capacity + 1e-12 * (1.0 + capacity))
        return std::numeric_limits<double>::infinity();

    // Fill between sorted floor breakpoints; within a band the poured volume
    // is linear in the level.
    std::vector<double> sorted(floors);
    std::sort(sorted.begin(), sorted.end());
    double poured = 0.0;
    for (std::size_t j = 0; j + 1 < sorted.size(); ++j) {
        const double lo = sorted[j], hi = std::min(sorted[j + 1], ceil);
        if (hi <= lo) continue;
        const double width = static_cast<double>(j + 1);
        const double band = width * (hi - lo);
        if (poured + band >= volume) return lo + (volume - poured) / width;
        poured += band;
    }
    const double lo = std::min(sorted.back(), ceil);
    const double width = static_cast<double>(sorted.size());
    return lo + (volume - poured) / width;
}

std::vector<double> water_fill_plan(const std::vector<double>& floors, double ceil,
                                    double volume) {
    std::vector<double> plan(floors.size(), 0.0);
    const double level = water_fill_level(floors, ceil, volume);
    for (std::size_t j = 0; j < floors.size(); ++j) {
        const double cap = std::max(0.0, ceil - floors[j]);
        plan[j] = std::isinf(level) ? cap : std::clamp(level - floors[j], 0.0, cap);
    }
    return plan;
}

FinishPlan estimate_finish(const std::vector<EvRecord>& evs, const FinishForecast& fc,
                           const TimeGrid& grid, int from_slot) {
    FinishPlan plan;
    plan.from_slot = from_slot;
    plan.horizon_end = from_slot;

    struct Pending {
        int id;
        int deadline;
        double rem_kwh;
        double rate_cap_kwh;
    };
    std::vector<Pending> pending;
    for (const EvRecord& ev : evs) {
        if (ev.fully_charged()) {
            plan.finish[ev.id] = from_slot;
        } else {
            pending.push_back({ev.id, ev.deadline_slot, ev.remaining_demand_kwh(),
                               ev.max_rate_kw * grid.slot_hours});
        }
    }
    if (pending.empty()) return plan;

    int horizon_end = grid.slot_count - 1;
    for (const Pending& ev : pending) horizon_end = std::min(horizon_end, ev.deadline);
    horizon_end = std::max(horizon_end, from_slot);
    plan.horizon_end = horizon_end;

    const int n = horizon_end - from_slot + 1;
    const double slot_e = grid.slot_hours;

    std::vector<double> renewable(n, 0.0);
    double renewable_total = 0.0;
    for (int s = 0; s < n; ++s) {
        renewable[s] = (*fc.station_renewable_kwh)[from_slot + s];
        renewable_total += renewable[s];
    }

    double grid_demand = 0.0;
    for (const Pending& ev : pending) grid_demand += ev.rem_kwh / fc.eps_c;
    const double net = std::max(0.0, grid_demand - renewable_total);

    std::vector<double> floors(n);
    for (int s = 0; s < n; ++s) floors[s] = (*fc.base_load_kw)[from_slot + s] * slot_e;
    plan.grid_plan_kwh = water_fill_plan(floors, fc.peak_kw * slot_e, net);

    plan.budget_kwh.resize(n);
    for (int s = 0; s < n; ++s) plan.budget_kwh[s] = plan.grid_plan_kwh[s] + renewable[s];

    // Replay EDF under the planned budgets.
    std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
        if (a.deadline != b.deadline) return a.deadline < b.deadline;
        if (a.rem_kwh != b.rem_kwh) return a.rem_kwh > b.rem_kwh;
        return a.id < b.id;
    });
    for (int s = 0; s < n; ++s) {
        double left = plan.budget_kwh[s];
        for (Pending& ev : pending) {
            if (ev.rem_kwh <= 1e-12 || left <= 0.0) continue;
            const double grant = std::min({ev.rate_cap_kwh, ev.rem_kwh / fc.eps_c, left});
            ev.rem_kwh -= fc.eps_c * grant;
            left -= grant;
            if (ev.rem_kwh <= 1e-9) {
                ev.rem_kwh = 0.0;
                plan.finish[ev.id] = from_slot + s;
            }
        }
    }
    for (const Pending& ev : pending)
        if (ev.rem_kwh > 0.0) plan.finish[ev.id] = ev.deadline;
    return plan;
}

} // namespace evc
