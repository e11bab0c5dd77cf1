#include "evcharge/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "evcharge/engine.hpp"
#include "evcharge/errors.hpp"
#include "evcharge/solver.hpp"

namespace evc::baselines {

namespace {

struct EvSim {
    EvRecord ev;
    double initial_soc = 0.0;
    double demand_kwh = 0.0;
    double delivered_kwh = 0.0;
    int actual_finish = -1;
};

EvOutcome close_out(const EvSim& rt, const TimeGrid& grid, int fallback_finish) {
    EvOutcome out;
    out.id = rt.ev.id;
    out.station = rt.ev.station;
    out.arrival_slot = rt.ev.arrival_slot;
    out.finish_slot = rt.actual_finish >= 0 ? rt.actual_finish : fallback_finish;
    out.original_deadline_slot = rt.ev.original_deadline_slot;
    out.final_deadline_slot = rt.ev.deadline_slot;
    out.capacity_kwh = rt.ev.capacity_kwh;
    out.initial_soc = rt.initial_soc;
    out.final_soc = rt.ev.soc;
    out.demand_kwh = rt.demand_kwh;
    out.delivered_kwh = rt.delivered_kwh;
    out.unmet_kwh = rt.ev.remaining_demand_kwh();
    out.qos = qos(out.arrival_slot, out.finish_slot, out.final_deadline_slot, grid);
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// OCCMA
// ---------------------------------------------------------------------------

RunResult occma(const ScenarioConfig& cfg, const SeriesBundle& series,
                const std::vector<EvRecord>& fleet) {
    cfg.validate();
    const TimeGrid grid = cfg.grid();
    const GridSignals signals = to_signals(series, cfg);
    const double slot_e = grid.slot_hours;
    const double eps = cfg.charging_efficiency;
    const int n_slots = grid.slot_count;
    const int m_st = cfg.n_stations;

    // Variable layout: one rate variable per (EV, slot in window), one
    // purchase variable per (station, slot) that can see charging, one slack
    // per EV for infeasible instances.
    struct GVar {
        int ev_idx;
        int slot;
    };
    std::vector<GVar> gvars;
    std::vector<std::vector<int>> gvar_of_ev(fleet.size());
    std::map<std::pair<int, int>, std::vector<int>> gvars_at; // (station, slot) -> gvar ids
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const EvRecord& ev = fleet[i];
        for (int t = ev.arrival_slot; t <= ev.deadline_slot; ++t) {
            gvar_of_ev[i].push_back(static_cast<int>(gvars.size()));
            gvars_at[{ev.station, t}].push_back(static_cast<int>(gvars.size()));
            gvars.push_back({static_cast<int>(i), t});
        }
    }
    std::map<std::pair<int, int>, int> xvar; // (station, slot) -> variable id
    int nv = static_cast<int>(gvars.size());
    for (const auto& [key, ids] : gvars_at) {
        (void)ids;
        xvar[key] = nv++;
    }
    std::vector<int> svar(fleet.size());
    for (std::size_t i = 0; i < fleet.size(); ++i) svar[i] = nv++;

    double max_price = 0.0;
    for (double k : signals.price_per_kwh) max_price = std::max(max_price, k);
    const double shortfall_penalty = 1000.0 * (max_price + 1.0);

    QpProblem p;
    p.variant = QpVariant::general;
    p.hessian_diag.assign(nv, 0.0); // ridge supplied by the solver
    p.linear.assign(nv, 0.0);
    p.lower.assign(nv, 0.0);
    p.upper.assign(nv, 0.0);
    for (std::size_t g = 0; g < gvars.size(); ++g)
        p.upper[g] = fleet[gvars[g].ev_idx].max_rate_kw * slot_e;
    for (const auto& [key, var] : xvar) {
        const double headroom = (signals.peak_kw - signals.base_load_kw[key.second]) * slot_e;
        if (headroom < 0.0) throw model_error("base load exceeds the peak cap");
        p.upper[var] = headroom;
        p.linear[var] = signals.price_per_kwh[key.second];
    }
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        p.upper[svar[i]] = std::max(0.0, fleet[i].remaining_demand_kwh());
        p.linear[svar[i]] = shortfall_penalty;
    }

    // Demand: eps * sum(g) + slack = demand.
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        LinearConstraint row;
        row.rel = LinearConstraint::Rel::eq;
        row.rhs = fleet[i].remaining_demand_kwh();
        for (int g : gvar_of_ev[i]) row.terms.push_back({g, eps});
        row.terms.push_back({svar[i], 1.0});
        p.constraints.push_back(std::move(row));
    }
    // Renewable-first supply: sum(g at station/slot) - x <= renewable.
    std::vector<StationState> stations(m_st);
    for (int m = 0; m < m_st; ++m) {
        stations[m].id = m;
        stations[m].solar_capacity_kw = cfg.solar_capacity_kw;
        stations[m].wind_capacity_kw = cfg.wind_capacity_kw;
    }
    for (const auto& [key, ids] : gvars_at) {
        LinearConstraint row;
        row.rel = LinearConstraint::Rel::le;
        row.rhs = signals.renewable_kw(stations[key.first], key.second) * slot_e;
        for (int g : ids) row.terms.push_back({g, 1.0});
        row.terms.push_back({xvar.at(key), -1.0});
        p.constraints.push_back(std::move(row));
    }
    // Shared peak headroom per slot over the purchase variables.
    {
        std::vector<std::vector<int>> x_by_slot(n_slots);
        for (const auto& [key, var] : xvar) x_by_slot[key.second].push_back(var);
        for (int t = 0; t < n_slots; ++t) {
            if (x_by_slot[t].empty()) continue;
            LinearConstraint row;
            row.rel = LinearConstraint::Rel::le;
            row.rhs = (signals.peak_kw - signals.base_load_kw[t]) * slot_e;
            for (int var : x_by_slot[t]) row.terms.push_back({var, 1.0});
            p.constraints.push_back(std::move(row));
        }
    }

    QpSolution sol = solve_general(p);
    if (sol.status == QpStatus::infeasible)
        throw engine_fault("offline schedule infeasible", p.debug_dump());

    // Replay through the standard per-slot accounting.
    RunResult result;
    result.algorithm = "occma";
    result.seed = cfg.rng_seed;
    std::vector<EvSim> sims;
    sims.reserve(fleet.size());
    for (const EvRecord& ev : fleet) {
        EvSim s;
        s.ev = ev;
        s.ev.original_deadline_slot = ev.deadline_slot;
        s.initial_soc = ev.soc;
        s.demand_kwh = ev.remaining_demand_kwh();
        sims.push_back(s);
    }

    for (int t = 0; t < n_slots; ++t) {
        SlotDecision sd;
        sd.slot = t;
        sd.price_per_kwh = signals.price_per_kwh[t];
        sd.base_load_kw = signals.base_load_kw[t];
        sd.purchases_kwh.assign(m_st, 0.0);
        sd.renewable_used_kwh.assign(m_st, 0.0);
        sd.curtailed_kwh.assign(m_st, 0.0);
        sd.totals_kwh.assign(m_st, 0.0);
        sd.q_after.assign(m_st, 0.0);
        sd.z_after.assign(m_st, 0.0);
        std::vector<double> station_charge(m_st, 0.0);
        for (std::size_t g = 0; g < gvars.size(); ++g) {
            if (gvars[g].slot != t) continue;
            const double grant = std::max(0.0, sol.x[g]);
            if (grant <= 1e-12) continue;
            EvSim& rt = sims[gvars[g].ev_idx];
            const double before = rt.ev.soc;
            rt.ev.soc = std::min(rt.ev.target_soc, rt.ev.soc + eps * grant / rt.ev.capacity_kwh);
            const double used_battery = (rt.ev.soc - before) * rt.ev.capacity_kwh;
            rt.delivered_kwh += used_battery;
            station_charge[rt.ev.station] += used_battery / eps;
            sd.ev_rates_kw[rt.ev.id] += used_battery / eps / slot_e;
            // Finish is the last slot that actually moves the battery.
            if (used_battery > 1e-9) rt.actual_finish = t;
        }
        for (int m = 0; m < m_st; ++m) {
            const double renewable = signals.renewable_kw(stations[m], t) * slot_e;
            const double used_r = std::min(renewable, station_charge[m]);
            sd.renewable_used_kwh[m] = used_r;
            sd.curtailed_kwh[m] = renewable - used_r;
            sd.purchases_kwh[m] = std::max(0.0, station_charge[m] - used_r);
            sd.totals_kwh[m] = station_charge[m];
            sd.cost += sd.price_per_kwh * sd.purchases_kwh[m];
        }
        result.slots.push_back(std::move(sd));
    }
    for (EvSim& rt : sims)
        result.evs.push_back(close_out(rt, grid, rt.ev.deadline_slot));
    std::sort(result.evs.begin(), result.evs.end(),
              [](const EvOutcome& a, const EvOutcome& b) { return a.id < b.id; });
    result.finalize_totals();
    return result;
}

// ---------------------------------------------------------------------------
// OCSA-F / OCSA-N
// ---------------------------------------------------------------------------

RunResult ocsa(const ScenarioConfig& cfg, const SeriesBundle& series,
               const std::vector<EvRecord>& fleet, OcsaVariant variant,
               const std::vector<double>* price_forecast) {
    cfg.validate();
    const TimeGrid grid = cfg.grid();
    const GridSignals signals = to_signals(series, cfg);
    const double slot_e = grid.slot_hours;
    const double eps = cfg.charging_efficiency;
    const int last = grid.slot_count - 1;

    std::vector<double> fprice;
    if (variant == OcsaVariant::with_price_forecast) {
        if (price_forecast)
            fprice = *price_forecast;
        else
            fprice = make_forecast(series, cfg).price_per_kwh;
    }

    std::vector<StationState> stations(cfg.n_stations);
    for (int m = 0; m < cfg.n_stations; ++m) {
        stations[m].id = m;
        stations[m].solar_capacity_kw = cfg.solar_capacity_kw;
        stations[m].wind_capacity_kw = cfg.wind_capacity_kw;
    }

    std::map<int, EvSim> sims;
    std::vector<std::vector<int>> arrivals(grid.slot_count);
    for (const EvRecord& ev : fleet) {
        EvSim s;
        s.ev = ev;
        s.ev.original_deadline_slot = ev.deadline_slot;
        s.initial_soc = ev.soc;
        s.demand_kwh = ev.remaining_demand_kwh();
        sims.emplace(ev.id, s);
        arrivals[ev.arrival_slot].push_back(ev.id);
    }

    RunResult result;
    result.algorithm = variant == OcsaVariant::with_price_forecast ? "ocsa_f" : "ocsa_n";
    result.seed = cfg.rng_seed;

    std::vector<int> present;
    std::map<int, EvOutcome> outcomes;

    for (int t = 0; t <= last; ++t) {
        SlotDecision sd;
        sd.slot = t;
        sd.price_per_kwh = signals.price_per_kwh[t];
        sd.base_load_kw = signals.base_load_kw[t];
        sd.purchases_kwh.assign(cfg.n_stations, 0.0);
        sd.renewable_used_kwh.assign(cfg.n_stations, 0.0);
        sd.curtailed_kwh.assign(cfg.n_stations, 0.0);
        sd.totals_kwh.assign(cfg.n_stations, 0.0);
        sd.q_after.assign(cfg.n_stations, 0.0);
        sd.z_after.assign(cfg.n_stations, 0.0);

        double grid_pool = (signals.peak_kw - signals.base_load_kw[t]) * slot_e;
        if (grid_pool < 0.0) throw model_error("base load exceeds the peak cap");
        std::vector<double> renewable_pool(cfg.n_stations);
        for (int m = 0; m < cfg.n_stations; ++m)
            renewable_pool[m] = signals.renewable_kw(stations[m], t) * slot_e;

        struct Want {
            int id;
            double urgency;
            double amount_kwh;
        };
        std::vector<Want> wants;
        for (int id : present) {
            EvSim& rt = sims.at(id);
            const double rem = rt.ev.remaining_demand_kwh();
            if (rem <= 1e-12) continue;
            const int slots_left = rt.ev.deadline_slot - t + 1;
            const double cap = rt.ev.max_rate_kw * slot_e;
            const double want_full = std::min(cap, rem / eps);
            bool charge_now = true;
            if (variant == OcsaVariant::with_price_forecast) {
                double mean_fc = 0.0;
                for (int s = t; s <= rt.ev.deadline_slot; ++s) mean_fc += fprice[s];
                mean_fc /= static_cast<double>(slots_left);
                const bool must_run =
                    rem / eps > static_cast<double>(slots_left - 1) * cap + 1e-12;
                charge_now = signals.price_per_kwh[t] <= mean_fc + 1e-12 || must_run;
            }
            if (charge_now)
                wants.push_back({id, rem / static_cast<double>(slots_left), want_full});
        }
        std::sort(wants.begin(), wants.end(), [](const Want& a, const Want& b) {
            if (a.urgency != b.urgency) return a.urgency > b.urgency;
            return a.id < b.id;
        });

        for (const Want& w : wants) {
            EvSim& rt = sims.at(w.id);
            const int m = rt.ev.station;
            double granted = 0.0;
            const double from_r = std::min(w.amount_kwh, renewable_pool[m]);
            renewable_pool[m] -= from_r;
            granted += from_r;
            const double from_grid = std::min(w.amount_kwh - granted, grid_pool);
            grid_pool -= from_grid;
            granted += from_grid;
            if (granted <= 0.0) continue;
            rt.ev.soc = std::min(rt.ev.target_soc, rt.ev.soc + eps * granted / rt.ev.capacity_kwh);
            rt.delivered_kwh += eps * granted;
            sd.ev_rates_kw[w.id] = granted / slot_e;
            sd.renewable_used_kwh[m] += from_r;
            sd.purchases_kwh[m] += from_grid;
            sd.totals_kwh[m] += granted;
            if (rt.ev.fully_charged() && rt.actual_finish < 0) rt.actual_finish = t;
        }
        for (int m = 0; m < cfg.n_stations; ++m) {
            sd.curtailed_kwh[m] = renewable_pool[m];
            sd.cost += sd.price_per_kwh * sd.purchases_kwh[m];
        }

        // Departures at the (original) deadline, then the slot's arrivals.
        present.erase(std::remove_if(present.begin(), present.end(),
                                     [&](int id) {
                                         EvSim& rt = sims.at(id);
                                         if (rt.ev.deadline_slot > t) return false;
                                         outcomes.emplace(
                                             id, close_out(rt, grid, rt.ev.deadline_slot));
                                         return true;
                                     }),
                      present.end());
        for (int id : arrivals[t]) present.push_back(id);
        result.slots.push_back(std::move(sd));
    }

    for (auto& [id, out] : outcomes) {
        (void)id;
        result.evs.push_back(out);
    }
    std::sort(result.evs.begin(), result.evs.end(),
              [](const EvOutcome& a, const EvOutcome& b) { return a.id < b.id; });
    result.finalize_totals();
    return result;
}

RunResult edf_only(const ScenarioConfig& cfg, const SeriesBundle& series,
                   const std::vector<EvRecord>& fleet) {
    engine::RunOptions opts;
    opts.deadline_game = false;
    return engine::run(cfg, series, fleet, opts);
}

} // namespace evc::baselines
