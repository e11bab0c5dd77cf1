#include "evcharge/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "evcharge/cost_game.hpp"
#include "evcharge/deadline_game.hpp"
#include "evcharge/dispatch.hpp"
#include "evcharge/errors.hpp"
#include "evcharge/queues.hpp"
#include "evcharge/solver.hpp"

namespace evc::engine {

namespace {

struct EvRuntime {
    EvRecord ev;
    double initial_soc = 0.0;
    double demand_kwh = 0.0;    // battery side, at arrival
    double delivered_kwh = 0.0; // battery side
    int actual_finish = -1;     // slot the target was reached, -1 while charging
    bool departed = false;
};

std::string dump_state(int slot, const std::vector<StationState>& stations) {
    std::ostringstream os;
    os << "{\"slot\":" << slot << ",\"stations\":[";
    for (std::size_t i = 0; i < stations.size(); ++i) {
        if (i) os << ",";
        os << "{\"q\":" << stations[i].q_queue << ",\"z\":" << stations[i].z_queue
           << ",\"v_charg\":" << stations[i].v_charg << "}";
    }
    os << "]}";
    return os.str();
}

void check(bool ok, const char* what, int slot, const std::vector<StationState>& stations) {
    if (!ok) throw engine_fault(std::string("internal invariant failed: ") + what,
                                dump_state(slot, stations));
}

} // namespace

RunResult run(const ScenarioConfig& cfg, const SeriesBundle& series,
              std::vector<EvRecord> fleet, const RunOptions& opts) {
    cfg.validate();
    const TimeGrid grid = cfg.grid();
    const GridSignals signals = to_signals(series, cfg);
    const SeriesBundle forecast = make_forecast(series, cfg);
    const double slot_e = grid.slot_hours;
    const double eps = cfg.charging_efficiency;
    const int last = grid.slot_count - 1;
    const ActionSpace actions = ActionSpace::symmetric(cfg.k_actions);

    std::vector<StationState> stations(cfg.n_stations);
    for (int m = 0; m < cfg.n_stations; ++m) {
        stations[m].id = m;
        stations[m].eta = cfg.eta;
        stations[m].v_charg = cfg.v_charg_init;
        stations[m].solar_capacity_kw = cfg.solar_capacity_kw;
        stations[m].wind_capacity_kw = cfg.wind_capacity_kw;
        stations[m].lambda_max_kwh = cfg.battery_capacity_kwh;
    }

    std::map<int, EvRuntime> evs;
    std::vector<std::vector<int>> arrivals(grid.slot_count);
    for (EvRecord& ev : fleet) {
        if (!grid.valid_slot(ev.arrival_slot) || !grid.valid_slot(ev.deadline_slot) ||
            ev.arrival_slot >= ev.deadline_slot)
            throw model_error("fleet EV " + std::to_string(ev.id) + " has a bad time window");
        if (ev.station < 0 || ev.station >= cfg.n_stations)
            throw model_error("fleet EV " + std::to_string(ev.id) + " has a bad station");
        ev.original_deadline_slot = ev.deadline_slot;
        arrivals[ev.arrival_slot].push_back(ev.id);
        EvRuntime rt;
        rt.ev = ev;
        rt.initial_soc = ev.soc;
        rt.demand_kwh = ev.remaining_demand_kwh();
        evs.emplace(ev.id, rt);
    }

    // Forecast renewable energy pooled over stations, used by the finish
    // estimate (it plans one aggregate profile).
    std::vector<double> forecast_renewable_kwh(grid.slot_count, 0.0);
    for (int t = 0; t < grid.slot_count; ++t)
        for (const StationState& st : stations)
            forecast_renewable_kwh[t] +=
                (st.solar_capacity_kw * forecast.solar_per_unit[t] +
                 st.wind_capacity_kw * forecast.wind_per_unit[t]) *
                slot_e;

    RunResult result;
    result.algorithm = opts.deadline_game ? "proposed" : "edf";
    result.seed = cfg.rng_seed;
    result.slots.reserve(grid.slot_count);

    std::map<int, EvOutcome> outcomes;

    for (int t = 0; t < grid.slot_count; ++t) {
        SlotDecision sd;
        sd.slot = t;
        sd.price_per_kwh = signals.price_per_kwh[t];
        sd.base_load_kw = signals.base_load_kw[t];

        const double headroom_kwh = (signals.peak_kw - signals.base_load_kw[t]) * slot_e;

        // Purchase decision across stations.
        std::vector<PurchaseInputs> inputs(stations.size());
        for (std::size_t m = 0; m < stations.size(); ++m) {
            const StationState& st = stations[m];
            double deliverable = 0.0;
            for (int id : st.roster) {
                const EvRecord& ev = evs.at(id).ev;
                if (!ev.fully_charged())
                    deliverable += std::min(ev.max_rate_kw * slot_e,
                                            ev.remaining_demand_kwh() / eps);
            }
            inputs[m].q_queue = st.q_queue;
            inputs[m].z_queue = st.z_queue;
            inputs[m].eta = st.eta;
            inputs[m].v_charg = st.v_charg;
            inputs[m].lambda_max_kwh = st.lambda_max_kwh;
            inputs[m].service_cap_kwh = std::min(deliverable, st.q_queue);
            inputs[m].renewable_kwh = signals.renewable_kw(st, t) * slot_e;
        }
        PurchaseDecision purchase;
        try {
            purchase = decide_purchases(inputs, sd.price_per_kwh, eps, headroom_kwh);
        } catch (engine_fault& f) {
            f.state_dump += "\n" + dump_state(t, stations);
            throw;
        }

        sd.purchases_kwh = purchase.purchases_kwh;
        sd.renewable_used_kwh = purchase.usable_renewable_kwh;
        sd.totals_kwh = purchase.totals_kwh;
        sd.curtailed_kwh.resize(stations.size());
        sd.objective = purchase.objective;
        sd.peak_multiplier = purchase.multiplier;
        sd.peak_binding = purchase.peak_binding;
        double purchase_sum = 0.0;
        for (std::size_t m = 0; m < stations.size(); ++m) {
            sd.curtailed_kwh[m] = inputs[m].renewable_kwh - purchase.usable_renewable_kwh[m];
            purchase_sum += purchase.purchases_kwh[m];
            check(purchase.purchases_kwh[m] >= -1e-9, "negative purchase", t, stations);
        }
        check(signals.base_load_kw[t] + purchase_sum / slot_e <= signals.peak_kw + 1e-6,
              "peak cap violated", t, stations);
        sd.cost = sd.price_per_kwh * purchase_sum;

        // Queue service (arrivals join at the end of the slot).
        std::vector<StationDriftRow> drift_rows(stations.size());
        std::vector<double> q_served(stations.size());
        for (std::size_t m = 0; m < stations.size(); ++m) {
            StationDriftRow& row = drift_rows[m];
            row.slot = t;
            row.station = static_cast<int>(m);
            row.q_before = stations[m].q_queue;
            row.z_before = stations[m].z_queue;
            row.y_kwh = purchase.totals_kwh[m];
            q_served[m] = std::max(stations[m].q_queue - eps * purchase.totals_kwh[m], 0.0);
            stations[m].z_queue = update_z(stations[m].z_queue, stations[m].q_queue,
                                           purchase.totals_kwh[m], stations[m].eta, eps);
        }

        // EDF dispatch of each station's energy.
        for (std::size_t m = 0; m < stations.size(); ++m) {
            StationState& st = stations[m];
            std::vector<const EvRecord*> roster;
            for (int id : st.roster) roster.push_back(&evs.at(id).ev);
            const auto shares = edf_allocate(roster, purchase.totals_kwh[m], eps, slot_e);
            double placed = 0.0;
            for (const EdfShare& share : shares) {
                EvRuntime& rt = evs.at(share.ev_id);
                const double unused = apply_charge(rt.ev, share.grid_kwh, eps);
                const double used = share.grid_kwh - unused;
                placed += used;
                rt.delivered_kwh += eps * used;
                sd.ev_rates_kw[share.ev_id] = used / slot_e;
                check(used / slot_e <= rt.ev.max_rate_kw + 1e-9, "rate cap violated", t, stations);
                if (rt.ev.fully_charged() && rt.actual_finish < 0) rt.actual_finish = t;
            }
            sd.unused_kwh += purchase.totals_kwh[m] - placed;
        }

        // Finish estimates for the EVs still owed energy.
        std::vector<EvRecord> pending;
        for (const StationState& st : stations)
            for (int id : st.roster) {
                const EvRecord& ev = evs.at(id).ev;
                if (!ev.fully_charged()) pending.push_back(ev);
            }
        if (!pending.empty() && t + 1 <= last) {
            FinishForecast fc;
            fc.base_load_kw = &forecast.base_load_kw;
            fc.station_renewable_kwh = &forecast_renewable_kwh;
            fc.peak_kw = signals.peak_kw;
            fc.eps_c = eps;
            const FinishPlan plan = estimate_finish(pending, fc, grid, t + 1);
            for (const EvRecord& p : pending) {
                EvRuntime& rt = evs.at(p.id);
                // An EV already at its deadline slot still gets a future
                // estimate; the menu decides whether it stays.
                const int hi = std::max(rt.ev.deadline_slot, t + 1);
                const int f = std::clamp(plan.finish.at(p.id), t + 1, hi);
                rt.ev.finish_estimate_slot = f;
                sd.finish_estimates[p.id] = f;
            }
        }

        // Deadline game for every present, unfinished EV.
        if (opts.deadline_game && t + 1 <= last) {
            for (StationState& st : stations) {
                for (int id : st.roster) {
                    EvRuntime& rt = evs.at(id);
                    if (rt.ev.fully_charged() || !rt.ev.finish_estimate_slot) continue;
                    const std::vector<int> cands =
                        actions.future_candidates(rt.ev.original_deadline_slot, t, last);
                    if (cands.empty()) continue; // the whole menu is behind this EV
                    const QpProblem qp = assemble_deadline_problem(rt.ev, cands);
                    const QpSolution sol = solve_simplex(qp);
                    MixedStrategy strategy{sol.x};
                    const int chosen = choose_deadline(strategy, cands);
                    rt.ev.deadline_slot = chosen;
                    sd.deadline_choices[id] = chosen;
                    sd.strategies[id] = sol.x;

                    const double f = static_cast<double>(*rt.ev.finish_estimate_slot);
                    const double mean_dl = strategy.mean_deadline(cands);
                    EvDriftRow row;
                    row.slot = t;
                    row.ev = id;
                    row.b_before = rt.ev.b_queue;
                    row.gap_slots = mean_dl - f;
                    row.bound_b = drift_bound_b(rt.ev.b_queue, mean_dl, f);
                    row.applicable = row.gap_slots >= 0.0;
                    const double raw = rt.ev.b_queue +
                                       (rt.ev.target_soc - rt.ev.soc) * row.gap_slots;
                    row.clamped = raw < 0.0 || raw > rt.ev.b_max;
                    rt.ev.b_queue = update_b(rt.ev.b_queue, rt.ev.soc, rt.ev.target_soc,
                                             mean_dl, f, rt.ev.b_max);
                    row.b_after = rt.ev.b_queue;
                    sd.audit.evs.push_back(row);
                    sd.b_after[id] = rt.ev.b_queue;
                }
            }
        }

        // Departures: an EV leaves at the end of its (possibly shifted)
        // deadline slot; whatever it is still owed is recorded and taken out
        // of the queue.
        for (StationState& st : stations) {
            auto it = st.roster.begin();
            while (it != st.roster.end()) {
                EvRuntime& rt = evs.at(*it);
                if (rt.ev.deadline_slot > t) {
                    ++it;
                    continue;
                }
                const double rem = rt.ev.remaining_demand_kwh();
                EvOutcome out;
                out.id = rt.ev.id;
                out.station = rt.ev.station;
                out.arrival_slot = rt.ev.arrival_slot;
                out.finish_slot = rt.actual_finish >= 0 ? rt.actual_finish : rt.ev.deadline_slot;
                out.original_deadline_slot = rt.ev.original_deadline_slot;
                out.final_deadline_slot = rt.ev.deadline_slot;
                out.capacity_kwh = rt.ev.capacity_kwh;
                out.initial_soc = rt.initial_soc;
                out.final_soc = rt.ev.soc;
                out.demand_kwh = rt.demand_kwh;
                out.delivered_kwh = rt.delivered_kwh;
                out.unmet_kwh = rem;
                out.qos = qos(out.arrival_slot, out.finish_slot, out.final_deadline_slot, grid);
                outcomes.emplace(out.id, out);
                rt.departed = true;
                q_served[st.id] = std::max(0.0, q_served[st.id] - rem);
                it = st.roster.erase(it);
            }
        }

        // Admit the EVs that arrived during this slot.
        std::vector<double> lambda(stations.size(), 0.0);
        for (int id : arrivals[t]) {
            EvRuntime& rt = evs.at(id);
            StationState& st = stations[rt.ev.station];
            st.roster.push_back(id);
            lambda[st.id] += rt.ev.remaining_demand_kwh();
        }
        for (std::size_t m = 0; m < stations.size(); ++m) {
            StationState& st = stations[m];
            st.lambda_max_kwh = std::max(st.lambda_max_kwh, lambda[m]);
            st.q_queue = q_served[m] + lambda[m];
            StationDriftRow& row = drift_rows[m];
            row.lambda_kwh = lambda[m];
            row.lambda_max_kwh = st.lambda_max_kwh;
            row.q_after = st.q_queue;
            row.z_after = st.z_queue;
            row.bound_q = drift_bound_q(row.q_before, row.y_kwh, st.lambda_max_kwh, eps);
            row.bound_z = drift_bound_z(row.z_before, row.q_before, row.y_kwh, st.eta, eps);
            sd.audit.stations.push_back(row);
            check(st.q_queue >= 0.0 && st.z_queue >= 0.0, "negative queue", t, stations);

            // The queue must keep tracking the roster's remaining demand.
            double roster_rem = 0.0;
            for (int id : st.roster) roster_rem += evs.at(id).ev.remaining_demand_kwh();
            check(std::abs(roster_rem - st.q_queue) <= 1e-6 * (1.0 + roster_rem),
                  "queue diverged from roster demand", t, stations);
        }

        // Trade-off adaptation from this slot's deadline shifts.
        for (StationState& st : stations) {
            double shift = 0.0;
            for (int id : st.roster) {
                const EvRecord& ev = evs.at(id).ev;
                shift += static_cast<double>(ev.deadline_slot - ev.original_deadline_slot);
            }
            st.v_charg = update_tradeoff_weight(st.v_charg, shift, cfg.alpha);
        }

        sd.q_after.resize(stations.size());
        sd.z_after.resize(stations.size());
        for (std::size_t m = 0; m < stations.size(); ++m) {
            sd.q_after[m] = stations[m].q_queue;
            sd.z_after[m] = stations[m].z_queue;
        }
        result.slots.push_back(std::move(sd));
    }

    // All deadlines live on the grid, so everything must have departed.
    for (const auto& [id, rt] : evs)
        check(rt.departed, "EV still present after the horizon", grid.slot_count - 1, stations);

    for (auto& [id, out] : outcomes) {
        (void)id;
        result.evs.push_back(out);
    }
    std::sort(result.evs.begin(), result.evs.end(),
              [](const EvOutcome& a, const EvOutcome& b) { return a.id < b.id; });
    result.finalize_totals();
    return result;
}

} // namespace evc::engine
