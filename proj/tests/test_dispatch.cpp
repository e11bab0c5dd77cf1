#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "evcharge/dispatch.hpp"
#include "evcharge/rng.hpp"

using namespace evc;

namespace {

const TimeGrid kGrid{96, 0.25, 0.0};

EvRecord make_ev(int id, int deadline, double soc, double cap = 40.0, double rate = 6.6) {
    EvRecord ev;
    ev.id = id;
    ev.deadline_slot = deadline;
    ev.original_deadline_slot = deadline;
    ev.soc = soc;
    ev.capacity_kwh = cap;
    ev.max_rate_kw = rate;
    return ev;
}

// Reference greedy: re-sorts and hands out the same three-way min. Kept
// deliberately separate from the implementation it checks.
std::map<int, double> reference_edf(std::vector<EvRecord> evs, double budget, double eps,
                                    double slot_h) {
    std::sort(evs.begin(), evs.end(), [](const EvRecord& a, const EvRecord& b) {
        if (a.deadline_slot != b.deadline_slot) return a.deadline_slot < b.deadline_slot;
        const double ra = a.remaining_demand_kwh(), rb = b.remaining_demand_kwh();
        if (ra != rb) return ra > rb;
        return a.id < b.id;
    });
    std::map<int, double> out;
    for (const EvRecord& ev : evs) {
        const double g =
            std::min({ev.max_rate_kw * slot_h, ev.remaining_demand_kwh() / eps, budget});
        if (g > 0.0) out[ev.id] = g;
        budget -= g;
    }
    return out;
}

} // namespace

TEST_CASE("edf_allocate: zero budget means zero rates") {
    const EvRecord a = make_ev(0, 40, 0.2), b = make_ev(1, 60, 0.3);
    CHECK(edf_allocate({&a, &b}, 0.0, 0.9, 0.25).empty());
}

TEST_CASE("edf_allocate: the earliest deadline takes the whole budget") {
    const EvRecord a = make_ev(0, 60, 0.2), b = make_ev(1, 40, 0.2);
    const double cap = 6.6 * 0.25;
    const auto shares = edf_allocate({&a, &b}, cap, 0.9, 0.25);
    REQUIRE(shares.size() == 1);
    CHECK(shares[0].ev_id == 1);
    CHECK(shares[0].grid_kwh == doctest::Approx(cap));
}

TEST_CASE("edf_allocate matches the reference greedy on random rosters") {
    Rng rng(21);
    for (int inst = 0; inst < 300; ++inst) {
        std::vector<EvRecord> evs;
        for (int i = 0; i < 3; ++i)
            evs.push_back(make_ev(i, 30 + rng.uniform_int(40), rng.uniform(), 40.0,
                                  rng.uniform(3.0, 8.0)));
        const double budget = rng.uniform(0.0, 4.0);
        std::vector<const EvRecord*> ptrs{&evs[0], &evs[1], &evs[2]};
        const auto shares = edf_allocate(ptrs, budget, 0.9, 0.25);
        const auto ref = reference_edf(evs, budget, 0.9, 0.25);
        CHECK(shares.size() == ref.size());
        double total = 0.0;
        for (const EdfShare& s : shares) {
            REQUIRE(ref.count(s.ev_id) == 1);
            CHECK(s.grid_kwh == doctest::Approx(ref.at(s.ev_id)).epsilon(1e-12));
            total += s.grid_kwh;
        }
        // Conservation: everything usable is handed out.
        double absorbable = 0.0;
        for (const EvRecord& ev : evs)
            absorbable += std::min(ev.max_rate_kw * 0.25, ev.remaining_demand_kwh() / 0.9);
        CHECK(total == doctest::Approx(std::min(budget, absorbable)).epsilon(1e-9));
    }
}

TEST_CASE("apply_charge moves soc by the efficiency-scaled energy") {
    EvRecord ev = make_ev(0, 60, 0.5);
    CHECK(apply_charge(ev, 0.0, 0.9) == doctest::Approx(0.0));
    CHECK(ev.soc == doctest::Approx(0.5));
    // 6.6 kW for a quarter hour at 90%: +0.037125 soc.
    CHECK(apply_charge(ev, 1.65, 0.9) == doctest::Approx(0.0));
    CHECK(ev.soc == doctest::Approx(0.537125).epsilon(1e-12));
}

TEST_CASE("apply_charge caps at the target and returns the unusable energy") {
    EvRecord ev = make_ev(0, 60, 0.99);
    // Room for 0.4 kWh battery-side = 4/9 kWh grid-side.
    const double unused = apply_charge(ev, 1.65, 0.9);
    CHECK(ev.soc == doctest::Approx(1.0));
    CHECK(unused == doctest::Approx(1.65 - 0.4 / 0.9).epsilon(1e-12));
    CHECK(unused == doctest::Approx(1.2055555555555555).epsilon(1e-12));
}

TEST_CASE("apply_charge never overshoots and is monotone") {
    Rng rng(22);
    for (int i = 0; i < 1000; ++i) {
        EvRecord ev = make_ev(0, 60, rng.uniform());
        const double before = ev.soc;
        apply_charge(ev, rng.uniform(0.0, 50.0), 0.9);
        CHECK(ev.soc >= before);
        CHECK(ev.soc <= ev.target_soc + 1e-12);
    }
}

TEST_CASE("water_fill_level pours exactly the requested volume") {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const int n = 2 + rng.uniform_int(20);
        std::vector<double> floors(n);
        for (double& f : floors) f = rng.uniform(0.0, 10.0);
        const double ceil = rng.uniform(8.0, 14.0);
        double capacity = 0.0;
        for (double f : floors) capacity += std::max(0.0, ceil - f);
        const double volume = rng.uniform(0.0, 1.0) * capacity;
        const auto plan = water_fill_plan(floors, ceil, volume);
        double poured = 0.0;
        for (int j = 0; j < n; ++j) {
            CHECK(plan[j] >= -1e-12);
            CHECK(plan[j] <= std::max(0.0, ceil - floors[j]) + 1e-9);
            poured += plan[j];
        }
        CHECK(poured == doctest::Approx(volume).epsilon(1e-9));
    }
}

TEST_CASE("water_fill_plan falls back to full headroom when volume cannot fit") {
    const std::vector<double> floors{1.0, 2.0};
    const auto plan = water_fill_plan(floors, 3.0, 10.0);
    CHECK(plan[0] == doctest::Approx(2.0));
    CHECK(plan[1] == doctest::Approx(1.0));
}

namespace {

FinishForecast make_forecast_view(const std::vector<double>& base,
                                  const std::vector<double>& renewables, double peak,
                                  double eps) {
    FinishForecast fc;
    fc.base_load_kw = &base;
    fc.station_renewable_kwh = &renewables;
    fc.peak_kw = peak;
    fc.eps_c = eps;
    return fc;
}

} // namespace

TEST_CASE("estimate_finish: demand for three max-rate slots by a three-slot deadline") {
    // Hand simulation: 3 * 1.65 kWh grid-side spread flat over slots 10..12,
    // the EV charges at its cap each slot and finishes in the third.
    std::vector<double> base(96, 50.0), renew(96, 0.0);
    EvRecord ev = make_ev(7, 12, 0.0, /*cap=*/0.9 * 3 * 1.65, 6.6);
    const FinishPlan plan =
        estimate_finish({ev}, make_forecast_view(base, renew, 500.0, 0.9), kGrid, 10);
    CHECK(plan.horizon_end == 12);
    CHECK(plan.finish.at(7) == 12);
    // Flat aggregate: every planned slot carries the same load.
    for (double b : plan.grid_plan_kwh) CHECK(b == doctest::Approx(1.65).epsilon(1e-9));
}

TEST_CASE("estimate_finish: zero remaining demand estimates at the current slot") {
    std::vector<double> base(96, 50.0), renew(96, 0.0);
    EvRecord ev = make_ev(3, 40, 1.0);
    const FinishPlan plan =
        estimate_finish({ev}, make_forecast_view(base, renew, 500.0, 0.9), kGrid, 20);
    CHECK(plan.finish.at(3) == 20);
}

TEST_CASE("estimate_finish: the earliest deadline bounds the horizon") {
    std::vector<double> base(96, 50.0), renew(96, 0.0);
    EvRecord urgent = make_ev(0, 21, 0.5);
    EvRecord later = make_ev(1, 60, 0.5);
    const FinishPlan plan = estimate_finish({urgent, later},
                                            make_forecast_view(base, renew, 500.0, 0.9),
                                            kGrid, 20);
    CHECK(plan.horizon_end == 21);
    // The urgent EV is served first under EDF.
    CHECK(plan.finish.at(0) <= plan.finish.at(1));
}

TEST_CASE("estimate_finish: flat aggregate profile with constant base load") {
    std::vector<double> base(96, 60.0), renew(96, 0.0);
    std::vector<EvRecord> evs;
    evs.push_back(make_ev(0, 80, 0.4));
    evs.push_back(make_ev(1, 80, 0.7));
    const FinishPlan plan =
        estimate_finish(evs, make_forecast_view(base, renew, 1000.0, 0.9), kGrid, 30);
    REQUIRE(!plan.grid_plan_kwh.empty());
    double lo = plan.grid_plan_kwh[0], hi = plan.grid_plan_kwh[0];
    for (double b : plan.grid_plan_kwh) {
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    CHECK(hi - lo <= 1e-6);
}

TEST_CASE("estimate_finish keeps every estimate inside the EV's window") {
    Rng rng(24);
    std::vector<double> base(96, 70.0), renew(96, 2.0);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<EvRecord> evs;
        const int n = 1 + rng.uniform_int(6);
        for (int i = 0; i < n; ++i)
            evs.push_back(make_ev(i, 40 + rng.uniform_int(50), rng.uniform()));
        const int from = 10 + rng.uniform_int(25);
        const FinishPlan plan =
            estimate_finish(evs, make_forecast_view(base, renew, 120.0, 0.9), kGrid, from);
        for (const EvRecord& ev : evs) {
            const int f = plan.finish.at(ev.id);
            CHECK(f >= from);
            CHECK(f <= std::max(from, ev.deadline_slot));
        }
    }
}
