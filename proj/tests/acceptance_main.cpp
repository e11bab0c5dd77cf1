// Acceptance suite: end-to-end checks of the simulator against its contract.
// Each check prints one [PASS]/[FAIL] line; the exit code is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "evcharge/baselines.hpp"
#include "evcharge/data_io.hpp"
#include "evcharge/deadline_game.hpp"
#include "evcharge/dispatch.hpp"
#include "evcharge/engine.hpp"
#include "evcharge/rng.hpp"

#include "solver_oracles.hpp"

using namespace evc;

namespace {

int g_failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool ok, const std::string& label, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %s (%s; %.2fs)\n", ok ? "PASS" : "FAIL", criterion,
                label.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0u);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * (i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx <= 0 || syy <= 0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ScenarioConfig default_cfg() {
    ScenarioConfig cfg; // the reference scenario: 25 EVs, 2 stations
    return cfg;
}

// ---------------------------------------------------------------------------
// 1. Drift-bound dominance over a full default run.
// ---------------------------------------------------------------------------
void criterion_1() {
    Timer t;
    ScenarioConfig cfg = default_cfg();
    const SeriesBundle series = load_or_synthesize_series(cfg);
    const RunResult r = engine::run(cfg, series, generate_fleet(cfg, cfg.grid()));
    int q_viol = 0, z_viol = 0, b_viol = 0, b_checked = 0, b_skipped = 0;
    for (const SlotDecision& s : r.slots) {
        for (const auto& row : s.audit.stations) {
            if (!row.q_dominated()) ++q_viol;
            if (!row.z_dominated()) ++z_viol;
        }
        for (const auto& row : s.audit.evs) {
            if (!row.applicable) {
                ++b_skipped; // chosen deadline earlier than the finish estimate
                continue;
            }
            ++b_checked;
            if (!row.b_dominated()) ++b_viol;
        }
    }
    const double secs = t.seconds();
    const bool ok =
        q_viol == 0 && z_viol == 0 && b_viol == 0 && b_checked > 0 && secs < 10.0;
    report(1, ok, "drift-bound dominance on the default run",
           "q/z/b violations " + std::to_string(q_viol) + "/" + std::to_string(z_viol) +
               "/" + std::to_string(b_viol) + ", b steps checked " +
               std::to_string(b_checked) + ", outside validity " + std::to_string(b_skipped),
           secs);
}

// ---------------------------------------------------------------------------
// 2. Solver equivalence against brute-force oracles.
// ---------------------------------------------------------------------------
void criterion_2() {
    Timer t;
    Rng rng(42);
    int bad_coord = 0, bad_obj = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 5;
        QpProblem p;
        p.variant = QpVariant::boxed_coupled;
        LinearConstraint c;
        c.rel = LinearConstraint::Rel::le;
        double unc = 0.0, lo_act = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double h = rng.uniform(0.5, 3.0);
            const double lin = rng.uniform(-3.0, 3.0);
            const double lo = rng.uniform(-2.0, 0.5);
            const double hi = lo + rng.uniform(0.5, 3.0);
            const double a = rng.uniform(0.5, 2.0);
            p.hessian_diag.push_back(h);
            p.linear.push_back(lin);
            p.lower.push_back(lo);
            p.upper.push_back(hi);
            c.terms.push_back({static_cast<int>(j), a});
            unc += a * std::clamp(-lin / h, lo, hi);
            lo_act += a * lo;
        }
        c.rhs = lo_act + rng.uniform(0.1, 1.2) * std::max(0.1, unc - lo_act);
        p.constraints.push_back(c);
        const QpSolution s = solve_boxed_coupled(p);
        const std::vector<double> ox = test_oracle::boxed_coupled(p);
        for (std::size_t j = 0; j < n; ++j)
            if (std::abs(s.x[j] - ox[j]) > 1e-3) ++bad_coord;
        if (s.objective > p.objective(ox) + 1e-6 * (1.0 + std::abs(p.objective(ox))))
            ++bad_obj;
    }
    int bad_simplex = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t k = inst < 150 ? 3 + static_cast<std::size_t>(rng.uniform_int(2))
                                         : 5; // mostly 3-4, a tail of 5
        const double f_gap = rng.uniform(0.0, 3.0);
        const double b = rng.uniform(0.0, 20.0);
        const double weight = rng.uniform(0.0, 120.0);
        std::vector<double> r1(k), lin(k);
        for (std::size_t j = 0; j < k; ++j) {
            const double gap = f_gap + static_cast<double>(j);
            r1[j] = std::sqrt(2.0) * gap;
            lin[j] = 2.0 * b * gap + weight * std::exp(-gap);
        }
        const QpProblem p = test_oracle::make_simplex_problem(r1, lin);
        const QpSolution s = solve_simplex(p);
        const double oracle = test_oracle::simplex_objective(p, 100); // 0.01 grid
        if (s.objective > oracle + 1e-6 * (1.0 + std::abs(oracle))) ++bad_simplex;
    }
    const double secs = t.seconds();
    const bool ok = bad_coord == 0 && bad_obj == 0 && bad_simplex == 0 && secs < 60.0;
    report(2, ok, "solver equivalence vs brute-force oracles",
           "coupled coord/obj misses " + std::to_string(bad_coord) + "/" +
               std::to_string(bad_obj) + ", simplex obj misses " +
               std::to_string(bad_simplex),
           secs);
}

// ---------------------------------------------------------------------------
// 3+4. Cost ordering and QoS over ten shared seeds.
// ---------------------------------------------------------------------------
void criteria_3_4() {
    Timer t;
    ScenarioConfig cfg = default_cfg();
    std::vector<unsigned long long> seeds(10);
    std::iota(seeds.begin(), seeds.end(), 1ULL);
    const auto rows = engine::compare(cfg, seeds);

    std::vector<double> norm_proposed, norm_f, norm_n, qos_proposed, qos_n;
    bool any_failed = false;
    for (const auto& r : rows) {
        if (r.failed) {
            any_failed = true;
            continue;
        }
        if (r.algorithm == "proposed") {
            norm_proposed.push_back(r.norm_cost);
            qos_proposed.push_back(r.mean_qos);
        } else if (r.algorithm == "ocsa_f") {
            norm_f.push_back(r.norm_cost);
        } else if (r.algorithm == "ocsa_n") {
            norm_n.push_back(r.norm_cost);
            qos_n.push_back(r.mean_qos);
        }
    }
    const double mp = mean(norm_proposed), mf = mean(norm_f), mn = mean(norm_n);
    const double secs = t.seconds();
    const bool ok3 = !any_failed && 1.0 <= mp + 1e-9 && mp <= mf + 1e-9 && mf <= mn + 1e-9 &&
                     mp <= 1.15 && secs < 300.0;
    report(3, ok3, "cost ordering over 10 seeds",
           "norm cost: occma 1.000 <= proposed " + fmt(mp) + " <= ocsa_f " + fmt(mf) +
               " <= ocsa_n " + fmt(mn) + ", proposed <= 1.15",
           secs);

    const double qp = mean(qos_proposed), qn = mean(qos_n);
    report(4, !any_failed && qp >= qn, "mean QoS of proposed vs ocsa_n",
           "proposed " + fmt(qp) + " >= ocsa_n " + fmt(qn), secs);
}

// ---------------------------------------------------------------------------
// 5. Cost trend across the trade-off weight sweep.
// ---------------------------------------------------------------------------
void criterion_5() {
    Timer t;
    const std::vector<double> v_values{50.0, 350.0, 1000.0, 5000.0};
    std::vector<double> mean_costs;
    ScenarioConfig cfg = default_cfg();
    for (double v : v_values) {
        std::vector<double> costs;
        for (unsigned long long seed = 1; seed <= 10; ++seed) {
            ScenarioConfig cell = cfg;
            cell.v_charg_init = v;
            cell.rng_seed = seed;
            const SeriesBundle series = load_or_synthesize_series(cell);
            costs.push_back(
                engine::run(cell, series, generate_fleet(cell, cell.grid())).total_cost);
        }
        mean_costs.push_back(mean(costs));
    }
    const double rho = spearman(v_values, mean_costs);
    std::string detail = "mean costs";
    for (double c : mean_costs) detail += " " + fmt(c);
    detail += "; spearman " + fmt(rho);
    report(5, rho <= -0.8, "cost is non-increasing in the trade-off weight", detail,
           t.seconds());
}

// ---------------------------------------------------------------------------
// 6. Deadline-game monotonicity at the reference case.
// ---------------------------------------------------------------------------
int argmax_index(const std::vector<double>& w) {
    int best = 0;
    for (std::size_t j = 1; j < w.size(); ++j)
        if (w[j] > w[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    return best;
}

void criterion_6() {
    Timer t;
    const std::vector<int> cands{17, 18, 19, 20, 21};
    auto choice = [&](double soc, double b) {
        EvRecord ev;
        ev.soc = soc;
        ev.target_soc = 1.0;
        ev.b_queue = b;
        ev.v_dead = 250.0;
        ev.finish_estimate_slot = 16;
        return argmax_index(solve_simplex(assemble_deadline_problem(ev, cands)).x);
    };
    bool mono_soc = true, strict_soc = false;
    int prev = choice(0.52, 10.0);
    for (double soc : {0.64, 0.73}) {
        const int cur = choice(soc, 10.0);
        if (cur > prev) mono_soc = false;
        if (cur < prev) strict_soc = true;
        prev = cur;
    }
    bool mono_b = true, strict_b = false;
    prev = choice(0.64, 10.0);
    for (double b : {6.5, 3.5}) {
        const int cur = choice(0.64, b);
        if (cur < prev) mono_b = false;
        if (cur > prev) strict_b = true;
        prev = cur;
    }
    report(6, mono_soc && strict_soc && mono_b && strict_b,
           "deadline choice monotone in soc and waiting pressure",
           std::string("soc path ") + std::to_string(choice(0.52, 10.0)) + "->" +
               std::to_string(choice(0.64, 10.0)) + "->" + std::to_string(choice(0.73, 10.0)) +
               ", b path " + std::to_string(choice(0.64, 10.0)) + "->" +
               std::to_string(choice(0.64, 6.5)) + "->" + std::to_string(choice(0.64, 3.5)),
           t.seconds());
}

// ---------------------------------------------------------------------------
// 7. Flat planned profile for the finish estimate.
// ---------------------------------------------------------------------------
void criterion_7() {
    Timer t;
    const TimeGrid grid{96, 0.25, 0.0};
    std::vector<double> base(96, 60.0), renewables(96, 0.0);
    std::vector<EvRecord> evs;
    for (int i = 0; i < 4; ++i) {
        EvRecord ev;
        ev.id = i;
        ev.soc = 0.2 + 0.15 * i;
        ev.deadline_slot = 80;
        evs.push_back(ev);
    }
    FinishForecast fc;
    fc.base_load_kw = &base;
    fc.station_renewable_kwh = &renewables;
    fc.peak_kw = 1000.0; // no binding caps
    fc.eps_c = 0.9;
    const FinishPlan plan = estimate_finish(evs, fc, grid, 30);
    double lo = plan.grid_plan_kwh.empty() ? 0.0 : plan.grid_plan_kwh[0];
    double hi = lo;
    for (double b : plan.grid_plan_kwh) {
        lo = std::min(lo, b);
        hi = std::max(hi, b);
    }
    report(7, !plan.grid_plan_kwh.empty() && hi - lo <= 1e-6,
           "planned aggregate profile is flat", "max-min " + fmt(hi - lo), t.seconds());
}

// ---------------------------------------------------------------------------
// 8. Queue stability and accounting on the default scenario.
// ---------------------------------------------------------------------------
void criterion_8() {
    Timer t;
    ScenarioConfig cfg = default_cfg();
    const SeriesBundle series = load_or_synthesize_series(cfg);
    const RunResult r = engine::run(cfg, series, generate_fleet(cfg, cfg.grid()));
    const double gap = std::abs(r.terminal_q_sum - r.total_unmet_kwh);
    const double frac =
        r.total_demand_kwh > 0.0 ? r.total_unmet_kwh / r.total_demand_kwh : 0.0;
    report(8, gap <= 1e-6 && frac <= 0.01, "terminal queues reconcile with unmet demand",
           "terminal q " + fmt(r.terminal_q_sum) + ", unmet " + fmt(r.total_unmet_kwh) +
               " (" + fmt(100.0 * frac) + "% of demand)",
           t.seconds());
}

// ---------------------------------------------------------------------------
// 9. Byte-identical artifacts for a fixed config and seed.
// ---------------------------------------------------------------------------
void criterion_9() {
    Timer t;
    namespace fs = std::filesystem;
    ScenarioConfig cfg = default_cfg();
    cfg.rng_seed = 7;
    const SeriesBundle series = load_or_synthesize_series(cfg);
    const auto fleet = generate_fleet(cfg, cfg.grid());
    const fs::path dir = fs::temp_directory_path() / "evcharge_acceptance_det";
    fs::remove_all(dir);
    const RunResult a = engine::run(cfg, series, fleet);
    const RunResult b = engine::run(cfg, series, fleet);
    export_results(a, cfg, (dir / "a").string());
    export_results(b, cfg, (dir / "b").string());
    bool ok = true;
    for (const char* name : {"slots.csv", "evs.csv", "summary.json"})
        ok = ok && read_file((dir / "a" / name).string()) ==
                       read_file((dir / "b" / name).string());
    fs::remove_all(dir);
    report(9, ok, "two identical runs export byte-identical artifacts",
           ok ? "all three files match" : "artifact mismatch", t.seconds());
}

// ---------------------------------------------------------------------------
// 10. Price-forecast noise degrades ocsa_f toward ocsa_n.
// ---------------------------------------------------------------------------
void criterion_10() {
    Timer t;
    ScenarioConfig cfg = default_cfg();
    double price_mean = 0.0;
    {
        const SeriesBundle s = load_or_synthesize_series(cfg);
        price_mean = mean(s.price_per_kwh);
    }
    const double sigma0 = 0.1 * price_mean;
    const double sigma1 = 10.0 * sigma0;
    std::vector<double> costs_n, costs_f0, costs_f1;
    for (unsigned long long seed = 1; seed <= 20; ++seed) {
        ScenarioConfig cell = cfg;
        cell.rng_seed = seed;
        const SeriesBundle series = load_or_synthesize_series(cell);
        const auto fleet = generate_fleet(cell, cell.grid());
        costs_n.push_back(baselines::ocsa(cell, series, fleet,
                                          baselines::OcsaVariant::no_price_forecast)
                              .total_cost);
        cell.forecast_price_noise_std = sigma0;
        costs_f0.push_back(baselines::ocsa(cell, series, fleet,
                                           baselines::OcsaVariant::with_price_forecast)
                               .total_cost);
        cell.forecast_price_noise_std = sigma1;
        costs_f1.push_back(baselines::ocsa(cell, series, fleet,
                                           baselines::OcsaVariant::with_price_forecast)
                               .total_cost);
    }
    const double gap0 = mean(costs_n) - mean(costs_f0);
    const double gap1 = mean(costs_n) - mean(costs_f1);
    const bool ok = gap0 > 0.0 && gap1 <= 0.5 * gap0;
    report(10, ok, "forecast noise closes the ocsa_f advantage",
           "gap at sigma " + fmt(gap0) + " -> at 10x sigma " + fmt(gap1) + " (need <= " +
               fmt(0.5 * gap0) + ")",
           t.seconds());
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criteria_3_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    if (g_failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
