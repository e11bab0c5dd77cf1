#include "evcharge/cost_game.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evcharge/errors.hpp"

namespace evc {

AssembledPurchase assemble_purchase_problem(const std::vector<PurchaseInputs>& stations,
                                            double price_per_kwh, double eps_c,
                                            double headroom_kwh) {
    if (headroom_kwh < 0.0)
        throw model_error("base load exceeds the peak cap: headroom is negative");
    const std::size_t m = stations.size();

    AssembledPurchase out;
    out.qp.variant = QpVariant::boxed_coupled;
    out.qp.hessian_diag.resize(m);
    out.qp.linear.resize(m);
    out.qp.lower.assign(m, 0.0);
    out.qp.upper.resize(m);
    out.usable_renewable_kwh.resize(m);

    LinearConstraint peak;
    peak.rel = LinearConstraint::Rel::le;
    peak.rhs = headroom_kwh;

    for (std::size_t i = 0; i < m; ++i) {
        const PurchaseInputs& st = stations[i];
        // Local renewable beyond what the roster can absorb is curtailed,
        // which keeps the service cap feasible with a zero purchase.
        const double usable_r = std::min(st.renewable_kwh, st.service_cap_kwh);
        out.usable_renewable_kwh[i] = usable_r;
        out.qp.upper[i] = std::max(0.0, st.service_cap_kwh - usable_r);

        // Drift-plus-penalty objective in the total service y = x + r:
        //   0.5*eps^2*y^2 + 0.5*(eta*q - eps*y)^2 - eps*q*y - eps*z*y + price*V*x
        // expanded to 0.5*h*x^2 + c*x with constants dropped.
        out.qp.hessian_diag[i] = 2.0 * eps_c * eps_c;
        out.qp.linear[i] = 2.0 * eps_c * eps_c * usable_r -
                           eps_c * st.eta * st.q_queue -
                           eps_c * st.q_queue - eps_c * st.z_queue +
                           price_per_kwh * st.v_charg;
        peak.terms.push_back({static_cast<int>(i), 1.0});
    }
    out.qp.constraints.push_back(std::move(peak));
    return out;
}

PurchaseDecision decide_purchases(const std::vector<PurchaseInputs>& stations,
                                  double price_per_kwh, double eps_c, double headroom_kwh) {
    AssembledPurchase assembled =
        assemble_purchase_problem(stations, price_per_kwh, eps_c, headroom_kwh);
    QpSolution sol = solve_boxed_coupled(assembled.qp);
    if (sol.status == QpStatus::infeasible)
        throw engine_fault("purchase problem infeasible", assembled.qp.debug_dump());

    PurchaseDecision d;
    d.purchases_kwh = sol.x;
    d.usable_renewable_kwh = assembled.usable_renewable_kwh;
    d.totals_kwh.resize(sol.x.size());
    double total_purchase = 0.0;
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        d.totals_kwh[i] = sol.x[i] + assembled.usable_renewable_kwh[i];
        total_purchase += sol.x[i];
    }
    d.objective = sol.objective;
    d.peak_binding = total_purchase >= headroom_kwh - 1e-9 * (1.0 + headroom_kwh);
    // Recover the coupling multiplier from any strictly interior coordinate.
    d.multiplier = 0.0;
    if (d.peak_binding) {
        for (std::size_t i = 0; i < sol.x.size(); ++i) {
            if (sol.x[i] > 1e-12 && sol.x[i] < assembled.qp.upper[i] - 1e-12) {
                d.multiplier = -(assembled.qp.hessian_diag[i] * sol.x[i] + assembled.qp.linear[i]);
                break;
            }
        }
        d.multiplier = std::max(0.0, d.multiplier);
    }
    return d;
}

double update_tradeoff_weight(double v_charg, double deadline_shift_sum, double alpha) {
    if (deadline_shift_sum < 0.0) return (1.0 - alpha) * v_charg;
    if (deadline_shift_sum > 0.0) return (1.0 + alpha) * v_charg;
    return v_charg;
}

} // namespace evc
