#include "evcharge/deadline_game.hpp"

#include <cmath>
#include <stdexcept>

namespace evc {

double risk_payoff(const MixedStrategy& strategy, const std::vector<int>& candidates,
                   double soc, double target_soc, double finish_slot) {
    if (strategy.weights.size() != candidates.size())
        throw std::invalid_argument("risk_payoff: strategy/candidate size mismatch");
    const double dsoc = target_soc - soc;
    double risk = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j)
        risk += strategy.weights[j] * dsoc * std::exp(finish_slot - candidates[j]);
    return risk;
}

QpProblem assemble_deadline_problem(const EvRecord& ev, const std::vector<int>& candidates) {
    if (candidates.empty())
        throw std::invalid_argument("assemble_deadline_problem: empty action space");
    if (!ev.finish_estimate_slot)
        throw std::invalid_argument("assemble_deadline_problem: finish estimate unset");
    const double f = static_cast<double>(*ev.finish_estimate_slot);
    const double dsoc = ev.target_soc - ev.soc;
    const std::size_t k = candidates.size();

    // Objective (w.d - f)^2 + 2*B*(w.d - f) + V * sum_j w_j * dsoc * e^{f-d_j}.
    // With g_j = d_j - f and sum(w) = 1 this equals (w.g)^2 + 2*B*(w.g) + risk
    // up to a constant, i.e. a rank-one quadratic in the shifted coordinates.
    QpProblem p;
    p.variant = QpVariant::simplex;
    p.hessian_diag.assign(k, 0.0);
    p.linear.resize(k);
    p.lower.assign(k, 0.0);
    p.upper.assign(k, 1.0);
    p.rank1.resize(k);
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double gap = static_cast<double>(candidates[j]) - f;
        p.rank1[j] = sqrt2 * gap;
        p.linear[j] = 2.0 * ev.b_queue * gap + ev.v_dead * dsoc * std::exp(-gap);
    }
    LinearConstraint sum_to_one;
    sum_to_one.rel = LinearConstraint::Rel::eq;
    sum_to_one.rhs = 1.0;
    for (std::size_t j = 0; j < k; ++j) sum_to_one.terms.push_back({static_cast<int>(j), 1.0});
    p.constraints.push_back(std::move(sum_to_one));
    return p;
}

int choose_deadline(const MixedStrategy& strategy, const std::vector<int>& candidates) {
    if (strategy.weights.size() != candidates.size() || candidates.empty())
        throw std::invalid_argument("choose_deadline: strategy/candidate size mismatch");
    std::size_t best = 0;
    for (std::size_t j = 1; j < strategy.weights.size(); ++j)
        if (strategy.weights[j] > strategy.weights[best]) best = j;
    return candidates[best];
}

} // namespace evc
