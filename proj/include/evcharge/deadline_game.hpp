#pragma once

#include <vector>

#include "evcharge/solver.hpp"
#include "evcharge/types.hpp"

namespace evc {

// Per-EV deadline selection: a small simplex QP trading the squared gap
// between the mean chosen deadline and the estimated finish against the
// risk of not being full by the chosen deadline. Times are in slots.

// Expected risk of the strategy: sum_j w_j * (target - soc) * exp(finish - d_j).
double risk_payoff(const MixedStrategy& strategy, const std::vector<int>& candidates,
                   double soc, double target_soc, double finish_slot);

// Builds the simplex QP for one EV. Uses ev.finish_estimate_slot (throws if
// unset), ev.b_queue, and ev.v_dead. Candidate deadlines are shifted by the
// finish estimate internally, which changes the objective only by a constant
// on the simplex and keeps the quadratic well-conditioned.
QpProblem assemble_deadline_problem(const EvRecord& ev, const std::vector<int>& candidates);

// Deadline implied by a strategy: candidate of the heaviest weight, ties to
// the earliest action.
int choose_deadline(const MixedStrategy& strategy, const std::vector<int>& candidates);

} // namespace evc
