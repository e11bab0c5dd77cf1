#include "evcharge/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "evcharge/errors.hpp"

namespace evc {

int TimeGrid::slot_of_hour(double h) const {
    return static_cast<int>(std::lround((h - origin_hour) / slot_hours));
}

void TimeGrid::validate() const {
    if (slot_count < 1) throw config_error("slot_count must be >= 1");
    if (!(slot_hours > 0.0)) throw config_error("slot_hours must be > 0");
}

double EvRecord::remaining_demand_kwh() const {
    return std::max(0.0, (target_soc - soc) * capacity_kwh);
}

double ev_demand(const EvRecord& ev) { return ev.remaining_demand_kwh(); }

double qos(int arrival_slot, int finish_slot, int deadline_slot, const TimeGrid& grid) {
    if (arrival_slot > finish_slot || finish_slot > deadline_slot)
        throw std::invalid_argument("qos: need arrival <= finish <= deadline, got " +
                                    std::to_string(arrival_slot) + "/" + std::to_string(finish_slot) +
                                    "/" + std::to_string(deadline_slot));
    const double charging_h = grid.hours(finish_slot - arrival_slot);
    const double waiting_h = grid.hours(deadline_slot - finish_slot);
    return std::log1p(charging_h) + std::log1p(waiting_h);
}

void GridSignals::validate(const TimeGrid& grid) const {
    const auto n = static_cast<std::size_t>(grid.slot_count);
    if (base_load_kw.size() != n || price_per_kwh.size() != n ||
        solar_per_unit.size() != n || wind_per_unit.size() != n)
        throw model_error("signal series length does not match the time grid");
    for (std::size_t t = 0; t < n; ++t) {
        if (base_load_kw[t] < 0.0) throw model_error("negative base load at slot " + std::to_string(t));
        if (price_per_kwh[t] < 0.0) throw model_error("negative price at slot " + std::to_string(t));
        if (solar_per_unit[t] < 0.0 || solar_per_unit[t] > 1.0 ||
            wind_per_unit[t] < 0.0 || wind_per_unit[t] > 1.0)
            throw model_error("per-unit renewable outside [0,1] at slot " + std::to_string(t));
    }
    if (!(charging_efficiency > 0.0 && charging_efficiency <= 1.0))
        throw model_error("charging efficiency must be in (0,1]");
}

ActionSpace ActionSpace::symmetric(int k) {
    if (k < 1) throw config_error("action count must be >= 1");
    ActionSpace a;
    const int half = (k - 1) / 2;
    for (int j = 0; j < k; ++j) a.offsets.push_back(j - half);
    return a;
}

void ActionSpace::validate() const {
    if (offsets.empty()) throw std::invalid_argument("action space is empty");
    for (std::size_t j = 1; j < offsets.size(); ++j)
        if (offsets[j] <= offsets[j - 1])
            throw std::invalid_argument("action offsets must be strictly increasing");
}

std::vector<int> ActionSpace::candidates(int original_deadline, int lo, int hi) const {
    validate();
    std::vector<int> out;
    out.reserve(offsets.size());
    for (int off : offsets)
        out.push_back(std::clamp(original_deadline + off, lo, hi));
    return out;
}

std::vector<int> ActionSpace::future_candidates(int original_deadline, int after_slot,
                                                int last) const {
    validate();
    std::vector<int> out;
    for (int off : offsets) {
        const int d = std::min(original_deadline + off, last);
        if (d > after_slot && (out.empty() || d != out.back())) out.push_back(d);
    }
    return out;
}

bool MixedStrategy::valid(double tol) const {
    if (weights.empty()) return false;
    double sum = 0.0;
    for (double w : weights) {
        if (w < -tol) return false;
        sum += w;
    }
    return std::abs(sum - 1.0) <= tol;
}

double MixedStrategy::mean_deadline(const std::vector<int>& candidates) const {
    double m = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) m += weights[j] * candidates[j];
    return m;
}

} // namespace evc
