#pragma once

#include <vector>

#include "evcharge/data_io.hpp"
#include "evcharge/results.hpp"
#include "evcharge/types.hpp"

namespace evc::baselines {

// Offline cost-minimal schedule with the full day known in advance: an LP
// over per-EV per-slot rates, renewable-first, exact demand delivery when
// feasible (slacked best-effort otherwise), replayed through the standard
// accounting.
RunResult occma(const ScenarioConfig& cfg, const SeriesBundle& series,
                const std::vector<EvRecord>& fleet);

enum class OcsaVariant { with_price_forecast, no_price_forecast };

// Online benchmark reconstruction: per-slot threshold rule on the forecast
// price (with_price_forecast) or charge-as-early-as-possible
// (no_price_forecast); within a slot the most urgent EVs are served first.
// price_forecast may override the config-driven forecast (e.g. the truth);
// pass nullptr for the default.
RunResult ocsa(const ScenarioConfig& cfg, const SeriesBundle& series,
               const std::vector<EvRecord>& fleet, OcsaVariant variant,
               const std::vector<double>* price_forecast = nullptr);

// The proposed pipeline with the deadline game switched off.
RunResult edf_only(const ScenarioConfig& cfg, const SeriesBundle& series,
                   const std::vector<EvRecord>& fleet);

} // namespace evc::baselines
