#pragma once

#include "climsid/building.hpp"
#include "climsid/control.hpp"

#include <optional>

namespace climsid {

// Explicit integration of the RC network under the given climate. Boundary values are
// held constant over each climate sample; the internal substep is chosen automatically
// as at most one tenth of the smallest node time constant. dt_output must equal the
// climate interval or a whole multiple of it; the controller (when present) decides once
// per output step and the actuation is held in between. controller == nullopt runs
// free-floating; hvac == nullopt disables actuation entirely.
//
// Results carry the zone temperature sampled at the start of each output step, plus the
// actuation series when a controller ran. Throws InstabilityDetected if any state turns
// non-finite. Moisture parameters are ignored here; use simulate_ham for coupled runs.
SimResult simulate(const Building& building, const Climate& climate,
                   const std::optional<HvacConfig>& hvac,
                   const std::optional<OnOffSetpoints>& controller, double dt_output);

// Same integration with the zone moisture balance enabled for every zone that has an
// air mass configured. Zone RH is derived from (T, X) at each output sample, and the
// humidistat branch of the controller acts on it. Humidity ratios are clamped at zero
// with a NegativeHumidity warning. Requires at least one moisture-enabled zone.
SimResult simulate_ham(const Building& building, const Climate& climate,
                       const std::optional<HvacConfig>& hvac,
                       const std::optional<OnOffSetpoints>& controller, double dt_output);

} // namespace climsid
