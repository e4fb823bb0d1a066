#pragma once

#include "climsid/building.hpp"

#include <cstdint>

namespace climsid {

// Deterministic synthetic outdoor climate: seasonal and diurnal cycles plus AR(1)
// weather noise, fully reproducible from (seed, year). Solar power is non-negative,
// zero at local midnight, and modulated by a smooth cloud factor; RH stays inside
// [25, 98]. Different years with the same seed give independent noise realizations
// of the same climate statistics. dt in seconds; the grid starts at t0 = 0.
Climate synth_climate(std::uint64_t seed, int year, int days, double dt);

} // namespace climsid
