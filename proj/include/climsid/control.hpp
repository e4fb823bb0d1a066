#pragma once

#include "climsid/building.hpp"
#include "climsid/statespace.hpp"

#include <optional>
#include <string>

namespace climsid {

// Thermostat / humidistat bands for the stateless on/off law. Heating engages strictly
// below T_heat, cooling strictly above T_cool; analogously for the optional RH band.
struct OnOffSetpoints {
    double T_heat_C = 0.0;
    double T_cool_C = 0.0;
    std::optional<double> RH_hum_pct;
    std::optional<double> RH_dehum_pct;

    void validate() const;
    bool has_rh_band() const { return RH_hum_pct.has_value() && RH_dehum_pct.has_value(); }
};

// How the HVAC heat enters an identified model:
//   AddedToSolar    inputs [To, Qsolar + Qhvac]            (+ [Xo, m_moist] with humidity)
//   SeparateInput   inputs [To, Qsolar, Qhvac]             (+ [Xo] before and [m_moist] after)
// Channel order is fixed; see docs/FORMATS.md.
enum class LoopTopology { AddedToSolar, SeparateInput };

struct Actuation {
    double Q_W = 0.0;      // heating > 0, cooling < 0
    double m_kgs = 0.0;    // humidify > 0, dehumidify < 0
};

// One controller decision from the current measurements. Stateless: no hysteresis
// memory beyond the band itself.
Actuation controller_step(const OnOffSetpoints& sp, const HvacConfig& hvac, double T_c,
                          std::optional<double> rh_pct = std::nullopt);

// Run the on/off loop against an identified discrete model on the climate grid.
// Each step reads the model output with the actuation channel zeroed, decides the
// actuation, then advances the state with it applied. Models with two outputs are
// treated as [T, X] and close the humidity loop as well. Throws TopologyMismatch
// when the input count does not fit the topology, DtMismatch on grid disagreement.
SimResult simulate_closed_loop(const StateSpaceModel& model, const Climate& climate,
                               const OnOffSetpoints& sp, const HvacConfig& hvac,
                               LoopTopology topology, const std::string& zone_name);

struct BandFraction {
    std::string zone;
    double T_pct = 0.0;                 // share of samples with T in [T_heat, T_cool]
    std::optional<double> RH_pct_in;    // same for RH when both band and series exist
};

std::vector<BandFraction> within_band_fraction(const SimResult& result, const OnOffSetpoints& sp);

} // namespace climsid
