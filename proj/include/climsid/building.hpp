#pragma once

#include "climsid/timeseries.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace climsid {

// One lumped wall/mass branch attached to a zone air node:
//   T_air --(split*R)-- T_branch --((1-split)*R)-- T_outdoor
// split = 1 closes the outdoor side entirely, modeling interior mass that only
// exchanges with the zone air.
struct WallBranch {
    double R_K_per_W = 0.0;   // total branch resistance, must be > 0
    double C_J_per_K = 0.0;   // branch capacitance, must be > 0
    double split = 0.5;       // indoor-side fraction of R, in (0, 1]
};

struct MoistureParams {
    double air_mass_kg = 0.0;          // dry air mass of the zone; 0 disables moisture
    double vent_exchange_kgs = 0.0;    // dry air mass flow exchanged with outdoors
    double production_kgs = 0.0;       // constant internal vapor release
    double buffer_mass_kg = 0.0;       // hygric buffer expressed as equivalent dry air mass
    double buffer_exchange_kgs = 0.0;  // air/buffer moisture exchange coefficient
};

struct ZoneParams {
    std::string name;
    double air_capacitance_J_per_K = 0.0;
    std::vector<WallBranch> branches;
    double vent_conductance_W_per_K = 0.0;     // sensible ventilation/infiltration loss
    double solar_gain_factor = 0.0;            // fraction of climate Q_solar entering this zone
    std::map<std::string, double> interzone_W_per_K; // conductance to named neighbor zones
    MoistureParams moisture;
};

struct Building {
    std::vector<ZoneParams> zones;

    const ZoneParams& zone(const std::string& name) const;
    std::size_t zone_index(const std::string& name) const;
    // Throws ConfigError on non-positive capacitances/resistances, split outside (0, 1],
    // unknown neighbor names, or asymmetric inter-zone conductances.
    void validate() const;
};

// Boundary conditions on a shared uniform grid. RH is required even for dry-air runs;
// it only participates when a zone has moisture enabled.
struct Climate {
    TimeSeries To_C;
    TimeSeries Qsolar_W;
    TimeSeries RHo_pct;

    std::size_t size() const { return To_C.size(); }
    double dt() const { return To_C.dt(); }
    double t0() const { return To_C.t0(); }
    // Throws DtMismatch on grid disagreement, ConfigError on RH outside [0, 100]
    // or negative solar power.
    void validate() const;
    // Outdoor humidity ratio derived from To and RHo at sample k.
    double Xo(std::size_t k) const;
};

struct HvacConfig {
    double Q_heat_max_W = 0.0;   // heating capacity, >= 0
    double Q_cool_max_W = 0.0;   // cooling capacity (magnitude), >= 0
    double hum_max_kgs = 0.0;    // humidification capacity, >= 0
    double dehum_max_kgs = 0.0;  // dehumidification capacity (magnitude), >= 0

    void validate() const;
};

// Per-zone trajectories from a building or closed-loop simulation. All series share
// one grid. Moisture series are present only when the run carried humidity.
struct ZoneResult {
    std::string zone;
    TimeSeries T_C;
    std::optional<TimeSeries> X_kgkg;
    std::optional<TimeSeries> RH_pct;
    std::optional<TimeSeries> Q_hvac_W;     // signed: heating > 0, cooling < 0
    std::optional<TimeSeries> m_moist_kgs;  // signed: humidify > 0, dehumidify < 0
};

struct SimResult {
    std::vector<ZoneResult> zones;
    std::vector<std::string> warnings;
    double runtime_s = 0.0;

    const ZoneResult& zone(const std::string& name) const;
    bool has_zone(const std::string& name) const;
};

struct ZoneEnergy {
    std::string zone;
    double heating_J = 0.0;
    double cooling_J = 0.0;  // magnitude
};

// Rectangle-rule integral of the actuation series per zone; zones without an
// actuation channel report zeros.
std::vector<ZoneEnergy> annual_energy(const SimResult& result);

} // namespace climsid
