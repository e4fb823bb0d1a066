#include "climsid/building.hpp"

#include "climsid/errors.hpp"
#include "climsid/psychro.hpp"

#include <cmath>

namespace climsid {

const ZoneParams& Building::zone(const std::string& name) const {
    return zones[zone_index(name)];
}

std::size_t Building::zone_index(const std::string& name) const {
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (zones[i].name == name) return i;
    }
    throw ConfigError("building: unknown zone '" + name + "'");
}

void Building::validate() const {
    if (zones.empty()) {
        throw ConfigError("building: no zones defined");
    }
    for (const auto& z : zones) {
        if (z.name.empty()) {
            throw ConfigError("building: zone with empty name");
        }
        if (!(z.air_capacitance_J_per_K > 0.0)) {
            throw ConfigError("building: zone '" + z.name + "' needs positive air capacitance");
        }
        if (z.vent_conductance_W_per_K < 0.0 || z.solar_gain_factor < 0.0) {
            throw ConfigError("building: zone '" + z.name + "' has negative conductance or solar factor");
        }
        for (const auto& b : z.branches) {
            if (!(b.R_K_per_W > 0.0) || !(b.C_J_per_K > 0.0)) {
                throw ConfigError("building: zone '" + z.name + "' branch needs positive R and C");
            }
            if (!(b.split > 0.0) || b.split > 1.0) {
                throw ConfigError("building: zone '" + z.name + "' branch split outside (0, 1]");
            }
        }
        const auto& m = z.moisture;
        if (m.air_mass_kg < 0.0 || m.vent_exchange_kgs < 0.0 || m.production_kgs < 0.0 ||
            m.buffer_mass_kg < 0.0 || m.buffer_exchange_kgs < 0.0) {
            throw ConfigError("building: zone '" + z.name + "' has negative moisture parameter");
        }
        if (m.air_mass_kg == 0.0 &&
            (m.vent_exchange_kgs > 0.0 || m.production_kgs > 0.0 || m.buffer_exchange_kgs > 0.0)) {
            throw ConfigError("building: zone '" + z.name + "' moisture flows without air mass");
        }
        if (m.buffer_exchange_kgs > 0.0 && m.buffer_mass_kg == 0.0) {
            throw ConfigError("building: zone '" + z.name + "' buffer exchange without buffer mass");
        }
        for (const auto& [nb, g] : z.interzone_W_per_K) {
            if (g < 0.0) {
                throw ConfigError("building: negative coupling " + z.name + " <-> " + nb);
            }
            const auto& other = zone(nb);
            auto back = other.interzone_W_per_K.find(z.name);
            if (back == other.interzone_W_per_K.end() || back->second != g) {
                throw ConfigError("building: coupling " + z.name + " <-> " + nb + " is not symmetric");
            }
        }
    }
}

void Climate::validate() const {
    require_same_grid({&To_C, &Qsolar_W, &RHo_pct});
    if (To_C.size() == 0) {
        throw ConfigError("climate: empty series");
    }
    for (std::size_t k = 0; k < RHo_pct.size(); ++k) {
        if (RHo_pct[k] < 0.0 || RHo_pct[k] > 100.0) {
            throw ConfigError("climate: RHo outside [0, 100] at sample " + std::to_string(k));
        }
        if (Qsolar_W[k] < 0.0) {
            throw ConfigError("climate: negative Qsolar at sample " + std::to_string(k));
        }
    }
}

double Climate::Xo(std::size_t k) const {
    return x_from_trh(To_C[k], RHo_pct[k]);
}

void HvacConfig::validate() const {
    if (Q_heat_max_W < 0.0 || Q_cool_max_W < 0.0 || hum_max_kgs < 0.0 || dehum_max_kgs < 0.0) {
        throw ConfigError("hvac: capacities must be non-negative");
    }
}

const ZoneResult& SimResult::zone(const std::string& name) const {
    for (const auto& z : zones) {
        if (z.zone == name) return z;
    }
    throw ConfigError("result: unknown zone '" + name + "'");
}

bool SimResult::has_zone(const std::string& name) const {
    for (const auto& z : zones) {
        if (z.zone == name) return true;
    }
    return false;
}

std::vector<ZoneEnergy> annual_energy(const SimResult& result) {
    std::vector<ZoneEnergy> out;
    out.reserve(result.zones.size());
    for (const auto& z : result.zones) {
        ZoneEnergy e;
        e.zone = z.zone;
        if (z.Q_hvac_W) {
            const double dt = z.Q_hvac_W->dt();
            for (double q : z.Q_hvac_W->values()) {
                if (q > 0.0) {
                    e.heating_J += q * dt;
                } else {
                    e.cooling_J -= q * dt;
                }
            }
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace climsid
