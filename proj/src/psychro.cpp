#include "climsid/psychro.hpp"

#include "climsid/errors.hpp"

#include <algorithm>
#include <cmath>

namespace climsid {

namespace {

constexpr double kMagnusA = 610.94;  // Pa
constexpr double kMagnusB = 17.625;
constexpr double kMagnusC = 243.04;  // C
constexpr double kEpsRatio = 0.622;  // molar mass ratio water/dry air

} // namespace

double saturation_pressure_pa(double T_c) {
    if (!std::isfinite(T_c)) {
        throw ConfigError("saturation_pressure_pa: non-finite temperature");
    }
    if (T_c + kMagnusC <= 0.0) {
        throw ConfigError("saturation_pressure_pa: temperature below Magnus validity range");
    }
    return kMagnusA * std::exp(kMagnusB * T_c / (T_c + kMagnusC));
}

RhResult rh_from_tx_flagged(double T_c, double X_kgkg, double pressure_pa) {
    if (!std::isfinite(X_kgkg) || X_kgkg < 0.0) {
        throw ConfigError("rh_from_tx: humidity ratio must be finite and non-negative");
    }
    if (!(pressure_pa > 0.0)) {
        throw ConfigError("rh_from_tx: pressure must be positive");
    }
    const double p_ws = saturation_pressure_pa(T_c);
    const double p_v = X_kgkg * pressure_pa / (kEpsRatio + X_kgkg);
    const double rh_raw = 100.0 * p_v / p_ws;
    RhResult r;
    r.saturated = rh_raw > 100.0;
    r.rh_pct = std::clamp(rh_raw, 0.0, 100.0);
    return r;
}

double rh_from_tx(double T_c, double X_kgkg, double pressure_pa) {
    return rh_from_tx_flagged(T_c, X_kgkg, pressure_pa).rh_pct;
}

double x_from_trh(double T_c, double rh_pct, double pressure_pa) {
    if (!std::isfinite(rh_pct) || rh_pct < 0.0 || rh_pct > 100.0) {
        throw ConfigError("x_from_trh: RH must lie in [0, 100]");
    }
    if (!(pressure_pa > 0.0)) {
        throw ConfigError("x_from_trh: pressure must be positive");
    }
    const double p_v = rh_pct / 100.0 * saturation_pressure_pa(T_c);
    if (p_v >= pressure_pa) {
        throw ConfigError("x_from_trh: vapor pressure at or above total pressure");
    }
    return kEpsRatio * p_v / (pressure_pa - p_v);
}

} // namespace climsid
