#pragma once

namespace climsid {

// Fixed total pressure used throughout the toolkit (documented in docs/FORMATS.md).
inline constexpr double kAtmPressurePa = 101325.0;

// Saturation vapor pressure over water, Magnus form, T in Celsius, result in Pa.
// Coefficients are frozen in docs/FORMATS.md; valid roughly -40..60 C.
double saturation_pressure_pa(double T_c);

struct RhResult {
    double rh_pct = 0.0;   // clamped to [0, 100]
    bool saturated = false; // true when the unclamped value exceeded 100
};

// RH% from temperature and humidity ratio: p_v = X p / (0.622 + X), RH = 100 p_v / p_sat.
RhResult rh_from_tx_flagged(double T_c, double X_kgkg, double pressure_pa = kAtmPressurePa);
double rh_from_tx(double T_c, double X_kgkg, double pressure_pa = kAtmPressurePa);

// Humidity ratio (kg water per kg dry air) from temperature and RH%; inverse of the above.
double x_from_trh(double T_c, double rh_pct, double pressure_pa = kAtmPressurePa);

} // namespace climsid
