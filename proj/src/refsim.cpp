#include "climsid/refsim.hpp"

#include "climsid/errors.hpp"
#include "climsid/psychro.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

namespace climsid {

namespace {

struct BranchState {
    double g_in = 0.0;   // conductance air <-> branch node
    double g_out = 0.0;  // conductance branch node <-> outdoors, 0 for interior mass
    double inv_C = 0.0;
    double T = 0.0;
};

struct ZoneState {
    const ZoneParams* params = nullptr;
    double inv_C_air = 0.0;
    double T = 0.0;
    std::vector<BranchState> branches;
    std::vector<std::pair<std::size_t, double>> neighbors; // zone index, conductance

    bool moist = false;
    double X = 0.0;
    double X_buf = 0.0;
    double inv_m_air = 0.0;
    double inv_m_buf = 0.0;

    Actuation act;
};

double smallest_time_constant(const std::vector<ZoneState>& zones, bool moisture) {
    double tau = std::numeric_limits<double>::infinity();
    for (const auto& z : zones) {
        double g_air = z.params->vent_conductance_W_per_K;
        for (const auto& b : z.branches) {
            g_air += b.g_in;
            const double g_b = b.g_in + b.g_out;
            if (g_b > 0.0) tau = std::min(tau, 1.0 / (b.inv_C * g_b));
        }
        for (const auto& [j, g] : z.neighbors) {
            (void)j;
            g_air += g;
        }
        if (g_air > 0.0) tau = std::min(tau, 1.0 / (z.inv_C_air * g_air));
        if (moisture && z.moist) {
            const double ex = z.params->moisture.vent_exchange_kgs +
                              z.params->moisture.buffer_exchange_kgs;
            if (ex > 0.0) tau = std::min(tau, 1.0 / (z.inv_m_air * ex));
            if (z.inv_m_buf > 0.0 && z.params->moisture.buffer_exchange_kgs > 0.0) {
                tau = std::min(tau, 1.0 / (z.inv_m_buf * z.params->moisture.buffer_exchange_kgs));
            }
        }
    }
    return tau;
}

SimResult run(const Building& building, const Climate& climate,
              const std::optional<HvacConfig>& hvac,
              const std::optional<OnOffSetpoints>& controller, double dt_output, bool moisture) {
    const auto wall_start = std::chrono::steady_clock::now();
    building.validate();
    climate.validate();
    if (hvac) hvac->validate();
    if (controller) controller->validate();
    if (!(dt_output > 0.0) || !std::isfinite(dt_output)) {
        throw ConfigError("simulate: dt_output must be positive");
    }
    const double dt_c = climate.dt();
    const double ratio = dt_output / dt_c;
    const auto per_step = static_cast<std::size_t>(std::llround(ratio));
    if (per_step < 1 || std::abs(ratio - static_cast<double>(per_step)) > 1e-9 * ratio) {
        throw DtMismatch("simulate: dt_output must be a whole multiple of the climate interval");
    }

    const bool actuated = hvac.has_value() && controller.has_value();
    if (actuated && controller->has_rh_band() && !moisture) {
        throw ConfigError("simulate: RH setpoints require the moisture balance");
    }

    // Free-floating runs start relaxed to the first outdoor sample. Controlled runs
    // start inside the dead band (the loop is assumed to have been running before
    // the record begins), with wall nodes at their steady profile between the zone
    // and the outdoors so the record does not open on a warm-up transient.
    const double To0 = climate.To_C[0];
    double T_init = To0;
    if (hvac && controller) {
        T_init = std::clamp(To0, controller->T_heat_C, controller->T_cool_C);
    }

    std::vector<ZoneState> zones(building.zones.size());
    bool any_moist = false;
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const ZoneParams& zp = building.zones[i];
        ZoneState& z = zones[i];
        z.params = &zp;
        z.inv_C_air = 1.0 / zp.air_capacitance_J_per_K;
        z.T = T_init;
        z.branches.reserve(zp.branches.size());
        for (const auto& b : zp.branches) {
            BranchState bs;
            bs.g_in = 1.0 / (b.split * b.R_K_per_W);
            bs.g_out = b.split < 1.0 ? 1.0 / ((1.0 - b.split) * b.R_K_per_W) : 0.0;
            bs.inv_C = 1.0 / b.C_J_per_K;
            bs.T = (bs.g_in * T_init + bs.g_out * To0) / (bs.g_in + bs.g_out);
            z.branches.push_back(bs);
        }
        for (const auto& [nb, g] : zp.interzone_W_per_K) {
            z.neighbors.emplace_back(building.zone_index(nb), g);
        }
        if (moisture && zp.moisture.air_mass_kg > 0.0) {
            z.moist = true;
            any_moist = true;
            z.inv_m_air = 1.0 / zp.moisture.air_mass_kg;
            z.inv_m_buf = zp.moisture.buffer_mass_kg > 0.0 ? 1.0 / zp.moisture.buffer_mass_kg : 0.0;
            z.X = climate.Xo(0);
            if (hvac && controller && controller->has_rh_band()) {
                const double lo = x_from_trh(T_init, *controller->RH_hum_pct);
                const double hi = x_from_trh(T_init, *controller->RH_dehum_pct);
                z.X = std::clamp(z.X, lo, hi);
            }
            z.X_buf = z.X;
        }
    }
    if (moisture && !any_moist) {
        throw ConfigError("simulate_ham: no zone has moisture parameters");
    }

    const double tau_min = smallest_time_constant(zones, moisture);
    std::size_t substeps = 1;
    if (std::isfinite(tau_min)) {
        substeps = static_cast<std::size_t>(std::ceil(dt_c / (0.1 * tau_min)));
        substeps = std::max<std::size_t>(substeps, 1);
    }
    const double h = dt_c / static_cast<double>(substeps);

    const std::size_t n_climate = climate.size();
    const std::size_t n_out = n_climate / per_step;
    if (n_out == 0) {
        throw ConfigError("simulate: climate shorter than one output step");
    }

    struct Recording {
        std::vector<double> T, X, RH, Q, m;
    };
    std::vector<Recording> rec(zones.size());
    for (auto& r : rec) {
        r.T.resize(n_out);
        if (actuated) {
            r.Q.resize(n_out);
            r.m.resize(n_out);
        }
    }
    for (std::size_t i = 0; i < zones.size(); ++i) {
        if (zones[i].moist) {
            rec[i].X.resize(n_out);
            rec[i].RH.resize(n_out);
        }
    }

    SimResult result;
    bool warned_band = false;
    bool warned_negx = false;
    std::vector<double> dT(zones.size());
    std::vector<double> Xo_cache(moisture ? n_climate : 0);
    if (moisture) {
        for (std::size_t k = 0; k < n_climate; ++k) Xo_cache[k] = climate.Xo(k);
    }

    std::size_t out_k = 0;
    for (std::size_t k = 0; k < n_climate; ++k) {
        if (k % per_step == 0) {
            if (out_k >= n_out) break;
            for (std::size_t i = 0; i < zones.size(); ++i) {
                ZoneState& z = zones[i];
                rec[i].T[out_k] = z.T;
                std::optional<double> rh;
                if (z.moist) {
                    rec[i].X[out_k] = z.X;
                    const double rh_val = rh_from_tx(z.T, z.X);
                    rec[i].RH[out_k] = rh_val;
                    rh = rh_val;
                }
                z.act = Actuation{};
                if (actuated) {
                    z.act = controller_step(*controller, *hvac, z.T, rh);
                    rec[i].Q[out_k] = z.act.Q_W;
                    rec[i].m[out_k] = z.act.m_kgs;
                }
                if (!warned_band && (z.T < -50.0 || z.T > 100.0)) {
                    result.warnings.push_back("UnstableLoop: temperature left [-50, 100] C at sample " +
                                              std::to_string(out_k));
                    warned_band = true;
                }
            }
            ++out_k;
        }

        const double To = climate.To_C[k];
        const double Qs = climate.Qsolar_W[k];
        const double Xo = moisture ? Xo_cache[k] : 0.0;
        for (std::size_t s = 0; s < substeps; ++s) {
            for (std::size_t i = 0; i < zones.size(); ++i) {
                ZoneState& z = zones[i];
                double flux = z.params->vent_conductance_W_per_K * (To - z.T);
                for (const auto& b : z.branches) {
                    flux += b.g_in * (b.T - z.T);
                }
                for (const auto& [j, g] : z.neighbors) {
                    flux += g * (zones[j].T - z.T);
                }
                flux += z.params->solar_gain_factor * Qs + z.act.Q_W;
                dT[i] = h * z.inv_C_air * flux;
            }
            for (std::size_t i = 0; i < zones.size(); ++i) {
                ZoneState& z = zones[i];
                for (auto& b : z.branches) {
                    const double f = b.g_in * (z.T - b.T) + b.g_out * (To - b.T);
                    b.T += h * b.inv_C * f;
                }
                z.T += dT[i];
                if (z.moist) {
                    const auto& mp = z.params->moisture;
                    const double fx = mp.vent_exchange_kgs * (Xo - z.X) +
                                      mp.buffer_exchange_kgs * (z.X_buf - z.X) +
                                      mp.production_kgs + z.act.m_kgs;
                    const double fb = mp.buffer_exchange_kgs * (z.X - z.X_buf);
                    z.X += h * z.inv_m_air * fx;
                    if (z.inv_m_buf > 0.0) z.X_buf += h * z.inv_m_buf * fb;
                    if (z.X < 0.0 || z.X_buf < 0.0) {
                        z.X = std::max(z.X, 0.0);
                        z.X_buf = std::max(z.X_buf, 0.0);
                        if (!warned_negx) {
                            result.warnings.push_back("NegativeHumidity: humidity ratio clamped at zero");
                            warned_negx = true;
                        }
                    }
                }
            }
        }
        if (k % per_step == per_step - 1) {
            for (const auto& z : zones) {
                bool ok = std::isfinite(z.T) && (!z.moist || (std::isfinite(z.X) && std::isfinite(z.X_buf)));
                for (const auto& b : z.branches) ok = ok && std::isfinite(b.T);
                if (!ok) {
                    throw InstabilityDetected(
                        "simulate: non-finite state in zone '" + z.params->name +
                        "'; substep too large for the smallest RC product");
                }
            }
        }
    }

    const double t0 = climate.t0();
    for (std::size_t i = 0; i < zones.size(); ++i) {
        const std::string& name = building.zones[i].name;
        ZoneResult zr;
        zr.zone = name;
        zr.T_C = TimeSeries("Ti_" + name + "_C", "C", t0, dt_output, std::move(rec[i].T));
        if (zones[i].moist) {
            zr.X_kgkg = TimeSeries("Xi_" + name + "_kgkg", "kg/kg", t0, dt_output, std::move(rec[i].X));
            zr.RH_pct = TimeSeries("RHi_" + name + "_pct", "pct", t0, dt_output, std::move(rec[i].RH));
        }
        if (actuated) {
            zr.Q_hvac_W = TimeSeries("Qhvac_" + name + "_W", "W", t0, dt_output, std::move(rec[i].Q));
            zr.m_moist_kgs =
                TimeSeries("mmoist_" + name + "_kgs", "kg/s", t0, dt_output, std::move(rec[i].m));
        }
        result.zones.push_back(std::move(zr));
    }
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

} // namespace

SimResult simulate(const Building& building, const Climate& climate,
                   const std::optional<HvacConfig>& hvac,
                   const std::optional<OnOffSetpoints>& controller, double dt_output) {
    return run(building, climate, hvac, controller, dt_output, false);
}

SimResult simulate_ham(const Building& building, const Climate& climate,
                       const std::optional<HvacConfig>& hvac,
                       const std::optional<OnOffSetpoints>& controller, double dt_output) {
    return run(building, climate, hvac, controller, dt_output, true);
}

} // namespace climsid
