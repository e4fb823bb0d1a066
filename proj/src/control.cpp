#include "climsid/control.hpp"

#include "climsid/errors.hpp"
#include "climsid/psychro.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>

namespace climsid {

void OnOffSetpoints::validate() const {
    if (!std::isfinite(T_heat_C) || !std::isfinite(T_cool_C) || T_heat_C >= T_cool_C) {
        throw ConfigError("setpoints: need T_heat < T_cool");
    }
    if (RH_hum_pct.has_value() != RH_dehum_pct.has_value()) {
        throw ConfigError("setpoints: RH band needs both bounds");
    }
    if (has_rh_band()) {
        if (*RH_hum_pct < 0.0 || *RH_dehum_pct > 100.0 || *RH_hum_pct >= *RH_dehum_pct) {
            throw ConfigError("setpoints: need 0 <= RH_hum < RH_dehum <= 100");
        }
    }
}

Actuation controller_step(const OnOffSetpoints& sp, const HvacConfig& hvac, double T_c,
                          std::optional<double> rh_pct) {
    Actuation a;
    if (T_c < sp.T_heat_C) {
        a.Q_W = hvac.Q_heat_max_W;
    } else if (T_c > sp.T_cool_C) {
        a.Q_W = -hvac.Q_cool_max_W;
    }
    if (sp.has_rh_band() && rh_pct.has_value()) {
        if (*rh_pct < *sp.RH_hum_pct) {
            a.m_kgs = hvac.hum_max_kgs;
        } else if (*rh_pct > *sp.RH_dehum_pct) {
            a.m_kgs = -hvac.dehum_max_kgs;
        }
    }
    return a;
}

namespace {

struct ChannelLayout {
    bool ham = false;
    int idx_To = 0;
    int idx_Qs = 1;       // carries Qsolar, plus Qhvac under AddedToSolar
    int idx_Xo = -1;
    int idx_Qh = -1;      // separate actuation channel, -1 under AddedToSolar
    int idx_m = -1;
};

ChannelLayout resolve_layout(const StateSpaceModel& m, LoopTopology topology) {
    ChannelLayout lay;
    const std::size_t p = m.num_outputs();
    const std::size_t nu = m.num_inputs();
    if (p != 1 && p != 2) {
        throw TopologyMismatch("closed loop: model must have 1 output (T) or 2 outputs (T, X)");
    }
    lay.ham = (p == 2);
    if (!lay.ham) {
        if (topology == LoopTopology::AddedToSolar) {
            if (nu != 2) throw TopologyMismatch("closed loop: AddedToSolar expects inputs [To, Qsolar+Qhvac]");
        } else {
            if (nu != 3) throw TopologyMismatch("closed loop: SeparateInput expects inputs [To, Qsolar, Qhvac]");
            lay.idx_Qh = 2;
        }
    } else {
        if (topology == LoopTopology::AddedToSolar) {
            if (nu != 4) throw TopologyMismatch("closed loop: AddedToSolar expects inputs [To, Qsolar+Qhvac, Xo, m]");
            lay.idx_Xo = 2;
            lay.idx_m = 3;
        } else {
            if (nu != 5) throw TopologyMismatch("closed loop: SeparateInput expects inputs [To, Qsolar, Xo, Qhvac, m]");
            lay.idx_Xo = 2;
            lay.idx_Qh = 3;
            lay.idx_m = 4;
        }
    }
    return lay;
}

} // namespace

SimResult simulate_closed_loop(const StateSpaceModel& model, const Climate& climate,
                               const OnOffSetpoints& sp, const HvacConfig& hvac,
                               LoopTopology topology, const std::string& zone_name) {
    const auto wall_start = std::chrono::steady_clock::now();
    model.require_consistent();
    sp.validate();
    hvac.validate();
    climate.validate();
    if (model.is_continuous()) {
        throw DtMismatch("closed loop: model must be discrete");
    }
    if (model.dt != climate.dt()) {
        throw DtMismatch("closed loop: model dt does not match climate dt");
    }
    const ChannelLayout lay = resolve_layout(model, topology);
    if (lay.ham && !sp.has_rh_band()) {
        throw ConfigError("closed loop: humidity model needs an RH band");
    }
    const std::size_t N = climate.size();
    const double dt = climate.dt();
    const double t0 = climate.t0();

    // Cold start: equilibrium consistent with the first climate sample, with the
    // output pulled into the dead band by a constant actuation (the loop is assumed
    // to have been running before the record begins, as in the reference simulator).
    Eigen::VectorXd u_exo = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.num_inputs()));
    u_exo(lay.idx_To) = climate.To_C[0];
    u_exo(lay.idx_Qs) = climate.Qsolar_W[0];
    if (lay.ham) u_exo(lay.idx_Xo) = climate.Xo(0);
    const Eigen::Index n = model.A.rows();
    const Eigen::Index nu_total = model.B.cols();
    const Eigen::Index p_total = model.C.rows();
    const Eigen::VectorXd u_off =
        model.u_offset.size() > 0 ? model.u_offset : Eigen::VectorXd::Zero(nu_total);
    const Eigen::VectorXd y_off =
        model.y_offset.size() > 0 ? model.y_offset : Eigen::VectorXd::Zero(p_total);
    Eigen::MatrixXd ImA = Eigen::MatrixXd::Identity(n, n) - model.A;
    auto ImA_qr = ImA.colPivHouseholderQr();
    Eigen::MatrixXd gain = model.C * ImA_qr.solve(model.B) + model.D;  // steady output per unit input
    Eigen::VectorXd y_ff = gain * (u_exo - u_off) + y_off;
    Eigen::VectorXd u_start = u_exo;
    {
        const double T_t = std::clamp(y_ff(0), sp.T_heat_C, sp.T_cool_C);
        const Eigen::Index qcol = lay.idx_Qh >= 0 ? lay.idx_Qh : lay.idx_Qs;
        if (!lay.ham) {
            const double gq = gain(0, qcol);
            double qbar = std::abs(gq) > 1e-12 ? (T_t - y_ff(0)) / gq : 0.0;
            qbar = std::clamp(qbar, -hvac.Q_cool_max_W, hvac.Q_heat_max_W);
            u_start(qcol) += qbar;
        } else {
            const double X_t = std::clamp(y_ff(1), x_from_trh(T_t, *sp.RH_hum_pct),
                                          x_from_trh(T_t, *sp.RH_dehum_pct));
            Eigen::Matrix2d M;
            M << gain(0, qcol), gain(0, lay.idx_m), gain(1, qcol), gain(1, lay.idx_m);
            if (std::abs(M.determinant()) > 1e-18) {
                Eigen::Vector2d act = M.inverse() * Eigen::Vector2d(T_t - y_ff(0), X_t - y_ff(1));
                u_start(qcol) += std::clamp(act(0), -hvac.Q_cool_max_W, hvac.Q_heat_max_W);
                u_start(lay.idx_m) += std::clamp(act(1), -hvac.dehum_max_kgs, hvac.hum_max_kgs);
            }
        }
    }
    Eigen::VectorXd x = ImA_qr.solve(model.B * (u_start - u_off));
    if (!x.allFinite()) x.setZero();

    std::vector<double> Tv(N), Qv(N);
    std::vector<double> Xv, RHv, mv;
    if (lay.ham) {
        Xv.resize(N);
        RHv.resize(N);
        mv.resize(N);
    }
    SimResult result;
    bool warned_unstable = false;
    for (std::size_t k = 0; k < N; ++k) {
        u_exo(lay.idx_To) = climate.To_C[k];
        u_exo(lay.idx_Qs) = climate.Qsolar_W[k];
        if (lay.ham) {
            u_exo(lay.idx_Xo) = climate.Xo(k);
            u_exo(lay.idx_m) = 0.0;
        }
        if (lay.idx_Qh >= 0) u_exo(lay.idx_Qh) = 0.0;
        Eigen::VectorXd y = model.C * x + model.D * (u_exo - u_off) + y_off;
        const double T_meas = y(0);
        std::optional<double> rh;
        double X_meas = 0.0;
        if (lay.ham) {
            X_meas = y(1);
            rh = rh_from_tx(T_meas, std::max(X_meas, 0.0));
        }
        const Actuation act = controller_step(sp, hvac, T_meas, rh);
        Tv[k] = T_meas;
        Qv[k] = act.Q_W;
        if (lay.ham) {
            Xv[k] = X_meas;
            RHv[k] = *rh;
            mv[k] = act.m_kgs;
        }
        if (!warned_unstable && (!std::isfinite(T_meas) || T_meas < -50.0 || T_meas > 100.0)) {
            result.warnings.push_back("UnstableLoop: temperature left [-50, 100] C at sample " +
                                      std::to_string(k));
            warned_unstable = true;
        }
        Eigen::VectorXd u_full = u_exo;
        if (lay.idx_Qh >= 0) {
            u_full(lay.idx_Qh) = act.Q_W;
        } else {
            u_full(lay.idx_Qs) += act.Q_W;
        }
        if (lay.ham) u_full(lay.idx_m) = act.m_kgs;
        x = model.A * x + model.B * (u_full - u_off);
    }

    ZoneResult zr;
    zr.zone = zone_name;
    zr.T_C = TimeSeries("Ti_" + zone_name + "_C", "C", t0, dt, std::move(Tv));
    zr.Q_hvac_W = TimeSeries("Qhvac_" + zone_name + "_W", "W", t0, dt, std::move(Qv));
    if (lay.ham) {
        zr.X_kgkg = TimeSeries("Xi_" + zone_name + "_kgkg", "kg/kg", t0, dt, std::move(Xv));
        zr.RH_pct = TimeSeries("RHi_" + zone_name + "_pct", "pct", t0, dt, std::move(RHv));
        zr.m_moist_kgs = TimeSeries("mmoist_" + zone_name + "_kgs", "kg/s", t0, dt, std::move(mv));
    }
    result.zones.push_back(std::move(zr));
    result.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

std::vector<BandFraction> within_band_fraction(const SimResult& result, const OnOffSetpoints& sp) {
    sp.validate();
    std::vector<BandFraction> out;
    out.reserve(result.zones.size());
    for (const auto& z : result.zones) {
        BandFraction bf;
        bf.zone = z.zone;
        const std::size_t N = z.T_C.size();
        if (N == 0) {
            throw ConfigError("within_band_fraction: empty temperature series");
        }
        std::size_t in_T = 0;
        for (double v : z.T_C.values()) {
            if (v >= sp.T_heat_C && v <= sp.T_cool_C) ++in_T;
        }
        bf.T_pct = 100.0 * static_cast<double>(in_T) / static_cast<double>(N);
        if (sp.has_rh_band() && z.RH_pct) {
            std::size_t in_rh = 0;
            for (double v : z.RH_pct->values()) {
                if (v >= *sp.RH_hum_pct && v <= *sp.RH_dehum_pct) ++in_rh;
            }
            bf.RH_pct_in = 100.0 * static_cast<double>(in_rh) / static_cast<double>(z.RH_pct->size());
        }
        out.push_back(std::move(bf));
    }
    return out;
}

} // namespace climsid
