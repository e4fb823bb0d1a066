#include "climsid/control.hpp"
#include "climsid/errors.hpp"
#include "climsid/io.hpp"
#include "climsid/refsim.hpp"
#include "climsid/signal.hpp"
#include "climsid/subspace.hpp"
#include "climsid/synth.hpp"
#include "climsid/validation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace climsid;

const char* kUsage = R"(climsid - building dynamics identification toolkit

usage: climsid <command> [flags]

commands:
  synth     generate a synthetic climate year        (--seed --year --days --dt --out)
  simulate  run the reference building simulation    (--config, climate source, --setpoints|--free-float, --ham, --out)
  identify  estimate a state-space model from data   (--data --orders --topology [--zone] --out)
  diagnose  signal statistics and spectra            (--data [--column] --out)
  loop      closed-loop run of an identified model   (--model --config, climate source, --setpoints --topology --out)
  case      scripted study pipelines                 (I|II|III|IV|V|HAM|EXT|all, --config --seed ... --out)
  sweep     identification across setpoint bands     (--config --seed --bands --orders --out)
  import    identify + close loop from a CSV export  (--data --config --setpoints --orders --out)
  report    render verdict/sweep files as text       (--verdict FILE | --sweep FILE)

common flags:
  --seed N          RNG seed for synthetic climates (default 0)
  --year N          climate year index (default 1; cases use 1 and 2)
  --days N          length in days (default 365)
  --dt SECONDS      sample interval (default 3600)
  --orders LIST     comma-separated model orders, e.g. 1,4,8 (default 8)
  --setpoints Th,Tc[,RHh,RHd]
  --topology added|separate (default separate)
  --climate FILE    climate frame CSV instead of synthesis
  --zone NAME       study zone (default from building config)
  --out DIR         output directory (default .)
)";

struct Args {
    std::string command;
    std::map<std::string, std::string> kv;
    std::vector<std::string> positional;

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    std::string get(const std::string& k, const std::string& dflt = "") const {
        auto it = kv.find(k);
        return it == kv.end() ? dflt : it->second;
    }
};

const std::vector<std::string> kFlagKeys = {
    "seed", "year", "days", "dt", "orders", "setpoints", "topology", "climate",
    "zone",  "out",  "config", "data", "model", "column", "bands", "verdict",
    "sweep", "fine-dt"};
const std::vector<std::string> kBoolKeys = {"free-float", "ham", "help"};

Args parse_args(int argc, char** argv) {
    Args a;
    if (argc >= 2) a.command = argv[1];
    for (int i = 2; i < argc; ++i) {
        std::string tok = argv[i];
        if (tok.rfind("--", 0) != 0) {
            a.positional.push_back(tok);
            continue;
        }
        tok = tok.substr(2);
        std::string key = tok, val;
        const auto eq = tok.find('=');
        bool have_val = false;
        if (eq != std::string::npos) {
            key = tok.substr(0, eq);
            val = tok.substr(eq + 1);
            have_val = true;
        }
        const bool is_bool =
            std::find(kBoolKeys.begin(), kBoolKeys.end(), key) != kBoolKeys.end();
        const bool is_known =
            std::find(kFlagKeys.begin(), kFlagKeys.end(), key) != kFlagKeys.end();
        if (!is_bool && !is_known) {
            throw ConfigError("unknown flag --" + key);
        }
        if (is_bool) {
            a.kv[key] = have_val ? val : "1";
            continue;
        }
        if (!have_val) {
            if (i + 1 >= argc) throw ConfigError("--" + key + " needs a value");
            val = argv[++i];
        }
        a.kv[key] = val;
    }
    return a;
}

double parse_double_flag(const Args& a, const std::string& key, double dflt) {
    if (!a.has(key)) return dflt;
    try {
        std::size_t pos = 0;
        const double v = std::stod(a.get(key), &pos);
        if (pos != a.get(key).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--" + key + ": expected a number, got '" + a.get(key) + "'");
    }
}

long parse_long_flag(const Args& a, const std::string& key, long dflt) {
    if (!a.has(key)) return dflt;
    try {
        std::size_t pos = 0;
        const long v = std::stol(a.get(key), &pos);
        if (pos != a.get(key).size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("--" + key + ": expected an integer, got '" + a.get(key) + "'");
    }
}

std::vector<double> parse_double_list(const std::string& s, char sep) {
    std::vector<double> out;
    std::istringstream iss(s);
    std::string tok;
    while (std::getline(iss, tok, sep)) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("expected a number in '" + s + "'");
        }
    }
    return out;
}

std::vector<int> parse_orders(const Args& a) {
    if (!a.has("orders")) return {8};
    std::vector<int> orders;
    for (double v : parse_double_list(a.get("orders"), ',')) {
        orders.push_back(static_cast<int>(v));
    }
    if (orders.empty()) throw ConfigError("--orders: empty list");
    return orders;
}

std::optional<OnOffSetpoints> parse_setpoints(const Args& a) {
    if (!a.has("setpoints")) return std::nullopt;
    const auto v = parse_double_list(a.get("setpoints"), ',');
    if (v.size() != 2 && v.size() != 4) {
        throw ConfigError("--setpoints: expected Th,Tc or Th,Tc,RHh,RHd");
    }
    OnOffSetpoints sp;
    sp.T_heat_C = v[0];
    sp.T_cool_C = v[1];
    if (v.size() == 4) {
        sp.RH_hum_pct = v[2];
        sp.RH_dehum_pct = v[3];
    }
    sp.validate();
    return sp;
}

LoopTopology parse_topology(const Args& a) {
    const std::string t = a.get("topology", "separate");
    if (t == "separate") return LoopTopology::SeparateInput;
    if (t == "added") return LoopTopology::AddedToSolar;
    throw ConfigError("--topology: expected 'added' or 'separate'");
}

std::filesystem::path out_dir(const Args& a) {
    std::filesystem::path dir = a.get("out", ".");
    std::filesystem::create_directories(dir);
    return dir;
}

Climate load_or_synth_climate(const Args& a) {
    if (a.has("climate")) {
        return climate_from(read_frame_csv(a.get("climate")));
    }
    return synth_climate(static_cast<std::uint64_t>(parse_long_flag(a, "seed", 0)),
                         static_cast<int>(parse_long_flag(a, "year", 1)),
                         static_cast<int>(parse_long_flag(a, "days", 365)),
                         parse_double_flag(a, "dt", 3600.0));
}

BuildingConfig load_config(const Args& a) {
    if (!a.has("config")) throw ConfigError("--config FILE is required for this command");
    return read_building_config(a.get("config"));
}

// Column resolution for identification data: either the generic logger layout
// (T_o, Q_solar, optional Q_internal, Q_hvac, T_i) or a simulation frame
// (To, Qsolar, Ti_<zone>_C, Qhvac_<zone>_W).
struct ResolvedData {
    std::vector<TimeSeries> inputs;
    TimeSeries output;
    std::string zone;
};

ResolvedData resolve_id_columns(const Frame& f, const std::string& zone_flag,
                                LoopTopology topology) {
    ResolvedData r;
    std::string ti_col, qh_col, to_col, qs_col, qi_col;
    if (f.has("T_i")) {
        to_col = "T_o";
        qs_col = "Q_solar";
        qh_col = "Q_hvac";
        ti_col = "T_i";
        if (f.has("Q_internal")) qi_col = "Q_internal";
        r.zone = zone_flag.empty() ? "zone" : zone_flag;
    } else {
        std::vector<std::string> zones;
        for (const auto& name : f.names) {
            if (name.rfind("Ti_", 0) == 0 && name.size() > 5 &&
                name.compare(name.size() - 2, 2, "_C") == 0) {
                zones.push_back(name.substr(3, name.size() - 5));
            }
        }
        if (zones.empty()) {
            throw FormatError("data: no T_i or Ti_<zone>_C column found");
        }
        r.zone = zone_flag.empty() ? zones.front() : zone_flag;
        if (zone_flag.empty() && zones.size() > 1) {
            throw ConfigError("data: several zones present, pick one with --zone");
        }
        to_col = "To";
        qs_col = "Qsolar";
        ti_col = "Ti_" + r.zone + "_C";
        qh_col = "Qhvac_" + r.zone + "_W";
        if (!f.has(ti_col)) throw FormatError("data: no column '" + ti_col + "'");
    }
    TimeSeries To = f.series(to_col, "C");
    TimeSeries Qs = f.series(qs_col, "W");
    // Internal gains, when present, are heat like solar gains; they share the channel.
    if (!qi_col.empty()) {
        std::vector<double> v(Qs.size());
        const auto& qi = f.column(qi_col);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] = Qs[k] + qi[k];
        Qs = TimeSeries(qs_col, "W", Qs.t0(), Qs.dt(), std::move(v));
    }
    r.output = f.series(ti_col, "C");
    if (topology == LoopTopology::AddedToSolar) {
        if (f.has(qh_col)) {
            std::vector<double> v(Qs.size());
            const auto& qh = f.column(qh_col);
            for (std::size_t k = 0; k < v.size(); ++k) v[k] = Qs[k] + qh[k];
            r.inputs = {To, TimeSeries("Qsolar_plus_Qhvac", "W", Qs.t0(), Qs.dt(), std::move(v))};
        } else {
            r.inputs = {To, Qs};
        }
    } else {
        if (!f.has(qh_col)) {
            throw FormatError("data: no actuation column '" + qh_col +
                              "' (use --topology added for free-float data)");
        }
        r.inputs = {To, Qs, f.series(qh_col, "W")};
    }
    return r;
}

std::string fmt_g(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string render_verdict(const CaseVerdict& v) {
    std::ostringstream os;
    os << "case " << v.case_id << "\n";
    os << "  possible:    " << (v.possible ? "yes" : "no") << "\n";
    os << "  limitation:  " << to_string(v.limitation) << "\n";
    os << "  order:       " << v.order << "\n";
    os << "  C_f(Ti):     " << fmt_g(v.crest_Ti) << "\n";
    os << "  mu_e id:     " << fmt_g(v.mu_e_id) << " C (identification record)\n";
    os << "  mu_e app:    " << fmt_g(v.mu_e_app) << " C\n";
    os << "  sigma app:   " << fmt_g(v.sigma_e_app) << " C\n";
    if (v.report.energy_ref_J > 0.0 || v.report.energy_si_J > 0.0) {
        os << "  energy:      ref " << fmt_g(v.report.energy_ref_J) << " J, model "
           << fmt_g(v.report.energy_si_J) << " J, rel err " << fmt_g(v.report.energy_rel_err)
           << "\n";
    }
    if (v.switching_ref_per_h) {
        os << "  switching/h: ref " << fmt_g(*v.switching_ref_per_h) << ", model "
           << fmt_g(*v.switching_si_per_h) << "\n";
    }
    if (v.band_T_pct) {
        os << "  in band:     " << fmt_g(*v.band_T_pct) << " %\n";
    }
    if (!v.order_rows.empty()) {
        os << "  order  mu_e(C)   sigma(C)  fit%\n";
        for (const auto& row : v.order_rows) {
            os << "  " << row.order << "      ";
            if (row.report) {
                os << fmt_g(row.report->mu_e) << "  " << fmt_g(row.report->sigma_e) << "  "
                   << fmt_g(row.report->fit_percent);
            } else {
                os << "error: " << row.error;
            }
            os << "\n";
        }
    }
    for (const auto& n : v.notes) os << "  note: " << n << "\n";
    for (const auto& e : v.errors) os << "  error: " << e << "\n";
    return os.str();
}

std::string render_sweep(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "order  T_heat  T_cool  C_f(Ti)   mu_e,id   mu_e,app  sigma,app  gate\n";
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            os << r.order << "  " << r.T_heat_C << "  " << r.T_cool_C << "  error: " << r.error
               << "\n";
            continue;
        }
        os << r.order << "      " << fmt_g(r.T_heat_C) << "    " << fmt_g(r.T_cool_C) << "    "
           << fmt_g(r.crest_Ti) << "    " << fmt_g(r.mu_e_id) << "    " << fmt_g(r.mu_e_app)
           << "    " << fmt_g(r.sigma_e_app) << "    " << (r.gate_pass ? "pass" : "fail") << "\n";
    }
    return os.str();
}

int cmd_synth(const Args& a) {
    const Climate c = load_or_synth_climate(a);
    Frame f;
    f.add(c.To_C);
    f.add(c.Qsolar_W);
    f.add(c.RHo_pct);
    const auto path = out_dir(a) / "climate.csv";
    write_frame_csv(path, f);
    std::cout << "wrote " << path.string() << " (" << f.rows() << " samples)\n";
    return 0;
}

int cmd_simulate(const Args& a) {
    const BuildingConfig cfg = load_config(a);
    const Climate c = load_or_synth_climate(a);
    const auto sp = parse_setpoints(a);
    const bool free_float = a.has("free-float") || !sp.has_value();
    std::optional<HvacConfig> hvac;
    std::optional<OnOffSetpoints> ctrl;
    if (!free_float) {
        hvac = cfg.hvac;
        ctrl = sp;
    }
    const double dt_out = parse_double_flag(a, "dt", c.dt());
    const SimResult r = a.has("ham") ? simulate_ham(cfg.building, c, hvac, ctrl, dt_out)
                                     : simulate(cfg.building, c, hvac, ctrl, dt_out);
    const auto path = out_dir(a) / "sim.csv";
    write_frame_csv(path, frame_from(c, r));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::cout << "wrote " << path.string() << " (" << r.zones.size() << " zones, "
              << r.zones.front().T_C.size() << " samples)\n";
    return 0;
}

int cmd_identify(const Args& a) {
    if (!a.has("data")) throw ConfigError("--data FILE is required");
    const Frame f = read_frame_csv(a.get("data"));
    const ResolvedData d = resolve_id_columns(f, a.get("zone"), parse_topology(a));
    const std::vector<int> orders = parse_orders(a);

    const auto rows = select_order(d.inputs, {d.output}, orders, IdentificationConfig{});
    std::vector<TimeSeries> in1, in2, out1, out2;
    for (const auto& s : d.inputs) {
        auto [x, y] = s.split_halves();
        in1.push_back(std::move(x));
        in2.push_back(std::move(y));
    }
    {
        auto [x, y] = d.output.split_halves();
        out1.push_back(std::move(x));
        out2.push_back(std::move(y));
    }
    const StateSpaceModel model =
        estimate_subspace(in1, out1, orders.back(), IdentificationConfig{});
    const FitReport held = validate(model, in2, out2);

    const auto dir = out_dir(a);
    write_model_json(dir / "model.json", model);
    std::cout << "order  mu_e(C)   sigma(C)  fit%\n";
    for (const auto& row : rows) {
        std::cout << row.order << "      ";
        if (row.report) {
            std::cout << fmt_g(row.report->mu_e) << "  " << fmt_g(row.report->sigma_e) << "  "
                      << fmt_g(row.report->fit_percent);
        } else {
            std::cout << "error: " << row.error;
        }
        std::cout << "\n";
    }
    std::cout << "kept order " << orders.back() << " (held-out mu_e " << fmt_g(held.mu_e)
              << " C), wrote " << (dir / "model.json").string() << "\n";
    for (const auto& w : model.info.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_diagnose(const Args& a) {
    if (!a.has("data")) throw ConfigError("--data FILE is required");
    const std::string path = a.get("data");
    std::vector<TimeSeries> series;
    std::ifstream probe(path);
    std::string first_line;
    std::getline(probe, first_line);
    probe.close();
    if (first_line.rfind("name,unit", 0) == 0) {
        series.push_back(read_series_csv(path));
    } else {
        const Frame f = read_frame_csv(path);
        if (a.has("column")) {
            series.push_back(f.series(a.get("column"), ""));
        } else {
            for (const auto& name : f.names) series.push_back(f.series(name, ""));
        }
    }
    const auto dir = out_dir(a);
    for (const auto& s : series) {
        const SignalDiagnostics d = diagnose(s);
        std::cout << s.name() << ":\n";
        std::cout << "  samples:        " << s.size() << " @ dt " << s.dt() << " s\n";
        std::cout << "  sample freq:    " << fmt_g(d.sample_freq_hz) << " Hz (nyquist "
                  << fmt_g(d.nyquist_freq_hz) << " Hz)\n";
        std::cout << "  mean / rms:     " << fmt_g(d.mean) << " / " << fmt_g(d.rms) << "\n";
        std::cout << "  crest raw:      "
                  << (d.crest_raw ? fmt_g(*d.crest_raw) : std::string("not defined")) << "\n";
        std::cout << "  crest centered: "
                  << (d.crest_centered ? fmt_g(*d.crest_centered) : std::string("not defined"))
                  << "\n";
        if (s.size() >= 4) {
            const Spectrum sp = spectrum(s);
            const auto peak = dominant_peak(sp);
            std::cout << "  dominant peak:  " << fmt_g(peak.second) << " @ " << fmt_g(peak.first)
                      << " Hz\n";
            Frame sf;
            sf.t0 = 0.0;
            sf.dt = sp.freqs_hz.size() > 1 ? sp.freqs_hz[1] : 0.0;
            sf.add("freq_hz", sp.freqs_hz);
            sf.add("magnitude", sp.magnitudes);
            write_frame_csv(dir / ("spectrum_" + s.name() + ".csv"), sf);
        }
    }
    return 0;
}

int cmd_loop(const Args& a) {
    if (!a.has("model")) throw ConfigError("--model FILE is required");
    const BuildingConfig cfg = load_config(a);
    const StateSpaceModel model = read_model_json(a.get("model"));
    const Climate c = load_or_synth_climate(a);
    const auto sp = parse_setpoints(a);
    if (!sp) throw ConfigError("--setpoints Th,Tc is required");
    const std::string zone = a.get("zone", cfg.study_zone);
    const SimResult r =
        simulate_closed_loop(model, c, *sp, cfg.hvac, parse_topology(a), zone);
    const auto path = out_dir(a) / "loop.csv";
    write_frame_csv(path, frame_from(c, r));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    const auto bands = within_band_fraction(r, *sp);
    std::cout << "wrote " << path.string() << "\n";
    for (const auto& b : bands) {
        std::cout << b.zone << ": " << fmt_g(b.T_pct) << " % of samples in the temperature band";
        if (b.RH_pct_in) std::cout << ", " << fmt_g(*b.RH_pct_in) << " % in the RH band";
        std::cout << "\n";
    }
    const auto energies = annual_energy(r);
    for (const auto& e : energies) {
        std::cout << e.zone << ": heating " << fmt_g(e.heating_J) << " J, cooling "
                  << fmt_g(e.cooling_J) << " J\n";
    }
    return 0;
}

RunOptions options_from(const Args& a, const BuildingConfig& cfg) {
    RunOptions opt;
    opt.seed = static_cast<std::uint64_t>(parse_long_flag(a, "seed", 0));
    opt.dt = parse_double_flag(a, "dt", 3600.0);
    opt.days = static_cast<int>(parse_long_flag(a, "days", 365));
    opt.fine_dt = parse_double_flag(a, "fine-dt", 60.0);
    if (a.has("orders")) opt.orders = parse_orders(a);
    opt.setpoints = parse_setpoints(a);
    if (a.has("topology")) opt.topology = parse_topology(a);
    opt.zone = a.get("zone", cfg.study_zone);
    return opt;
}

int cmd_case(const Args& a) {
    const BuildingConfig cfg = load_config(a);
    if (a.positional.empty()) {
        throw ConfigError("case needs an id: I, II, III, IV, V, HAM, EXT or all");
    }
    std::vector<std::string> ids;
    if (a.positional[0] == "all") {
        ids = {"I", "II", "III", "IV", "V", "HAM", "EXT"};
    } else {
        ids = a.positional;
    }
    const RunOptions opt = options_from(a, cfg);
    const auto dir = out_dir(a);
    int failures = 0;
    for (const auto& id : ids) {
        const CaseVerdict v = run_case(id, cfg.building, cfg.hvac, opt);
        const auto path = dir / ("case" + id + "_verdict.json");
        write_verdict_json(path, v);
        std::cout << render_verdict(v);
        std::cout << "wrote " << path.string() << "\n";
        if (!v.errors.empty()) ++failures;
    }
    return failures == 0 ? 0 : 2;
}

int cmd_sweep(const Args& a) {
    const BuildingConfig cfg = load_config(a);
    const RunOptions opt = options_from(a, cfg);
    std::vector<std::pair<double, double>> bands;
    const std::string bands_flag = a.get("bands", "16,22;18,22;20,22;21,22");
    std::istringstream iss(bands_flag);
    std::string tok;
    while (std::getline(iss, tok, ';')) {
        const auto v = parse_double_list(tok, ',');
        if (v.size() != 2) throw ConfigError("--bands: expected 'Th,Tc;Th,Tc;...'");
        bands.emplace_back(v[0], v[1]);
    }
    const std::vector<int> orders = parse_orders(a);
    const auto path = out_dir(a) / "sweep.csv";

    // Rows land on disk as they finish so partial sweeps are still usable.
    std::vector<SweepRow> done;
    for (const auto& band : bands) {
        const auto rows = setpoint_sweep(cfg.building, cfg.hvac, opt, {band}, orders);
        done.insert(done.end(), rows.begin(), rows.end());
        write_sweep_csv(path, done);
    }
    std::cout << render_sweep(done);
    std::cout << "wrote " << path.string() << "\n";
    return 0;
}

int cmd_import(const Args& a) {
    if (!a.has("data")) throw ConfigError("--data FILE is required");
    const BuildingConfig cfg = load_config(a);
    const Frame f = read_frame_csv(a.get("data"));
    const ResolvedData d = resolve_id_columns(f, a.get("zone"), LoopTopology::SeparateInput);
    const std::vector<int> orders = parse_orders(a);
    const auto sp = parse_setpoints(a);
    if (!sp) throw ConfigError("--setpoints Th,Tc is required (the application band)");

    std::vector<TimeSeries> in1, in2, out1, out2;
    for (const auto& s : d.inputs) {
        auto [x, y] = s.split_halves();
        in1.push_back(std::move(x));
        in2.push_back(std::move(y));
    }
    {
        auto [x, y] = d.output.split_halves();
        out1.push_back(std::move(x));
        out2.push_back(std::move(y));
    }
    const StateSpaceModel model =
        estimate_subspace(in1, out1, orders.back(), IdentificationConfig{});
    const FitReport held = validate(model, in2, out2);
    const double crest = crest_factor(d.output, true);
    const GateResult gate = accuracy_gate(crest, held.mu_e);

    // Close the loop on the imported exogenous data.
    Climate c;
    c.To_C = TimeSeries("To", "C", d.inputs[0].t0(), d.inputs[0].dt(), d.inputs[0].values());
    c.Qsolar_W =
        TimeSeries("Qsolar", "W", d.inputs[1].t0(), d.inputs[1].dt(), d.inputs[1].values());
    c.RHo_pct = TimeSeries("RHo", "pct", d.inputs[0].t0(), d.inputs[0].dt(),
                           std::vector<double>(d.inputs[0].size(), 50.0));
    const SimResult loop = simulate_closed_loop(model, c, *sp, cfg.hvac,
                                                LoopTopology::SeparateInput, d.zone);
    const auto bands = within_band_fraction(loop, *sp);

    const auto dir = out_dir(a);
    write_model_json(dir / "model.json", model);
    write_frame_csv(dir / "loop.csv", frame_from(c, loop));

    std::ostringstream rep;
    rep << "imported " << a.get("data") << " (" << d.output.size() << " samples, dt "
        << d.output.dt() << " s)\n";
    rep << "order " << orders.back() << ", held-out mu_e " << fmt_g(held.mu_e) << " C, C_f(Ti) "
        << fmt_g(crest) << ", gate " << (gate.pass ? "pass" : "fail") << "\n";
    rep << "closed loop at " << sp->T_heat_C << "/" << sp->T_cool_C << " C: "
        << fmt_g(bands.front().T_pct) << " % of samples in band\n";
    std::ofstream out(dir / "import_report.txt");
    out << rep.str();
    out.close();
    std::cout << rep.str();
    std::cout << "wrote " << (dir / "model.json").string() << ", "
              << (dir / "loop.csv").string() << ", " << (dir / "import_report.txt").string()
              << "\n";
    return 0;
}

int cmd_report(const Args& a) {
    bool did = false;
    if (a.has("verdict")) {
        std::ifstream in(a.get("verdict"));
        if (!in) throw FormatError("cannot open '" + a.get("verdict") + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(a.get("verdict") + ": " + e.what());
        }
        std::cout << "case " << j.value("case", std::string("?")) << "\n";
        std::cout << "  possible:    " << (j.value("possible", false) ? "yes" : "no") << "\n";
        std::cout << "  limitation:  " << j.value("limitation", std::string("?")) << "\n";
        std::cout << "  order:       " << j.value("order", 0) << "\n";
        std::cout << "  C_f(Ti):     " << fmt_g(j.value("crest_Ti", 0.0)) << "\n";
        std::cout << "  mu_e id:     " << fmt_g(j.value("mu_e_id", 0.0)) << " C\n";
        std::cout << "  mu_e app:    " << fmt_g(j.value("mu_e_app", 0.0)) << " C\n";
        std::cout << "  sigma app:   " << fmt_g(j.value("sigma_e_app", 0.0)) << " C\n";
        if (j.contains("order_rows") && !j["order_rows"].empty()) {
            std::cout << "  order  mu_e(C)   sigma(C)  fit%\n";
            for (const auto& row : j["order_rows"]) {
                std::cout << "  " << row.value("order", 0) << "      ";
                if (row.contains("mu_e")) {
                    std::cout << fmt_g(row.value("mu_e", 0.0)) << "  "
                              << fmt_g(row.value("sigma_e", 0.0)) << "  "
                              << fmt_g(row.value("fit_percent", 0.0));
                } else {
                    std::cout << "error: " << row.value("error", std::string());
                }
                std::cout << "\n";
            }
        }
        for (const auto& n : j.value("notes", std::vector<std::string>{})) {
            std::cout << "  note: " << n << "\n";
        }
        for (const auto& e : j.value("errors", std::vector<std::string>{})) {
            std::cout << "  error: " << e << "\n";
        }
        did = true;
    }
    if (a.has("sweep")) {
        const auto rows_path = a.get("sweep");
        std::ifstream in(rows_path);
        if (!in) throw FormatError("cannot open '" + rows_path + "'");
        std::string line;
        std::getline(in, line);
        if (line.rfind("order,", 0) != 0) {
            throw FormatError(rows_path + ": not a sweep table");
        }
        std::cout << "order  T_heat  T_cool  C_f(Ti)   mu_e,id   mu_e,app  sigma,app  gate\n";
        while (std::getline(in, line)) {
            for (char& c : line) {
                if (c == ',') c = ' ';
            }
            std::cout << line << "\n";
        }
        did = true;
    }
    if (!did) throw ConfigError("report needs --verdict FILE or --sweep FILE");
    return 0;
}

} // namespace

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
        }
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

int main(int argc, char** argv) {
    try {
        const Args a = parse_args(argc, argv);
        if (a.command.empty() || a.command == "--help" || a.command == "help" || a.has("help")) {
            std::cout << kUsage;
            return 0;
        }
        if (a.command == "synth") return cmd_synth(a);
        if (a.command == "simulate") return cmd_simulate(a);
        if (a.command == "identify") return cmd_identify(a);
        if (a.command == "diagnose") return cmd_diagnose(a);
        if (a.command == "loop") return cmd_loop(a);
        if (a.command == "case") return cmd_case(a);
        if (a.command == "sweep") return cmd_sweep(a);
        if (a.command == "import") return cmd_import(a);
        if (a.command == "report") return cmd_report(a);
        throw climsid::ConfigError("unknown command '" + a.command + "' (see --help)");
    } catch (const std::exception& e) {
        std::cerr << "{\"error\": \"" << json_escape(e.what()) << "\"}\n";
        return 2;
    }
    return 0;
}
