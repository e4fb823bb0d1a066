#include "climsid/io.hpp"

#include "climsid/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace climsid {

namespace {

std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view sv) {
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r')) {
        sv.remove_prefix(1);
    }
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) {
        sv.remove_suffix(1);
    }
    return sv;
}

double parse_num(std::string_view sv, const std::filesystem::path& path, std::size_t line_no) {
    sv = trim(sv);
    double v = 0.0;
    auto res = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (res.ec != std::errc() || res.ptr != sv.data() + sv.size()) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected a number, got '" +
                          std::string(sv) + "'");
    }
    return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

void check_field_name(const std::string& name) {
    if (name.empty() || name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
        throw ConfigError("csv: field name '" + name + "' is empty or contains a separator");
    }
}

class AtomicWriter {
public:
    explicit AtomicWriter(const std::filesystem::path& path)
        : path_(path), tmp_(path.string() + ".tmp") {
        out_.open(tmp_, std::ios::binary | std::ios::trunc);
        if (!out_) {
            throw FormatError("cannot open '" + tmp_.string() + "' for writing");
        }
    }
    std::ofstream& stream() { return out_; }
    void commit() {
        out_.flush();
        if (!out_) {
            throw FormatError("write failed for '" + tmp_.string() + "'");
        }
        out_.close();
        std::filesystem::rename(tmp_, path_);
    }
    ~AtomicWriter() {
        if (out_.is_open()) {
            out_.close();
            std::error_code ec;
            std::filesystem::remove(tmp_, ec);
        }
    }

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
};

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open '" + path.string() + "'");
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

} // namespace

void write_series_csv(const std::filesystem::path& path, const TimeSeries& s) {
    check_field_name(s.name());
    check_field_name(s.unit());
    AtomicWriter w(path);
    auto& out = w.stream();
    out << "name,unit,t0,dt\n";
    out << s.name() << ',' << s.unit() << ',' << fmt(s.t0()) << ',' << fmt(s.dt()) << '\n';
    for (double v : s.values()) {
        out << fmt(v) << '\n';
    }
    w.commit();
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 2 || trim(lines[0]) != "name,unit,t0,dt") {
        throw FormatError(path.string() + ": missing 'name,unit,t0,dt' header");
    }
    const auto meta = split_csv(lines[1]);
    if (meta.size() != 4) {
        throw FormatError(path.string() + ":2: expected 4 metadata fields");
    }
    const double t0 = parse_num(meta[2], path, 2);
    const double dt = parse_num(meta[3], path, 2);
    std::vector<double> values;
    values.reserve(lines.size() - 2);
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        values.push_back(parse_num(lines[i], path, i + 1));
    }
    return TimeSeries(std::string(meta[0]), std::string(meta[1]), t0, dt, std::move(values));
}

bool Frame::has(const std::string& name) const {
    for (const auto& n : names) {
        if (n == name) return true;
    }
    return false;
}

const std::vector<double>& Frame::column(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return columns[i];
    }
    throw FormatError("frame: no column '" + name + "'");
}

TimeSeries Frame::series(const std::string& name, const std::string& unit) const {
    return TimeSeries(name, unit, t0, dt, column(name));
}

void Frame::add(const std::string& name, const std::vector<double>& values) {
    check_field_name(name);
    if (!columns.empty() && values.size() != rows()) {
        throw ConfigError("frame: column '" + name + "' length differs from existing columns");
    }
    if (has(name)) {
        throw ConfigError("frame: duplicate column '" + name + "'");
    }
    names.push_back(name);
    columns.push_back(values);
}

void Frame::add(const TimeSeries& s) {
    if (!columns.empty() && (s.t0() != t0 || s.dt() != dt)) {
        throw DtMismatch("frame: series '" + s.name() + "' is on a different grid");
    }
    if (columns.empty()) {
        t0 = s.t0();
        dt = s.dt();
    }
    add(s.name(), s.values());
}

Frame frame_from(const Climate& climate, const SimResult& result) {
    climate.validate();
    Frame f;
    f.add(climate.To_C);
    f.add(climate.Qsolar_W);
    f.add(climate.RHo_pct);
    for (const auto& z : result.zones) {
        f.add(z.T_C);
        if (z.X_kgkg) f.add(*z.X_kgkg);
        if (z.RH_pct) f.add(*z.RH_pct);
        if (z.Q_hvac_W) f.add(*z.Q_hvac_W);
        if (z.m_moist_kgs) f.add(*z.m_moist_kgs);
    }
    return f;
}

Climate climate_from(const Frame& frame) {
    Climate c;
    c.To_C = frame.series("To", "C");
    c.Qsolar_W = frame.series("Qsolar", "W");
    c.RHo_pct = frame.series("RHo", "pct");
    c.validate();
    return c;
}

void write_frame_csv(const std::filesystem::path& path, const Frame& frame) {
    if (frame.names.empty()) {
        throw ConfigError("frame: nothing to write");
    }
    AtomicWriter w(path);
    auto& out = w.stream();
    out << "t0,dt\n" << fmt(frame.t0) << ',' << fmt(frame.dt) << '\n';
    for (std::size_t i = 0; i < frame.names.size(); ++i) {
        out << frame.names[i] << (i + 1 < frame.names.size() ? ',' : '\n');
    }
    const std::size_t n = frame.rows();
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < frame.columns.size(); ++i) {
            out << fmt(frame.columns[i][k]) << (i + 1 < frame.columns.size() ? ',' : '\n');
        }
    }
    w.commit();
}

Frame read_frame_csv(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    if (lines.size() < 3 || trim(lines[0]) != "t0,dt") {
        throw FormatError(path.string() + ": missing 't0,dt' header");
    }
    const auto meta = split_csv(lines[1]);
    if (meta.size() != 2) {
        throw FormatError(path.string() + ":2: expected 2 metadata fields");
    }
    Frame f;
    f.t0 = parse_num(meta[0], path, 2);
    f.dt = parse_num(meta[1], path, 2);
    for (auto name : split_csv(lines[2])) {
        if (name.empty()) {
            throw FormatError(path.string() + ":3: empty column name");
        }
        f.names.emplace_back(name);
    }
    f.columns.assign(f.names.size(), {});
    for (std::size_t i = 3; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cells = split_csv(lines[i]);
        if (cells.size() != f.names.size()) {
            throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected " +
                              std::to_string(f.names.size()) + " cells, got " +
                              std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            f.columns[c].push_back(parse_num(cells[c], path, i + 1));
        }
    }
    if (f.rows() == 0) {
        throw FormatError(path.string() + ": no data rows");
    }
    return f;
}

namespace {

struct ConfigLine {
    std::size_t no;
    std::string key;
    std::string value;
};

} // namespace

BuildingConfig read_building_config(const std::filesystem::path& path) {
    const auto lines = read_lines(path);
    BuildingConfig cfg;
    ZoneParams* zone = nullptr;
    std::string section;

    auto fail = [&](std::size_t no, const std::string& msg) -> void {
        throw FormatError(path.string() + ":" + std::to_string(no) + ": " + msg);
    };

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t no = i + 1;
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(no, "unterminated section header");
            std::string_view inner = trim(line.substr(1, line.size() - 2));
            if (inner.substr(0, 5) == "zone ") {
                cfg.building.zones.emplace_back();
                zone = &cfg.building.zones.back();
                zone->name = std::string(trim(inner.substr(5)));
                if (zone->name.empty()) fail(no, "zone section needs a name");
                section = "zone";
            } else if (inner == "hvac") {
                section = "hvac";
                zone = nullptr;
            } else if (inner == "study") {
                section = "study";
                zone = nullptr;
            } else {
                fail(no, "unknown section '" + std::string(inner) + "'");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) fail(no, "expected 'key = value'");

        if (section == "zone") {
            if (key == "air_capacitance") {
                zone->air_capacitance_J_per_K = parse_num(value, path, no);
            } else if (key == "vent_conductance") {
                zone->vent_conductance_W_per_K = parse_num(value, path, no);
            } else if (key == "solar_gain_factor") {
                zone->solar_gain_factor = parse_num(value, path, no);
            } else if (key == "branch") {
                WallBranch b;
                bool have_r = false, have_c = false;
                std::istringstream iss{value};
                std::string tok;
                while (iss >> tok) {
                    const auto teq = tok.find('=');
                    if (teq == std::string::npos) fail(no, "branch token '" + tok + "' is not key=value");
                    const std::string tk = tok.substr(0, teq);
                    const double tv = parse_num(tok.substr(teq + 1), path, no);
                    if (tk == "R") {
                        b.R_K_per_W = tv;
                        have_r = true;
                    } else if (tk == "C") {
                        b.C_J_per_K = tv;
                        have_c = true;
                    } else if (tk == "split") {
                        b.split = tv;
                    } else {
                        fail(no, "unknown branch field '" + tk + "'");
                    }
                }
                if (!have_r || !have_c) fail(no, "branch needs at least R= and C=");
                zone->branches.push_back(b);
            } else if (key.rfind("couple ", 0) == 0) {
                const std::string nb(trim(std::string_view(key).substr(7)));
                if (nb.empty()) fail(no, "couple needs a neighbor zone name");
                zone->interzone_W_per_K[nb] = parse_num(value, path, no);
            } else if (key == "moisture_air_mass") {
                zone->moisture.air_mass_kg = parse_num(value, path, no);
            } else if (key == "moisture_vent_exchange") {
                zone->moisture.vent_exchange_kgs = parse_num(value, path, no);
            } else if (key == "moisture_production") {
                zone->moisture.production_kgs = parse_num(value, path, no);
            } else if (key == "moisture_buffer_mass") {
                zone->moisture.buffer_mass_kg = parse_num(value, path, no);
            } else if (key == "moisture_buffer_exchange") {
                zone->moisture.buffer_exchange_kgs = parse_num(value, path, no);
            } else {
                fail(no, "unknown zone key '" + key + "'");
            }
        } else if (section == "hvac") {
            if (key == "Q_heat_max") {
                cfg.hvac.Q_heat_max_W = parse_num(value, path, no);
            } else if (key == "Q_cool_max") {
                cfg.hvac.Q_cool_max_W = parse_num(value, path, no);
            } else if (key == "hum_max") {
                cfg.hvac.hum_max_kgs = parse_num(value, path, no);
            } else if (key == "dehum_max") {
                cfg.hvac.dehum_max_kgs = parse_num(value, path, no);
            } else {
                fail(no, "unknown hvac key '" + key + "'");
            }
        } else if (section == "study") {
            if (key == "zone") {
                cfg.study_zone = value;
            } else {
                fail(no, "unknown study key '" + key + "'");
            }
        } else {
            fail(no, "key outside any section");
        }
    }

    try {
        cfg.building.validate();
        cfg.hvac.validate();
        if (cfg.study_zone.empty()) {
            cfg.study_zone = cfg.building.zones.at(0).name;
        } else {
            cfg.building.zone_index(cfg.study_zone);
        }
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return cfg;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw FormatError("model json: '" + what + "' must be a non-empty 2d array");
    }
    const auto rows = j.size();
    const auto cols = j[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols) {
            throw FormatError("model json: ragged rows in '" + what + "'");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) {
                throw FormatError("model json: non-numeric entry in '" + what + "'");
            }
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
        }
    }
    return m;
}

void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j) {
    AtomicWriter w(path);
    w.stream() << j.dump(2) << '\n';
    w.commit();
}

} // namespace

void write_model_json(const std::filesystem::path& path, const StateSpaceModel& m) {
    m.require_consistent();
    nlohmann::json j;
    j["dt"] = m.dt;
    j["A"] = matrix_to_json(m.A);
    j["B"] = matrix_to_json(m.B);
    j["C"] = matrix_to_json(m.C);
    j["D"] = matrix_to_json(m.D);
    j["u_offset"] = std::vector<double>(m.u_offset.data(), m.u_offset.data() + m.u_offset.size());
    j["y_offset"] = std::vector<double>(m.y_offset.data(), m.y_offset.data() + m.y_offset.size());
    j["input_labels"] = m.input_labels;
    j["output_labels"] = m.output_labels;
    j["singular_values"] = m.info.singular_values;
    j["warnings"] = m.info.warnings;
    write_json_atomic(path, j);
}

StateSpaceModel read_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open '" + path.string() + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    StateSpaceModel m;
    try {
        m.dt = j.at("dt").get<double>();
        m.A = matrix_from_json(j.at("A"), "A");
        m.B = matrix_from_json(j.at("B"), "B");
        m.C = matrix_from_json(j.at("C"), "C");
        m.D = matrix_from_json(j.at("D"), "D");
        const auto uo = j.value("u_offset", std::vector<double>{});
        const auto yo = j.value("y_offset", std::vector<double>{});
        m.u_offset = Eigen::Map<const Eigen::VectorXd>(uo.data(), static_cast<Eigen::Index>(uo.size()));
        m.y_offset = Eigen::Map<const Eigen::VectorXd>(yo.data(), static_cast<Eigen::Index>(yo.size()));
        m.input_labels = j.value("input_labels", std::vector<std::string>{});
        m.output_labels = j.value("output_labels", std::vector<std::string>{});
        m.info.singular_values = j.value("singular_values", std::vector<double>{});
        m.info.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    try {
        m.require_consistent();
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return m;
}

void write_verdict_json(const std::filesystem::path& path, const CaseVerdict& v) {
    nlohmann::json j;
    j["case"] = v.case_id;
    j["possible"] = v.possible;
    j["limitation"] = to_string(v.limitation);
    j["order"] = v.order;
    j["crest_Ti"] = v.crest_Ti;
    j["mu_e_id"] = v.mu_e_id;
    j["mu_e_app"] = v.mu_e_app;
    j["sigma_e_app"] = v.sigma_e_app;
    nlohmann::json rep;
    rep["mu_abs"] = v.report.mu_abs;
    rep["mu_signed"] = v.report.mu_signed;
    rep["sigma"] = v.report.sigma;
    rep["per_zone_mu_abs"] = v.report.per_zone_mu_abs;
    rep["energy_ref_J"] = v.report.energy_ref_J;
    rep["energy_si_J"] = v.report.energy_si_J;
    rep["energy_rel_err"] = v.report.energy_rel_err;
    rep["peak_freq_ref_hz"] = v.report.peak_freq_ref_hz;
    rep["peak_freq_si_hz"] = v.report.peak_freq_si_hz;
    rep["peak_mag_ref"] = v.report.peak_mag_ref;
    rep["peak_mag_si"] = v.report.peak_mag_si;
    // Wall-clock runtimes stay out of the file so repeated runs are byte-identical.
    j["report"] = std::move(rep);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : v.order_rows) {
        nlohmann::json row;
        row["order"] = r.order;
        if (r.report) {
            row["mu_e"] = r.report->mu_e;
            row["mu_signed"] = r.report->mu_signed;
            row["sigma_e"] = r.report->sigma_e;
            row["fit_percent"] = r.report->fit_percent;
        }
        if (!r.error.empty()) row["error"] = r.error;
        rows.push_back(std::move(row));
    }
    j["order_rows"] = std::move(rows);
    if (v.switching_ref_per_h) j["switching_ref_per_h"] = *v.switching_ref_per_h;
    if (v.switching_si_per_h) j["switching_si_per_h"] = *v.switching_si_per_h;
    if (v.band_T_pct) j["band_T_pct"] = *v.band_T_pct;
    j["notes"] = v.notes;
    j["errors"] = v.errors;
    write_json_atomic(path, j);
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
    AtomicWriter w(path);
    auto& out = w.stream();
    out << "order,T_heat_C,T_cool_C,crest_Ti,mu_e_id,mu_e_app,sigma_e_app,gate,error\n";
    for (const auto& r : rows) {
        std::string err = r.error;
        for (char& c : err) {
            if (c == ',' || c == '\n') c = ';';
        }
        out << r.order << ',' << fmt(r.T_heat_C) << ',' << fmt(r.T_cool_C) << ',' << fmt(r.crest_Ti)
            << ',' << fmt(r.mu_e_id) << ',' << fmt(r.mu_e_app) << ',' << fmt(r.sigma_e_app) << ','
            << (r.gate_pass ? "pass" : "fail") << ',' << err << '\n';
    }
    w.commit();
}

} // namespace climsid
