#pragma once

#include "climsid/building.hpp"
#include "climsid/statespace.hpp"
#include "climsid/validation.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace climsid {

// All writers are atomic (temp file in the target directory, then rename) and print
// doubles as shortest round-trip decimals, so a write/read cycle is bit-exact.
// Formats are documented in docs/FORMATS.md.

void write_series_csv(const std::filesystem::path& path, const TimeSeries& s);
TimeSeries read_series_csv(const std::filesystem::path& path);

// Column-oriented table on one shared grid; the time column is implicit in (t0, dt).
struct Frame {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns[0].size(); }
    bool has(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;
    TimeSeries series(const std::string& name, const std::string& unit) const;
    void add(const std::string& name, const std::vector<double>& values);
    void add(const TimeSeries& s);
};

// Climate plus every zone series of a simulation in one table.
Frame frame_from(const Climate& climate, const SimResult& result);
Climate climate_from(const Frame& frame);

void write_frame_csv(const std::filesystem::path& path, const Frame& frame);
Frame read_frame_csv(const std::filesystem::path& path);

struct BuildingConfig {
    Building building;
    HvacConfig hvac;
    std::string study_zone;
};

// INI-style building description; see docs/FORMATS.md for the key set.
BuildingConfig read_building_config(const std::filesystem::path& path);

void write_model_json(const std::filesystem::path& path, const StateSpaceModel& m);
StateSpaceModel read_model_json(const std::filesystem::path& path);

void write_verdict_json(const std::filesystem::path& path, const CaseVerdict& v);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

} // namespace climsid
