#pragma once

#include <stdexcept>
#include <string>

namespace climsid {

// Hard failures are exceptions; recoverable oddities (unstable model, loop leaving the
// plausible band, clamped humidity) are warning strings carried on result structs instead.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Signal has zero RMS power, so crest factor and excitation measures are undefined.
struct ZeroPowerSignal : Error { using Error::Error; };

// Input data cannot support the requested estimation (empty, constant, too short).
struct InsufficientExcitation : Error { using Error::Error; };

// Data matrices lost rank below the requested model order.
struct RankDeficient : Error { using Error::Error; };

// Series on mixed sample intervals, or model dt does not match data dt.
struct DtMismatch : Error { using Error::Error; };

// Matrix logarithm undefined: eigenvalue on the closed negative real axis.
struct LogUndefined : Error { using Error::Error; };

// Reference simulation produced a non-finite state.
struct InstabilityDetected : Error { using Error::Error; };

// Compared results live on different time grids or share no zones.
struct GridMismatch : Error { using Error::Error; };

// Model input layout does not fit the requested loop topology.
struct TopologyMismatch : Error { using Error::Error; };

// Building / run configuration is inconsistent or out of range.
struct ConfigError : Error { using Error::Error; };

// File content does not match the documented format.
struct FormatError : Error { using Error::Error; };

} // namespace climsid
