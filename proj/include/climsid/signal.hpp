#pragma once

#include "climsid/timeseries.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace climsid {

struct SignalDiagnostics {
    double sample_freq_hz = 0.0;
    double nyquist_freq_hz = 0.0;   // always sample_freq_hz / 2
    double mean = 0.0;
    double rms = 0.0;
    double max_raw = 0.0;
    // Crest factors are undefined for zero-power signals; empty marks "not defined"
    // instead of aborting the whole diagnostics run.
    std::optional<double> crest_raw;
    std::optional<double> crest_centered;
};

struct Spectrum {
    std::vector<double> freqs_hz;     // ascending, 0 .. nyquist inclusive
    std::vector<double> magnitudes;   // same length, non-negative
    double sample_freq_hz = 0.0;
    double nyquist_freq_hz = 0.0;
};

// Peak-to-RMS ratio. Raw variant: max of the signed values over RMS of the raw values.
// Centered variant: mean is removed first and the peak is max |u - mean|; this one is
// offset-invariant and is what every accuracy gate in the toolkit uses.
// Throws ZeroPowerSignal when the applicable RMS is zero.
double crest_factor(const TimeSeries& s, bool centered);

// Length >= 2 required.
SignalDiagnostics diagnose(const TimeSeries& s);

// One-sided magnitude spectrum of the mean-removed signal. Normalized so that the sum
// of squared magnitudes equals the time-domain energy sum((x - mean)^2): bin k carries
// |X_k| * sqrt(w_k / N) with w_k = 2 except DC and (for even N) Nyquist where w_k = 1.
// Length >= 4 required.
Spectrum spectrum(const TimeSeries& s);

// Largest-magnitude bin above DC: (freq_hz, magnitude).
std::pair<double, double> dominant_peak(const Spectrum& sp);

// Operation-level wrapper over TimeSeries::split_halves (floor rule for odd lengths).
std::pair<TimeSeries, TimeSeries> split_halves(const TimeSeries& s);

// Samples amp * cos(2*pi * (cycles_num/cycles_den) * k) for k = 0..n-1 with the phase
// reduced in exact integer arithmetic and folded onto [0, pi] before cos() is called.
// Two frequencies that alias onto each other under the sample rate therefore produce
// bit-identical value arrays, which is what the Nyquist demonstrations rely on.
TimeSeries sample_cosine_cycles(double amp, std::uint64_t cycles_num,
                                std::uint64_t cycles_den, std::size_t n, double dt,
                                const std::string& name);

} // namespace climsid
