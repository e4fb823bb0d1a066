#include "climsid/signal.hpp"

#include "climsid/errors.hpp"
#include "climsid/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace climsid {

namespace {

double mean_of(const std::vector<double>& v) {
    return kernels::sum(v.data(), v.size()) / static_cast<double>(v.size());
}

} // namespace

double crest_factor(const TimeSeries& s, bool centered) {
    if (s.empty()) throw InsufficientExcitation("crest_factor: empty series");
    const std::vector<double>& v = s.values();
    const double n = static_cast<double>(v.size());
    if (!centered) {
        const double rms = std::sqrt(kernels::sumsq(v.data(), v.size()) / n);
        if (rms == 0.0)
            throw ZeroPowerSignal("crest_factor(raw): signal '" + s.name() + "' has zero RMS");
        return kernels::max_val(v.data(), v.size()) / rms;
    }
    const double mu = mean_of(v);
    std::vector<double> c(v.size());
    kernels::add_scalar(v.data(), -mu, c.data(), v.size());
    const double rms = std::sqrt(kernels::sumsq(c.data(), c.size()) / n);
    if (rms == 0.0)
        throw ZeroPowerSignal("crest_factor(centered): signal '" + s.name() +
                              "' is constant, centered RMS is zero");
    return kernels::max_abs(c.data(), c.size()) / rms;
}

SignalDiagnostics diagnose(const TimeSeries& s) {
    if (s.size() < 2) throw InsufficientExcitation("diagnose: need at least 2 samples");
    SignalDiagnostics d;
    d.sample_freq_hz = 1.0 / s.dt();
    d.nyquist_freq_hz = d.sample_freq_hz / 2.0;
    const std::vector<double>& v = s.values();
    d.mean = mean_of(v);
    d.rms = std::sqrt(kernels::sumsq(v.data(), v.size()) / static_cast<double>(v.size()));
    d.max_raw = kernels::max_val(v.data(), v.size());
    try {
        d.crest_raw = crest_factor(s, false);
    } catch (const ZeroPowerSignal&) {
        d.crest_raw.reset();
    }
    try {
        d.crest_centered = crest_factor(s, true);
    } catch (const ZeroPowerSignal&) {
        d.crest_centered.reset();
    }
    return d;
}

Spectrum spectrum(const TimeSeries& s) {
    if (s.size() < 4) throw InsufficientExcitation("spectrum: need at least 4 samples");
    const std::size_t n = s.size();
    const double mu = mean_of(s.values());

    std::vector<double> in(n);
    kernels::add_scalar(s.values().data(), -mu, in.data(), n);

    const std::size_t nbins = n / 2 + 1;
    std::vector<fftw_complex> out(nbins);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                          FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    Spectrum sp;
    sp.sample_freq_hz = 1.0 / s.dt();
    sp.nyquist_freq_hz = sp.sample_freq_hz / 2.0;
    sp.freqs_hz.resize(nbins);
    sp.magnitudes.resize(nbins);
    const double df = sp.sample_freq_hz / static_cast<double>(n);
    for (std::size_t k = 0; k < nbins; ++k) {
        sp.freqs_hz[k] = df * static_cast<double>(k);
        // Parseval weighting: interior bins appear twice in the two-sided transform.
        const bool single = (k == 0) || (n % 2 == 0 && k == n / 2);
        const double w = single ? 1.0 : 2.0;
        const double re = out[k][0];
        const double im = out[k][1];
        sp.magnitudes[k] = std::sqrt((re * re + im * im) * w / static_cast<double>(n));
    }
    return sp;
}

std::pair<double, double> dominant_peak(const Spectrum& sp) {
    if (sp.magnitudes.size() < 2)
        throw InsufficientExcitation("dominant_peak: spectrum has no bins above DC");
    std::size_t best = 1;
    for (std::size_t k = 2; k < sp.magnitudes.size(); ++k)
        if (sp.magnitudes[k] > sp.magnitudes[best]) best = k;
    return {sp.freqs_hz[best], sp.magnitudes[best]};
}

std::pair<TimeSeries, TimeSeries> split_halves(const TimeSeries& s) {
    if (s.size() < 4) throw InsufficientExcitation("split_halves: need at least 4 samples");
    return s.split_halves();
}

TimeSeries sample_cosine_cycles(double amp, std::uint64_t cycles_num,
                                std::uint64_t cycles_den, std::size_t n, double dt,
                                const std::string& name) {
    if (cycles_den == 0) throw ConfigError("sample_cosine_cycles: zero denominator");
    std::vector<double> v(n);
    const std::uint64_t q = cycles_den;
    for (std::size_t k = 0; k < n; ++k) {
        // Exact phase in cycles: frac(k * p / q) as a residue, then folded onto [0, 1/2]
        // so aliased frequencies hand cos() the exact same double argument.
        const unsigned __int128 prod = static_cast<unsigned __int128>(k % q) * (cycles_num % q);
        const std::uint64_t r = static_cast<std::uint64_t>(prod % q);
        const std::uint64_t folded = std::min(r, q - r);
        const double phase = 2.0 * std::numbers::pi * (static_cast<double>(folded) /
                                                       static_cast<double>(q));
        v[k] = amp * std::cos(phase);
    }
    return TimeSeries(name, "-", 0.0, dt, std::move(v));
}

} // namespace climsid
