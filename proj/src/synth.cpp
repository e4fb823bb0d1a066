#include "climsid/synth.hpp"

#include "climsid/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace climsid {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSolarPeakW = 2200.0;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Box-Muller on explicit 53-bit uniforms; std::normal_distribution is not pinned
// across library versions, this is.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : eng_(seed) {}
    double operator()() {
        const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 eng_;
};

} // namespace

Climate synth_climate(std::uint64_t seed, int year, int days, double dt) {
    if (days <= 0) throw ConfigError("synth_climate: days must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("synth_climate: dt must be positive");

    const auto n = static_cast<std::size_t>(std::llround(days * 86400.0 / dt));
    if (n == 0) throw ConfigError("synth_climate: fewer than one sample");

    Gaussian gauss(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(year))));

    const double phi_T = std::exp(-dt / (2.5 * 86400.0));
    const double phi_f = std::exp(-dt / (4.0 * 3600.0));
    const double phi_c = std::exp(-dt / (3.0 * 3600.0));
    const double phi_h = std::exp(-dt / (12.0 * 3600.0));
    const double inn_T = 2.0 * std::sqrt(1.0 - phi_T * phi_T);
    const double inn_f = 0.9 * std::sqrt(1.0 - phi_f * phi_f);
    const double inn_c = std::sqrt(1.0 - phi_c * phi_c);
    const double inn_h = 8.0 * std::sqrt(1.0 - phi_h * phi_h);
    double w_T = 0.0, w_f = 0.0, z_c = 0.0, w_h = 0.0;

    std::vector<double> To(n), Qs(n), RHo(n);
    for (std::size_t k = 0; k < n; ++k) {
        w_T = phi_T * w_T + inn_T * gauss();
        w_f = phi_f * w_f + inn_f * gauss();
        z_c = phi_c * z_c + inn_c * gauss();
        w_h = phi_h * w_h + inn_h * gauss();

        const double t = static_cast<double>(k) * dt;
        const double day = t / 86400.0;
        const double hour = std::fmod(t, 86400.0) / 3600.0;

        const double season = std::sin(2.0 * kPi * (day - 111.0) / 365.0);
        const double diurnal_amp = 2.0 + 2.0 * (0.5 + 0.5 * season);
        To[k] = 11.5 + 9.0 * season + diurnal_amp * std::sin(2.0 * kPi * (hour - 9.0) / 24.0) + w_T + w_f;

        const double envelope = 0.45 + 0.55 * 0.5 * (1.0 + std::sin(2.0 * kPi * (day - 81.0) / 365.0));
        const double shape = std::max(0.0, std::sin(kPi * (hour - 6.0) / 12.0));
        const double cloud = std::clamp(0.68 + 0.38 * std::tanh(0.9 * z_c), 0.25, 1.0);
        Qs[k] = kSolarPeakW * envelope * std::pow(shape, 1.3) * cloud;

        const double rh = 76.0 - 14.0 * std::sin(2.0 * kPi * (hour - 15.0) / 24.0) + w_h;
        RHo[k] = std::clamp(rh, 25.0, 98.0);
    }

    Climate c;
    c.To_C = TimeSeries("To", "C", 0.0, dt, std::move(To));
    c.Qsolar_W = TimeSeries("Qsolar", "W", 0.0, dt, std::move(Qs));
    c.RHo_pct = TimeSeries("RHo", "pct", 0.0, dt, std::move(RHo));
    return c;
}

} // namespace climsid
