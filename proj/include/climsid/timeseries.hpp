#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace climsid {

// Uniformly sampled series. t0 is seconds since an arbitrary epoch, dt in seconds.
// Values must be finite; constructors and mutators enforce that so numeric code
// downstream never has to re-check for NaN/inf.
class TimeSeries {
  public:
    TimeSeries() = default;
    TimeSeries(std::string name, std::string unit, double t0, double dt,
               std::vector<double> values);

    const std::string& name() const { return name_; }
    const std::string& unit() const { return unit_; }
    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    const std::vector<double>& values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    double time_at(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }

    void set_name(std::string n) { name_ = std::move(n); }
    void set_unit(std::string u) { unit_ = std::move(u); }

    // Sub-series of n samples starting at index `from`; t0 shifts accordingly.
    TimeSeries slice(std::size_t from, std::size_t n) const;

    // (first floor(N/2) samples, remainder). Concatenating the two halves in order
    // reproduces the original series exactly.
    std::pair<TimeSeries, TimeSeries> split_halves() const;

  private:
    std::string name_;
    std::string unit_;
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::vector<double> values_;
};

// Throws DtMismatch unless every series shares dt and t0 and length.
void require_same_grid(const std::vector<const TimeSeries*>& series);

} // namespace climsid
