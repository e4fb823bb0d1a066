#include "climsid/timeseries.hpp"

#include "climsid/errors.hpp"

#include <cmath>

namespace climsid {

TimeSeries::TimeSeries(std::string name, std::string unit, double t0, double dt,
                       std::vector<double> values)
    : name_(std::move(name)), unit_(std::move(unit)), t0_(t0), dt_(dt),
      values_(std::move(values)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_))
        throw ConfigError("TimeSeries '" + name_ + "': dt must be finite and > 0");
    if (!std::isfinite(t0_))
        throw ConfigError("TimeSeries '" + name_ + "': t0 must be finite");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i]))
            throw ConfigError("TimeSeries '" + name_ + "': non-finite value at index " +
                              std::to_string(i));
    }
}

TimeSeries TimeSeries::slice(std::size_t from, std::size_t n) const {
    if (from + n > values_.size())
        throw ConfigError("TimeSeries::slice: range [" + std::to_string(from) + ", " +
                          std::to_string(from + n) + ") exceeds size " +
                          std::to_string(values_.size()));
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(from),
                          values_.begin() + static_cast<std::ptrdiff_t>(from + n));
    return TimeSeries(name_, unit_, time_at(from), dt_, std::move(v));
}

std::pair<TimeSeries, TimeSeries> TimeSeries::split_halves() const {
    const std::size_t n1 = values_.size() / 2;
    return {slice(0, n1), slice(n1, values_.size() - n1)};
}

void require_same_grid(const std::vector<const TimeSeries*>& series) {
    if (series.empty()) return;
    const TimeSeries* first = series.front();
    for (const TimeSeries* s : series) {
        if (s->dt() != first->dt() || s->t0() != first->t0() || s->size() != first->size())
            throw DtMismatch("series '" + s->name() + "' is not on the grid of '" +
                             first->name() + "' (t0/dt/length must all match)");
    }
}

} // namespace climsid
