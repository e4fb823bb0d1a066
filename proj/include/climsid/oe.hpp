#pragma once

#include "climsid/statespace.hpp"
#include "climsid/subspace.hpp"
#include "climsid/timeseries.hpp"

#include <vector>

namespace climsid {

struct OeChannelOrders {
    int nb = 1;   // numerator coefficient count
    int nf = 1;   // denominator coefficient count past the leading 1
    int nk = 1;   // input delay in samples
};

// One input channel's transfer: (b1 z^-nk + ... + b_nb z^-(nk+nb-1)) / (1 + f1 z^-1 + ...).
struct OeChannel {
    std::vector<double> b;
    std::vector<double> f;
    int nk = 1;

    // All denominator roots strictly inside the unit circle.
    bool stable_denominator() const;
};

// Multi-input single-output output-error model: y = sum over channels of filtered input,
// with the noise entering only at the output.
struct OutputErrorModel {
    std::vector<OeChannel> channels;
    double dt = 1.0;
    EstimationInfo info;
};

// ARX least-squares initialization followed by Gauss-Newton (Levenberg-damped) descent on
// the simulation-error cost. Hitting the iteration cap with the cost still moving flags
// info.converged = false on the returned model rather than failing.
OutputErrorModel estimate_oe(const std::vector<TimeSeries>& inputs, const TimeSeries& output,
                             const std::vector<OeChannelOrders>& orders,
                             const IdentificationConfig& cfg = {});

// Difference-equation simulation with zero initial filter memory.
SimOutput simulate(const OutputErrorModel& m, const std::vector<TimeSeries>& inputs);

FitReport validate(const OutputErrorModel& m, const std::vector<TimeSeries>& inputs,
                   const TimeSeries& output);

} // namespace climsid
