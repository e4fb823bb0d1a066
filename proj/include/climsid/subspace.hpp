#pragma once

#include "climsid/statespace.hpp"
#include "climsid/timeseries.hpp"

#include <optional>
#include <string>
#include <vector>

namespace climsid {

struct IdentificationConfig {
    int horizon = 0;            // past/future block rows; 0 = auto (max(2*order, 24))
    int max_iterations = 50;    // Gauss-Newton cap (OE refinement)
    double tolerance = 1e-9;    // relative cost-decrease convergence threshold
    double regularization = 0.0;   // ridge weight >= 0 for the linear solves
    bool with_feedthrough = false; // estimate D; off for building models (no instant response)
    double sv_gap_warn = 10.0;     // warn when sigma_n / sigma_{n+1} falls below this
    double slow_mode_cap_s = 0.0;  // slowest admissible time constant in seconds; 0 = off.
                                   // A mode slower than the record can resolve soaks up
                                   // drift during estimation and then holds stale state
                                   // for months when the model runs in a loop; capping
                                   // pulls such eigenvalues onto the cap radius before
                                   // the forced-response fit.
};

struct FitReport {
    double mu_e = 0.0;        // mean absolute simulation error
    double mu_signed = 0.0;   // mean signed error
    double sigma_e = 0.0;     // standard deviation of the error
    double fit_percent = 0.0; // 100 * (1 - ||y - yhat|| / ||y - mean(y)||)
};

// Subspace projection estimate (MOESP family): block-Hankel data matrices over past and
// future horizons, LQ factorization to project future outputs onto past data with future
// inputs removed, SVD for the extended observability range, C and A by shift invariance,
// then B (optionally D) and the initial state by linear least squares on the simulation
// equations. Channels are variance-normalized internally for conditioning; the returned
// matrices are in original units.
// Throws RankDeficient when the data supports fewer than `order` directions; a small
// singular-value gap is reported as a warning on the model, not an error.
StateSpaceModel estimate_subspace(const std::vector<TimeSeries>& inputs,
                                  const std::vector<TimeSeries>& outputs, int order,
                                  const IdentificationConfig& cfg = {});

// Least-squares initial state from the first max(2n, 20) samples of the window.
Eigen::VectorXd estimate_initial_state(const StateSpaceModel& m,
                                       const std::vector<TimeSeries>& inputs,
                                       const std::vector<TimeSeries>& outputs);

// Error metrics of y vs yhat, pooled over channels (means per channel for fit_percent).
FitReport fit_metrics(const std::vector<TimeSeries>& y, const std::vector<TimeSeries>& yhat);

// Simulate the model over the validation window (initial state estimated per the rule
// above) and report simulation-error metrics.
FitReport validate(const StateSpaceModel& m, const std::vector<TimeSeries>& inputs,
                   const std::vector<TimeSeries>& outputs);

struct OrderSweepRow {
    int order = 0;
    std::optional<FitReport> report;   // empty when this order failed
    std::string error;                 // failure reason for this row, if any
};

// estimate + validate per order on the split halves of the data; per-order failures are
// recorded in the row and do not abort the sweep. Rows come back sorted by order.
std::vector<OrderSweepRow> select_order(const std::vector<TimeSeries>& inputs,
                                        const std::vector<TimeSeries>& outputs,
                                        const std::vector<int>& orders,
                                        const IdentificationConfig& cfg = {});

} // namespace climsid
