#pragma once

#include "climsid/timeseries.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace climsid {

// Metadata attached by the estimators; round-trips through model JSON.
struct EstimationInfo {
    std::vector<double> singular_values;   // projection SVD spectrum (subspace only)
    bool converged = true;                 // Gauss-Newton convergence (OE only)
    std::vector<std::string> warnings;
};

// Discrete (dt > 0, zero-order hold) or continuous (dt == 0) linear system
//   x' / x_{k+1} = A x + B (u - u_offset),   y = C x + D (u - u_offset) + y_offset.
// The offsets carry the operating point the estimators detrended away; empty
// vectors mean zero.
struct StateSpaceModel {
    Eigen::MatrixXd A, B, C, D;
    Eigen::VectorXd u_offset, y_offset;
    double dt = 0.0;   // seconds per step; 0 marks a continuous-time model
    std::vector<std::string> input_labels;
    std::vector<std::string> output_labels;
    EstimationInfo info;

    int order() const { return static_cast<int>(A.rows()); }
    int num_inputs() const { return static_cast<int>(B.cols()); }
    int num_outputs() const { return static_cast<int>(C.rows()); }
    bool is_continuous() const { return dt == 0.0; }

    Eigen::VectorXcd eigenvalues() const;

    // Discrete: spectral radius < 1. Continuous: all real parts < 0.
    bool is_stable() const;

    // Throws ConfigError on inconsistent dimensions or negative dt.
    void require_consistent() const;
};

struct SimOutput {
    std::vector<TimeSeries> outputs;        // one per output channel
    std::vector<std::string> warnings;      // e.g. UnstableModel
};

// Zero-order-hold simulation on the inputs' grid. x0 empty means the zero state.
// The model must be discrete with dt equal to the input dt (DtMismatch otherwise);
// an unstable A is simulated anyway and flagged with a warning.
SimOutput simulate(const StateSpaceModel& m, const std::vector<TimeSeries>& inputs,
                   const Eigen::VectorXd& x0 = Eigen::VectorXd());

// Zero-order-hold discretization: Ad = exp(A dt), Bd = int_0^dt exp(A tau) dtau B,
// computed from one exponential of the augmented matrix [[A, B], [0, 0]].
StateSpaceModel c2d(const StateSpaceModel& m, double dt);

// Inverse of c2d via the principal matrix logarithm. Throws LogUndefined when an
// eigenvalue of Ad lies on the closed negative real axis (log not well-defined).
StateSpaceModel d2c(const StateSpaceModel& m);

// Symmetric Hausdorff distance between two eigenvalue sets; the toolkit compares
// identified models this way (state coordinates are free, matrix entries are not
// comparable).
double eigenvalue_set_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

// Balanced truncation of a stable discrete model to n_keep states: gramians by
// doubled Lyapunov recursion, square-root balancing, leading states kept. Offsets
// and labels carry over; D is unchanged. Throws ConfigError on an unstable A or a
// continuous model; n_keep >= order returns the model unchanged.
StateSpaceModel reduce_balanced(const StateSpaceModel& m, int n_keep);

} // namespace climsid
