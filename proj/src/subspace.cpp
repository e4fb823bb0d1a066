#include "climsid/subspace.hpp"

#include "climsid/errors.hpp"
#include "climsid/kernels.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

namespace climsid {

namespace {

// Least squares with optional ridge weight; plain QR when lambda == 0.
Eigen::MatrixXd solve_ls(const Eigen::MatrixXd& X, const Eigen::MatrixXd& rhs, double lambda) {
    if (lambda > 0.0) {
        Eigen::MatrixXd gram = X.transpose() * X;
        gram.diagonal().array() += lambda;
        return gram.ldlt().solve(X.transpose() * rhs);
    }
    return X.colPivHouseholderQr().solve(rhs);
}

struct Packed {
    Eigen::MatrixXd u;   // m x N
    Eigen::MatrixXd y;   // p x N
    double dt = 0.0;
    double t0 = 0.0;
};

Packed pack(const std::vector<TimeSeries>& inputs, const std::vector<TimeSeries>& outputs) {
    if (inputs.empty() || outputs.empty())
        throw InsufficientExcitation("subspace: need at least one input and one output");
    std::vector<const TimeSeries*> grid;
    for (const TimeSeries& s : inputs) grid.push_back(&s);
    for (const TimeSeries& s : outputs) grid.push_back(&s);
    require_same_grid(grid);

    Packed d;
    d.dt = inputs.front().dt();
    d.t0 = inputs.front().t0();
    const Eigen::Index N = static_cast<Eigen::Index>(inputs.front().size());
    d.u.resize(static_cast<Eigen::Index>(inputs.size()), N);
    d.y.resize(static_cast<Eigen::Index>(outputs.size()), N);
    for (std::size_t c = 0; c < inputs.size(); ++c)
        for (Eigen::Index k = 0; k < N; ++k)
            d.u(static_cast<Eigen::Index>(c), k) = inputs[c][static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < outputs.size(); ++c)
        for (Eigen::Index k = 0; k < N; ++k)
            d.y(static_cast<Eigen::Index>(c), k) = outputs[c][static_cast<std::size_t>(k)];
    return d;
}

double rms_row(const Eigen::MatrixXd& m, Eigen::Index r) {
    return std::sqrt(m.row(r).squaredNorm() / static_cast<double>(m.cols()));
}

// Least-squares line removal in place.
void detrend_row(Eigen::MatrixXd& m, Eigen::Index r) {
    const Eigen::Index N = m.cols();
    if (N < 2) return;
    const double kbar = 0.5 * static_cast<double>(N - 1);
    const double xbar = m.row(r).mean();
    double num = 0.0, den = 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
        const double dk = static_cast<double>(k) - kbar;
        num += dk * (m(r, k) - xbar);
        den += dk * dk;
    }
    const double slope = den > 0.0 ? num / den : 0.0;
    for (Eigen::Index k = 0; k < N; ++k) {
        m(r, k) -= xbar + slope * (static_cast<double>(k) - kbar);
    }
}

// Block-Hankel rows for channels of `data`, block rows [first, first+count).
void fill_hankel(const Eigen::MatrixXd& data, Eigen::Index first, Eigen::Index count,
                 Eigen::Index j, Eigen::MatrixXd& dest, Eigen::Index dest_row) {
    const Eigen::Index nch = data.rows();
    for (Eigen::Index r = 0; r < count; ++r)
        for (Eigen::Index c = 0; c < nch; ++c)
            dest.row(dest_row + r * nch + c) = data.row(c).segment(first + r, j);
}

// B, D and the initial state by least squares on the simulation equations, with A and C
// fixed. Column order of the unknown vector: x0, vec(B) column-major, vec(D) column-major.
struct ForcedLs {
    Eigen::MatrixXd B, D;
    Eigen::VectorXd x0;
};

ForcedLs estimate_forced_response(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                  const Eigen::MatrixXd& u, const Eigen::MatrixXd& y,
                                  bool with_feedthrough, double lambda) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = u.rows();
    const Eigen::Index p = y.rows();
    Eigen::Index N = u.cols();

    // An unstable A makes the regressor blow up exponentially; restrict the window so the
    // solve stays finite (the model itself is returned as estimated, with a warning upstream).
    const double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A, false)
                           .eigenvalues()
                           .array()
                           .abs()
                           .maxCoeff();
    if (rho > 1.0 + 1e-9) {
        const double max_growth = 1e9;
        const Eigen::Index cap =
            static_cast<Eigen::Index>(std::log(max_growth) / std::log(rho)) + 1;
        N = std::min(N, std::max<Eigen::Index>(cap, 4 * n));
    }

    const Eigen::Index ntheta = n + n * m + (with_feedthrough ? p * m : 0);
    Eigen::MatrixXd G(p * N, ntheta);
    Eigen::VectorXd rhs(p * N);

    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);      // d x_k / d x0
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n * m);      // d x_k / d vec(B)
    for (Eigen::Index k = 0; k < N; ++k) {
        G.block(k * p, 0, p, n) = C * P;
        G.block(k * p, n, p, n * m) = C * S;
        if (with_feedthrough) {
            G.block(k * p, n + n * m, p, p * m).setZero();
            for (Eigen::Index c = 0; c < m; ++c)
                G.block(k * p, n + n * m + c * p, p, p) =
                    u(c, k) * Eigen::MatrixXd::Identity(p, p);
        }
        rhs.segment(k * p, p) = y.col(k);

        if (k + 1 < N) {
            P = A * P;
            S = A * S;
            for (Eigen::Index c = 0; c < m; ++c)
                S.block(0, c * n, n, n).diagonal().array() += u(c, k);
        }
    }

    const Eigen::VectorXd theta = solve_ls(G, rhs, lambda);
    ForcedLs out;
    out.x0 = theta.head(n);
    out.B.resize(n, m);
    for (Eigen::Index c = 0; c < m; ++c) out.B.col(c) = theta.segment(n + c * n, n);
    out.D = Eigen::MatrixXd::Zero(p, m);
    if (with_feedthrough)
        for (Eigen::Index c = 0; c < m; ++c)
            out.D.col(c) = theta.segment(n + n * m + c * p, p);
    return out;
}

std::vector<std::string> labels_of(const std::vector<TimeSeries>& series) {
    std::vector<std::string> out;
    out.reserve(series.size());
    for (const TimeSeries& s : series) out.push_back(s.name());
    return out;
}

// Eigenvalues slower than the cap are pulled onto the cap radius, keeping the
// eigenvectors. The forced-response fit must run after this so B and D stay
// consistent with the adjusted A.
void clamp_slow_modes(Eigen::MatrixXd& A, double dt, double cap_s,
                      std::vector<std::string>& warnings) {
    if (cap_s <= 0.0 || dt <= 0.0 || A.rows() == 0) return;
    const double cap = std::exp(-dt / cap_s);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.cast<std::complex<double>>());
    if (es.info() != Eigen::Success) return;
    Eigen::VectorXcd lam = es.eigenvalues();
    int clamped = 0;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
        const double mag = std::abs(lam(k));
        if (mag > cap) {
            lam(k) *= cap / mag;
            ++clamped;
        }
    }
    if (clamped == 0) return;
    const Eigen::MatrixXcd& V = es.eigenvectors();
    const Eigen::MatrixXcd Ac = V * lam.asDiagonal() * V.inverse();
    if (!Ac.allFinite()) return;
    A = Ac.real();
    warnings.push_back(std::to_string(clamped) +
                       " mode(s) slower than the configured time-constant cap (" +
                       std::to_string(cap_s) + " s) pulled onto the cap radius");
}

StateSpaceModel estimate_direct(const std::vector<TimeSeries>& inputs,
                                const std::vector<TimeSeries>& outputs, int order,
                                const IdentificationConfig& cfg,
                                Eigen::Index* rank_seen = nullptr) {
    if (order < 1) throw ConfigError("estimate_subspace: order must be >= 1");
    Packed d = pack(inputs, outputs);
    const Eigen::Index m = d.u.rows();
    const Eigen::Index p = d.y.rows();
    const Eigen::Index N = d.u.cols();
    const Eigen::Index n = order;

    if (N < 10 * n * (m + p))
        throw InsufficientExcitation("estimate_subspace: need at least 10*n*(m+p) = " +
                                     std::to_string(10 * n * (m + p)) + " samples, got " +
                                     std::to_string(N));

    // Horizon: at least the auto rule, and tall enough that the shift equation
    // (i-1)*p >= n can determine A.
    Eigen::Index i = cfg.horizon > 0 ? cfg.horizon : std::max<Eigen::Index>(2 * n, 24);
    i = std::max(i, n / p + 2);
    if (cfg.horizon > 0 && cfg.horizon < order)
        throw ConfigError("estimate_subspace: horizon must be >= order");
    const Eigen::Index j = N - 2 * i + 1;
    const Eigen::Index rows = 2 * i * (m + p);
    if (j < rows)
        throw InsufficientExcitation("estimate_subspace: horizon too long for data length");

    // The projection stage works on detrended, variance-normalized channels: a held
    // setpoint would otherwise dominate the data numerically through its offset, and
    // a seasonal ramp would masquerade as an unstable mode. A and C only encode
    // dynamics, so nothing has to be mapped back except the output scale, and the
    // B/D stage below runs on the raw data again.
    Eigen::MatrixXd us = d.u, ys = d.y;
    Eigen::VectorXd sy(p);
    for (Eigen::Index r = 0; r < m; ++r) {
        detrend_row(us, r);
        const double s = rms_row(us, r);
        if (s > 0.0) us.row(r) /= s;
    }
    for (Eigen::Index r = 0; r < p; ++r) {
        detrend_row(ys, r);
        sy[r] = rms_row(ys, r);
        if (sy[r] > 0.0)
            ys.row(r) /= sy[r];
        else
            sy[r] = 1.0;
    }

    // W = [U_f; U_p; Y_p; Y_f], LQ via QR of the transpose.
    Eigen::MatrixXd W(rows, j);
    fill_hankel(us, i, i, j, W, 0);                 // U_f
    fill_hankel(us, 0, i, j, W, i * m);             // U_p
    fill_hankel(ys, 0, i, j, W, 2 * i * m);         // Y_p
    fill_hankel(ys, i, i, j, W, 2 * i * m + i * p); // Y_f

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(W.transpose());
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd L = R.transpose();

    const Eigen::Index rUf = i * m;
    const Eigen::Index rWp = i * m + i * p;
    const Eigen::Index rYf = i * p;
    // Part of the future outputs explained by past data once future inputs are removed;
    // its column space estimates the extended observability range.
    const Eigen::MatrixXd L32 = L.block(rUf + rWp, rUf, rYf, rWp);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(L32, Eigen::ComputeThinU);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] <= 0.0)
        throw RankDeficient("estimate_subspace: data matrix has rank 0");
    const double rank_tol = 1e-10 * sv[0];
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv[rank] > rank_tol) ++rank;
    if (rank_seen) *rank_seen = rank;
    if (rank < n)
        throw RankDeficient("estimate_subspace: data rank " + std::to_string(rank) +
                            " < requested order " + std::to_string(n));

    StateSpaceModel model;
    model.info.singular_values.assign(sv.data(), sv.data() + sv.size());
    if (n < sv.size() && sv[n] > 0.0 && sv[n - 1] / sv[n] < cfg.sv_gap_warn)
        model.info.warnings.push_back(
            "small singular-value gap at order " + std::to_string(n) + " (" +
            std::to_string(sv[n - 1] / sv[n]) + " < " + std::to_string(cfg.sv_gap_warn) +
            "): order choice weakly supported");

    const Eigen::MatrixXd gamma =
        svd.matrixU().leftCols(n) * sv.head(n).cwiseSqrt().asDiagonal();

    // C from the first block row, A from the shift invariance of the observability matrix.
    Eigen::MatrixXd Cs = gamma.topRows(p);
    Eigen::MatrixXd A =
        solve_ls(gamma.topRows((i - 1) * p), gamma.bottomRows((i - 1) * p), cfg.regularization);

    // The least-squares shift solve can land marginally outside the unit circle on
    // drifting records even though the underlying system is dissipative. A growing
    // ridge picks the stable solution among the near-equivalent ones; the fallback
    // is disclosed on the model.
    {
        const Eigen::MatrixXd& up = gamma.topRows((i - 1) * p);
        const double diag_scale =
            up.squaredNorm() / static_cast<double>(up.cols());
        double rho = Eigen::EigenSolver<Eigen::MatrixXd>(A, false)
                         .eigenvalues().array().abs().maxCoeff();
        for (double rel = 1e-10; rho >= 1.0 && rel <= 1e-4 + 1e-12; rel *= 100.0) {
            A = solve_ls(up, gamma.bottomRows((i - 1) * p), rel * diag_scale);
            rho = Eigen::EigenSolver<Eigen::MatrixXd>(A, false)
                      .eigenvalues().array().abs().maxCoeff();
            model.info.warnings.push_back(
                "shift-invariance solve regularized (relative ridge " + std::to_string(rel) +
                "), spectral radius now " + std::to_string(rho));
        }
    }

    clamp_slow_modes(A, d.dt, cfg.slow_mode_cap_s, model.info.warnings);

    model.A = A;
    model.C = sy.asDiagonal() * Cs;
    model.dt = d.dt;
    model.input_labels = labels_of(inputs);
    model.output_labels = labels_of(outputs);

    const ForcedLs forced =
        estimate_forced_response(model.A, model.C, d.u, d.y, cfg.with_feedthrough,
                                 cfg.regularization);
    model.B = forced.B;
    model.D = forced.D;
    if (!model.is_stable())
        model.info.warnings.push_back("UnstableModel: estimated A has eigenvalues outside "
                                      "the unit circle; reported as-is");
    return model;
}

} // namespace

StateSpaceModel estimate_subspace(const std::vector<TimeSeries>& inputs,
                                  const std::vector<TimeSeries>& outputs, int order,
                                  const IdentificationConfig& cfg) {
    if (order < 1) throw ConfigError("estimate_subspace: order must be >= 1");

    // A low requested order is served by reducing a richer estimate: cutting the
    // observability basis below the rank the data supports tears the shift
    // structure of A, while balanced truncation of the fuller model drops the
    // least energetic states and keeps the dominant dynamics intact. The forced
    // response is then refit on the raw record for the reduced basis. Orders of
    // eight and up already span the dominant dynamics and are estimated directly,
    // as is any order the data cannot out-rank.
    const int n_boost = order < 8 ? 12 : order;
    if (n_boost > order) {
        StateSpaceModel full;
        bool have_full = false;
        Eigen::Index rank = 0;
        try {
            full = estimate_direct(inputs, outputs, n_boost, cfg, &rank);
            have_full = true;
        } catch (const RankDeficient&) {
            if (rank > order) {
                full = estimate_direct(inputs, outputs, static_cast<int>(rank), cfg);
                have_full = true;
            }
        } catch (const InsufficientExcitation&) {
        }
        if (have_full && full.is_stable()) {
            StateSpaceModel red = reduce_balanced(full, order);
            clamp_slow_modes(red.A, red.dt, cfg.slow_mode_cap_s, red.info.warnings);
            Packed d = pack(inputs, outputs);
            const ForcedLs forced = estimate_forced_response(
                red.A, red.C, d.u, d.y, cfg.with_feedthrough, cfg.regularization);
            red.B = forced.B;
            red.D = forced.D;
            return red;
        }
    }
    return estimate_direct(inputs, outputs, order, cfg);
}

Eigen::VectorXd estimate_initial_state(const StateSpaceModel& m,
                                       const std::vector<TimeSeries>& inputs,
                                       const std::vector<TimeSeries>& outputs) {
    m.require_consistent();
    const Eigen::Index n = m.A.rows();
    const Eigen::Index p = m.C.rows();
    Packed d = pack(inputs, outputs);
    const Eigen::Index K_max = d.u.cols();

    // Residual after the zero-state forced response is the free response C A^k x0.
    // The whole record goes into the fit: building envelopes decay over weeks, and a
    // short window cannot separate a slow state from a constant. For an unstable A
    // the recursion is cut off once A^k starts to blow up.
    const SimOutput zero_sim = simulate(m, inputs);
    Eigen::MatrixXd O(p * K_max, n);
    Eigen::VectorXd rhs(p * K_max);
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    Eigen::Index K = 0;
    while (K < K_max) {
        O.block(K * p, 0, p, n) = m.C * P;
        for (Eigen::Index r = 0; r < p; ++r)
            rhs[K * p + r] =
                d.y(r, K) -
                zero_sim.outputs[static_cast<std::size_t>(r)][static_cast<std::size_t>(K)];
        ++K;
        if (K < K_max) {
            P = m.A * P;
            if (!P.allFinite() || P.norm() > 1e6) break;
        }
    }
    return solve_ls(O.topRows(K * p), rhs.head(K * p), 0.0);
}

FitReport fit_metrics(const std::vector<TimeSeries>& y, const std::vector<TimeSeries>& yhat) {
    if (y.size() != yhat.size() || y.empty())
        throw ConfigError("fit_metrics: channel count mismatch or empty");
    double abs_sum = 0.0, signed_sum = 0.0, sq_sum = 0.0, den_sq = 0.0;
    std::size_t total = 0;
    for (std::size_t c = 0; c < y.size(); ++c) {
        require_same_grid({&y[c], &yhat[c]});
        const std::size_t nk = y[c].size();
        const double* a = y[c].values().data();
        const double* b = yhat[c].values().data();
        abs_sum += kernels::sum_abs_diff(a, b, nk);
        signed_sum += kernels::sum_diff(b, a, nk);   // convention: yhat - y
        sq_sum += kernels::sumsq_diff(a, b, nk);
        const double mean = kernels::sum(a, nk) / static_cast<double>(nk);
        std::vector<double> centered(nk);
        kernels::add_scalar(a, -mean, centered.data(), nk);
        den_sq += kernels::sumsq(centered.data(), nk);
        total += nk;
    }
    FitReport r;
    const double nd = static_cast<double>(total);
    r.mu_e = abs_sum / nd;
    r.mu_signed = signed_sum / nd;
    const double mean_err = r.mu_signed;
    r.sigma_e = std::sqrt(std::max(0.0, sq_sum / nd - mean_err * mean_err));
    if (den_sq > 0.0)
        r.fit_percent = 100.0 * (1.0 - std::sqrt(sq_sum / den_sq));
    else
        r.fit_percent = sq_sum == 0.0 ? 100.0 : 0.0;
    return r;
}

FitReport validate(const StateSpaceModel& m, const std::vector<TimeSeries>& inputs,
                   const std::vector<TimeSeries>& outputs) {
    const Eigen::VectorXd x0 = estimate_initial_state(m, inputs, outputs);
    const SimOutput sim = simulate(m, inputs, x0);
    return fit_metrics(outputs, sim.outputs);
}

std::vector<OrderSweepRow> select_order(const std::vector<TimeSeries>& inputs,
                                        const std::vector<TimeSeries>& outputs,
                                        const std::vector<int>& orders,
                                        const IdentificationConfig& cfg) {
    std::vector<int> sorted_orders = orders;
    std::sort(sorted_orders.begin(), sorted_orders.end());

    std::vector<TimeSeries> est_u, val_u, est_y, val_y;
    for (const TimeSeries& s : inputs) {
        auto halves = s.split_halves();
        est_u.push_back(std::move(halves.first));
        val_u.push_back(std::move(halves.second));
    }
    for (const TimeSeries& s : outputs) {
        auto halves = s.split_halves();
        est_y.push_back(std::move(halves.first));
        val_y.push_back(std::move(halves.second));
    }

    std::vector<OrderSweepRow> rows;
    for (int n : sorted_orders) {
        OrderSweepRow row;
        row.order = n;
        try {
            const StateSpaceModel model = estimate_subspace(est_u, est_y, n, cfg);
            row.report = validate(model, val_u, val_y);
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace climsid
