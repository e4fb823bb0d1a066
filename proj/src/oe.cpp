#include "climsid/oe.hpp"

#include "climsid/errors.hpp"
#include "climsid/signal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace climsid {

namespace {

// u delayed by d samples, zero-padded at the start.
inline double delayed(const std::vector<double>& u, std::size_t k, int d) {
    return static_cast<int>(k) >= d ? u[k - static_cast<std::size_t>(d)] : 0.0;
}

// y[k] = x[k] - f1 y[k-1] - ... - f_nf y[k-nf], zero initial memory.
void filter_inverse_f(const std::vector<double>& f, const std::vector<double>& x,
                      std::vector<double>& y) {
    const std::size_t n = x.size();
    y.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double acc = x[k];
        const std::size_t jm = std::min(f.size(), k);
        for (std::size_t j = 0; j < jm; ++j) acc -= f[j] * y[k - 1 - j];
        y[k] = acc;
    }
}

// Per-channel contribution w and total simulated output for parameter vector theta.
struct OeEval {
    std::vector<std::vector<double>> w;   // one per channel
    std::vector<double> yhat;
    double cost = 0.0;
    bool finite = true;
};

OeEval evaluate(const std::vector<OeChannel>& channels,
                const std::vector<const std::vector<double>*>& u,
                const std::vector<double>& y) {
    const std::size_t n = y.size();
    OeEval ev;
    ev.w.resize(channels.size());
    ev.yhat.assign(n, 0.0);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const OeChannel& ch = channels[c];
        std::vector<double> x(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < ch.b.size(); ++l)
                acc += ch.b[l] * delayed(*u[c], k, ch.nk + static_cast<int>(l));
            x[k] = acc;
        }
        filter_inverse_f(ch.f, x, ev.w[c]);
        for (std::size_t k = 0; k < n; ++k) ev.yhat[k] += ev.w[c][k];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double e = y[k] - ev.yhat[k];
        ev.cost += e * e;
        if (!std::isfinite(ev.cost)) {
            ev.finite = false;
            ev.cost = std::numeric_limits<double>::infinity();
            break;
        }
    }
    return ev;
}

} // namespace

bool OeChannel::stable_denominator() const {
    if (f.empty()) return true;
    // Roots of z^nf + f1 z^(nf-1) + ... + f_nf via the companion matrix.
    const Eigen::Index nf = static_cast<Eigen::Index>(f.size());
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(nf, nf);
    for (Eigen::Index i = 0; i < nf; ++i) comp(0, i) = -f[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 1; i < nf; ++i) comp(i, i - 1) = 1.0;
    const Eigen::VectorXcd roots = Eigen::EigenSolver<Eigen::MatrixXd>(comp, false).eigenvalues();
    for (Eigen::Index i = 0; i < roots.size(); ++i)
        if (std::abs(roots[i]) >= 1.0) return false;
    return true;
}

OutputErrorModel estimate_oe(const std::vector<TimeSeries>& inputs, const TimeSeries& output,
                             const std::vector<OeChannelOrders>& orders,
                             const IdentificationConfig& cfg) {
    if (inputs.empty()) throw InsufficientExcitation("estimate_oe: no inputs");
    if (orders.size() != inputs.size())
        throw ConfigError("estimate_oe: one (nb, nf, nk) triple per input required");

    std::vector<const TimeSeries*> grid;
    for (const TimeSeries& s : inputs) grid.push_back(&s);
    grid.push_back(&output);
    require_same_grid(grid);

    int nparams = 0;
    int na = 0;
    for (const OeChannelOrders& o : orders) {
        if (o.nb < 1 || o.nf < 0 || o.nk < 0)
            throw ConfigError("estimate_oe: orders must satisfy nb >= 1, nf >= 0, nk >= 0");
        nparams += o.nb + o.nf;
        na = std::max(na, o.nf);
    }
    const std::size_t N = output.size();
    if (static_cast<int>(N) <= 10 * nparams)
        throw InsufficientExcitation("estimate_oe: need more than 10x parameter count (" +
                                     std::to_string(10 * nparams) + ") samples");

    bool any_excited = false;
    for (const TimeSeries& s : inputs) {
        try {
            crest_factor(s, true);
            any_excited = true;
            break;
        } catch (const ZeroPowerSignal&) {
        }
    }
    if (!any_excited)
        throw InsufficientExcitation("estimate_oe: every input channel is constant");

    const std::vector<double>& y = output.values();
    std::vector<const std::vector<double>*> u;
    for (const TimeSeries& s : inputs) u.push_back(&s.values());

    // ARX initialization with a common denominator of order max(nf):
    // y[k] + a1 y[k-1] + ... = sum_ch sum_l b_l u_ch[k - nk - l + 1] + e.
    Eigen::Index ncols = na;
    for (const OeChannelOrders& o : orders) ncols += o.nb;
    Eigen::MatrixXd X(N, ncols);
    Eigen::VectorXd rhs(N);
    for (std::size_t k = 0; k < N; ++k) {
        Eigen::Index col = 0;
        for (int j = 1; j <= na; ++j) X(static_cast<Eigen::Index>(k), col++) = -delayed(y, k, j);
        for (std::size_t c = 0; c < inputs.size(); ++c)
            for (int l = 0; l < orders[c].nb; ++l)
                X(static_cast<Eigen::Index>(k), col++) = delayed(*u[c], k, orders[c].nk + l);
        rhs[static_cast<Eigen::Index>(k)] = y[k];
    }
    Eigen::VectorXd theta0;
    if (cfg.regularization > 0.0) {
        Eigen::MatrixXd gram = X.transpose() * X;
        gram.diagonal().array() += cfg.regularization;
        theta0 = gram.ldlt().solve(X.transpose() * rhs);
    } else {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < ncols)
            throw InsufficientExcitation(
                "estimate_oe: ARX regressor is rank-deficient; increase excitation or set "
                "a regularization weight");
        theta0 = qr.solve(rhs);
    }

    OutputErrorModel model;
    model.dt = output.dt();
    {
        Eigen::Index col = na;
        for (std::size_t c = 0; c < inputs.size(); ++c) {
            OeChannel ch;
            ch.nk = orders[c].nk;
            for (int l = 0; l < orders[c].nb; ++l) ch.b.push_back(theta0[col++]);
            for (int j = 0; j < orders[c].nf; ++j) ch.f.push_back(theta0[j]);
            model.channels.push_back(std::move(ch));
        }
    }

    // Gauss-Newton on the simulation-error cost, Levenberg-damped with step backtracking.
    OeEval ev = evaluate(model.channels, u, y);
    if (!ev.finite) {
        // ARX gave an unstable start; fall back to zero denominators.
        for (OeChannel& ch : model.channels) std::fill(ch.f.begin(), ch.f.end(), 0.0);
        ev = evaluate(model.channels, u, y);
    }

    double lambda = 1e-6;
    bool converged = false;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        // Jacobian of yhat w.r.t. [b..., f...] per channel via filtered signals.
        Eigen::MatrixXd J(N, nparams);
        Eigen::Index col = 0;
        for (std::size_t c = 0; c < model.channels.size(); ++c) {
            const OeChannel& ch = model.channels[c];
            std::vector<double> g, h;
            filter_inverse_f(ch.f, *u[c], g);     // d yhat / d b_l = g delayed nk+l-1
            filter_inverse_f(ch.f, ev.w[c], h);   // d yhat / d f_j = -h delayed j
            for (std::size_t l = 0; l < ch.b.size(); ++l) {
                for (std::size_t k = 0; k < N; ++k)
                    J(static_cast<Eigen::Index>(k), col) =
                        delayed(g, k, ch.nk + static_cast<int>(l));
                ++col;
            }
            for (std::size_t jf = 0; jf < ch.f.size(); ++jf) {
                for (std::size_t k = 0; k < N; ++k)
                    J(static_cast<Eigen::Index>(k), col) =
                        -delayed(h, k, static_cast<int>(jf) + 1);
                ++col;
            }
        }
        Eigen::VectorXd e(N);
        for (std::size_t k = 0; k < N; ++k)
            e[static_cast<Eigen::Index>(k)] = y[k] - ev.yhat[k];

        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jte = J.transpose() * e;

        bool stepped = false;
        for (int back = 0; back < 12; ++back) {
            Eigen::MatrixXd damped = JtJ;
            damped.diagonal().array() += lambda + cfg.regularization;
            const Eigen::VectorXd delta = damped.ldlt().solve(Jte);

            std::vector<OeChannel> trial = model.channels;
            Eigen::Index tcol = 0;
            for (OeChannel& ch : trial) {
                for (double& bv : ch.b) bv += delta[tcol++];
                for (double& fv : ch.f) fv += delta[tcol++];
            }
            const OeEval trial_ev = evaluate(trial, u, y);
            if (trial_ev.finite && trial_ev.cost < ev.cost) {
                const double improvement =
                    ev.cost > 0.0 ? (ev.cost - trial_ev.cost) / ev.cost : 0.0;
                model.channels = std::move(trial);
                ev = trial_ev;
                lambda = std::max(lambda * 0.1, 1e-12);
                stepped = true;
                if (improvement < cfg.tolerance) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped || converged || ev.cost == 0.0) {
            converged = converged || !stepped || ev.cost == 0.0;
            break;
        }
    }

    model.info.converged = converged;
    if (!converged)
        model.info.warnings.push_back("NonConvergence: Gauss-Newton iteration cap reached "
                                      "with the cost still decreasing");
    for (std::size_t c = 0; c < model.channels.size(); ++c)
        if (!model.channels[c].stable_denominator())
            model.info.warnings.push_back("UnstableModel: channel " + std::to_string(c) +
                                          " denominator has roots outside the unit circle");
    return model;
}

SimOutput simulate(const OutputErrorModel& m, const std::vector<TimeSeries>& inputs) {
    if (inputs.size() != m.channels.size())
        throw ConfigError("simulate(OE): model expects " + std::to_string(m.channels.size()) +
                          " inputs, got " + std::to_string(inputs.size()));
    std::vector<const TimeSeries*> grid;
    for (const TimeSeries& s : inputs) grid.push_back(&s);
    require_same_grid(grid);
    if (!inputs.empty() && inputs.front().dt() != m.dt)
        throw DtMismatch("simulate(OE): model dt != data dt");

    std::vector<const std::vector<double>*> u;
    for (const TimeSeries& s : inputs) u.push_back(&s.values());
    const std::size_t n = inputs.empty() ? 0 : inputs.front().size();
    const std::vector<double> zeros(n, 0.0);
    const OeEval ev = evaluate(m.channels, u, zeros);

    SimOutput out;
    for (const OeChannel& ch : m.channels)
        if (!ch.stable_denominator()) {
            out.warnings.push_back("UnstableModel: simulating anyway");
            break;
        }
    const double t0 = inputs.empty() ? 0.0 : inputs.front().t0();
    out.outputs.emplace_back("y", "", t0, m.dt, ev.yhat);
    return out;
}

FitReport validate(const OutputErrorModel& m, const std::vector<TimeSeries>& inputs,
                   const TimeSeries& output) {
    SimOutput sim = simulate(m, inputs);
    return fit_metrics({output}, {sim.outputs.front()});
}

} // namespace climsid
