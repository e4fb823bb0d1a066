#include "climsid/statespace.hpp"

#include "climsid/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace climsid {

Eigen::VectorXcd StateSpaceModel::eigenvalues() const {
    if (A.rows() == 0) return Eigen::VectorXcd();
    return Eigen::EigenSolver<Eigen::MatrixXd>(A, false).eigenvalues();
}

bool StateSpaceModel::is_stable() const {
    const Eigen::VectorXcd ev = eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (is_continuous()) {
            if (ev[i].real() >= 0.0) return false;
        } else {
            if (std::abs(ev[i]) >= 1.0) return false;
        }
    }
    return true;
}

void StateSpaceModel::require_consistent() const {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) throw ConfigError("StateSpaceModel: A must be square");
    if (B.rows() != n) throw ConfigError("StateSpaceModel: B row count must equal order");
    if (C.cols() != n) throw ConfigError("StateSpaceModel: C column count must equal order");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw ConfigError("StateSpaceModel: D must be outputs x inputs");
    if (dt < 0.0) throw ConfigError("StateSpaceModel: dt must be >= 0 (0 = continuous)");
    if (u_offset.size() != 0 && u_offset.size() != B.cols())
        throw ConfigError("StateSpaceModel: u_offset size != input count");
    if (y_offset.size() != 0 && y_offset.size() != C.rows())
        throw ConfigError("StateSpaceModel: y_offset size != output count");
    if (!input_labels.empty() && static_cast<Eigen::Index>(input_labels.size()) != B.cols())
        throw ConfigError("StateSpaceModel: input label count != input count");
    if (!output_labels.empty() && static_cast<Eigen::Index>(output_labels.size()) != C.rows())
        throw ConfigError("StateSpaceModel: output label count != output count");
}

SimOutput simulate(const StateSpaceModel& m, const std::vector<TimeSeries>& inputs,
                   const Eigen::VectorXd& x0) {
    m.require_consistent();
    if (m.is_continuous())
        throw DtMismatch("simulate: model is continuous; discretize with c2d first");
    if (static_cast<Eigen::Index>(inputs.size()) != m.B.cols())
        throw ConfigError("simulate: model expects " + std::to_string(m.B.cols()) +
                          " inputs, got " + std::to_string(inputs.size()));

    std::vector<const TimeSeries*> grid;
    grid.reserve(inputs.size());
    for (const TimeSeries& s : inputs) grid.push_back(&s);
    require_same_grid(grid);
    if (!inputs.empty() && inputs.front().dt() != m.dt)
        throw DtMismatch("simulate: model dt " + std::to_string(m.dt) + " != data dt " +
                         std::to_string(inputs.front().dt()));

    const std::size_t nsteps = inputs.empty() ? 0 : inputs.front().size();
    const Eigen::Index n = m.A.rows();
    const Eigen::Index p = m.C.rows();
    const Eigen::Index nu = m.B.cols();

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (x0.size() > 0) {
        if (x0.size() != n) throw ConfigError("simulate: x0 size != model order");
        x = x0;
    }

    SimOutput out;
    if (!m.is_stable()) out.warnings.push_back("UnstableModel: simulating anyway");

    std::vector<std::vector<double>> y(static_cast<std::size_t>(p));
    for (auto& ch : y) ch.resize(nsteps);

    Eigen::VectorXd u(nu), yk(p);
    const bool has_uoff = m.u_offset.size() > 0;
    const bool has_yoff = m.y_offset.size() > 0;
    for (std::size_t k = 0; k < nsteps; ++k) {
        for (Eigen::Index j = 0; j < nu; ++j) u[j] = inputs[static_cast<std::size_t>(j)][k];
        if (has_uoff) u -= m.u_offset;
        yk = m.C * x + m.D * u;
        if (has_yoff) yk += m.y_offset;
        for (Eigen::Index j = 0; j < p; ++j) y[static_cast<std::size_t>(j)][k] = yk[j];
        x = m.A * x + m.B * u;
    }

    const double t0 = inputs.empty() ? 0.0 : inputs.front().t0();
    for (Eigen::Index j = 0; j < p; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        const std::string name =
            sj < m.output_labels.size() ? m.output_labels[sj] : "y" + std::to_string(sj);
        out.outputs.emplace_back(name, "", t0, m.dt, std::move(y[sj]));
    }
    return out;
}

StateSpaceModel c2d(const StateSpaceModel& m, double dt) {
    m.require_consistent();
    if (!m.is_continuous()) throw DtMismatch("c2d: model is already discrete");
    if (!(dt > 0.0)) throw ConfigError("c2d: dt must be > 0");

    const Eigen::Index n = m.A.rows();
    const Eigen::Index nu = m.B.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + nu, n + nu);
    aug.topLeftCorner(n, n) = m.A * dt;
    aug.topRightCorner(n, nu) = m.B * dt;
    const Eigen::MatrixXd expm = aug.exp();

    StateSpaceModel d = m;
    d.A = expm.topLeftCorner(n, n);
    d.B = expm.topRightCorner(n, nu);
    d.dt = dt;
    return d;
}

StateSpaceModel d2c(const StateSpaceModel& m) {
    m.require_consistent();
    if (m.is_continuous()) throw DtMismatch("d2c: model is already continuous");

    // The principal logarithm needs every eigenvalue of Ad off the ray (-inf, 0].
    const Eigen::VectorXcd ev = m.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double re = ev[i].real();
        const double im = ev[i].imag();
        const double mag = std::abs(ev[i]);
        if (std::abs(im) <= 1e-12 * std::max(1.0, mag) && re <= 1e-300)
            throw LogUndefined("d2c: eigenvalue " + std::to_string(re) +
                               " lies on the closed negative real axis");
    }

    const Eigen::Index n = m.A.rows();
    const Eigen::Index nu = m.B.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Identity(n + nu, n + nu);
    aug.topLeftCorner(n, n) = m.A;
    aug.topRightCorner(n, nu) = m.B;
    const Eigen::MatrixXd logm = aug.log();

    StateSpaceModel c = m;
    c.A = logm.topLeftCorner(n, n) / m.dt;
    c.B = logm.topRightCorner(n, nu) / m.dt;
    c.dt = 0.0;
    return c;
}

namespace {

// X = sum_k A^k G (A^T)^k by doubling: each pass squares the propagator, so the
// tail shrinks like rho^(2^j) and a handful of passes suffice even near rho = 1.
Eigen::MatrixXd lyapunov_sum(const Eigen::MatrixXd& A, const Eigen::MatrixXd& G) {
    Eigen::MatrixXd X = G;
    Eigen::MatrixXd M = A;
    for (int pass = 0; pass < 64; ++pass) {
        const Eigen::MatrixXd add = M * X * M.transpose();
        X += add;
        if (!X.allFinite())
            throw ConfigError("reduce_balanced: Lyapunov recursion diverged");
        if (add.norm() <= 1e-14 * X.norm()) break;
        M = M * M;
    }
    return 0.5 * (X + X.transpose());
}

} // namespace

StateSpaceModel reduce_balanced(const StateSpaceModel& m, int n_keep) {
    m.require_consistent();
    if (m.is_continuous())
        throw ConfigError("reduce_balanced: model must be discrete");
    const Eigen::Index n = m.A.rows();
    if (n_keep < 1) throw ConfigError("reduce_balanced: n_keep must be >= 1");
    if (n_keep >= n) return m;
    if (!m.is_stable())
        throw ConfigError("reduce_balanced: A must be stable");

    Eigen::MatrixXd P = lyapunov_sum(m.A, m.B * m.B.transpose());
    Eigen::MatrixXd Q = lyapunov_sum(m.A.transpose(), m.C.transpose() * m.C);
    // A state that is barely reachable or observable makes a gramian semidefinite;
    // nudge both so the Cholesky factors exist.
    const double eps_p = 1e-12 * std::max(P.trace() / static_cast<double>(n), 1e-300);
    const double eps_q = 1e-12 * std::max(Q.trace() / static_cast<double>(n), 1e-300);
    P += eps_p * Eigen::MatrixXd::Identity(n, n);
    Q += eps_q * Eigen::MatrixXd::Identity(n, n);

    const Eigen::MatrixXd Sc = Eigen::LLT<Eigen::MatrixXd>(P).matrixL();
    const Eigen::MatrixXd So = Eigen::LLT<Eigen::MatrixXd>(Q).matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(So.transpose() * Sc,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd hsv = svd.singularValues();
    const Eigen::VectorXd scale = hsv.head(n_keep).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd T = Sc * svd.matrixV().leftCols(n_keep) * scale.asDiagonal();
    const Eigen::MatrixXd Tinv =
        scale.asDiagonal() * svd.matrixU().leftCols(n_keep).transpose() * So.transpose();

    StateSpaceModel r = m;
    r.A = Tinv * m.A * T;
    r.B = Tinv * m.B;
    r.C = m.C * T;
    return r;
}

double eigenvalue_set_distance(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size())
        throw ConfigError("eigenvalue_set_distance: sets must have equal cardinality");
    if (a.size() == 0) return 0.0;
    double worst = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd& from = pass == 0 ? a : b;
        const Eigen::VectorXcd& to = pass == 0 ? b : a;
        for (Eigen::Index i = 0; i < from.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < to.size(); ++j)
                best = std::min(best, std::abs(from[i] - to[j]));
            worst = std::max(worst, best);
        }
    }
    return worst;
}

} // namespace climsid
