#include "seqaudit/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "seqaudit/math_util.hpp"

namespace seqaudit {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kGapTol = 1e-10;

double quad_value(const Eigen::MatrixXd& H, const Eigen::VectorXd& y,
                  const Eigen::VectorXd& v) {
    const Eigen::VectorXd d = v - y;
    return d.dot(H * d);
}

[[noreturn]] void throw_nonconvergence(const Eigen::MatrixXd& H) {
    const auto llt = H.llt();
    std::ostringstream msg;
    msg << "project_l1_h: no convergence within " << kMaxSweeps
        << " sweeps; H appears ill-conditioned (condition estimate ";
    if (llt.info() == Eigen::Success && llt.rcond() > 0.0)
        msg << 1.0 / llt.rcond();
    else
        msg << "inf, not positive definite";
    msg << ")";
    throw std::runtime_error(msg.str());
}

// One cyclic sweep of exact coordinate minimization on
//   (v - y)^T H (v - y) + mu * ||v||_1,
// keeping the cache c = H (v - y) current. Returns the largest
// coordinate change.
double cd_sweep(const Eigen::MatrixXd& H, const Eigen::VectorXd& y, double mu,
                Eigen::VectorXd& v, Eigen::VectorXd& c) {
    const Eigen::Index n = v.size();
    double max_step = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double a = H(i, i);
        if (!(a > 0.0)) throw std::invalid_argument("project_l1_h: H diagonal not positive");
        // coupling of coordinate i with the rest, at the current iterate
        const double r_i = c(i) - a * (v(i) - y(i));
        const double target = a * y(i) - r_i;
        double vi = 0.0;
        if (std::abs(target) > 0.5 * mu) vi = (target - std::copysign(0.5 * mu, target)) / a;
        const double step = vi - v(i);
        if (step != 0.0) {
            c.noalias() += H.col(i) * step;
            v(i) = vi;
            max_step = std::max(max_step, std::abs(step));
        }
    }
    return max_step;
}

// With the support and signs fixed, the boundary optimum solves a
// linear KKT system: 2 H_SS x + mu s = 2 (H y)_S with s^T x = r. The
// solve is accepted only if the full KKT conditions hold at the result,
// which by convexity certifies global optimality.
bool polish_active_set(const Eigen::MatrixXd& H, const Eigen::VectorXd& y, double r,
                       const Eigen::VectorXd& v, const std::vector<Eigen::Index>& support,
                       Eigen::VectorXd& out, double& mu_out) {
    const Eigen::Index n = v.size();
    const auto m = static_cast<Eigen::Index>(support.size());
    if (m == 0) return false;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
    Eigen::VectorXd rhs(m + 1);
    const Eigen::VectorXd hy = H * y;
    for (Eigen::Index a = 0; a < m; ++a) {
        const double sign_a = v(support[static_cast<std::size_t>(a)]) > 0.0 ? 1.0 : -1.0;
        for (Eigen::Index b = 0; b < m; ++b)
            kkt(a, b) = 2.0 * H(support[static_cast<std::size_t>(a)],
                                support[static_cast<std::size_t>(b)]);
        kkt(a, m) = sign_a;
        kkt(m, a) = sign_a;
        rhs(a) = 2.0 * hy(support[static_cast<std::size_t>(a)]);
    }
    rhs(m) = r;

    const Eigen::VectorXd sol = kkt.partialPivLu().solve(rhs);
    if (!sol.allFinite()) return false;
    const double mu = sol(m);
    if (!(mu > 0.0)) return false;

    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(n);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double sign_a = v(support[static_cast<std::size_t>(a)]) > 0.0 ? 1.0 : -1.0;
        if (sol(a) * sign_a <= 0.0) return false;  // support sign flipped
        candidate(support[static_cast<std::size_t>(a)]) = sol(a);
    }
    const Eigen::VectorXd g = 2.0 * (H * (candidate - y));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (candidate(i) == 0.0 && std::abs(g(i)) > mu * (1.0 + 1e-12) + 1e-12)
            return false;  // zero coordinate wants to move
    }
    out = std::move(candidate);
    mu_out = mu;
    return true;
}

} // namespace

L1ProjectionResult project_l1_h_full(const Eigen::VectorXd& y, const Eigen::MatrixXd& H,
                                     double r, const Eigen::VectorXd* warm_v,
                                     double warm_mu) {
    const Eigen::Index n = y.size();
    if (H.rows() != n || H.cols() != n)
        throw std::invalid_argument("project_l1_h: H must be square and match y");
    if (!(r > 0.0)) throw std::invalid_argument("project_l1_h: radius must be positive");

    if (n == 1) {
        // Any positive H reduces to interval clipping.
        const double v0 = clip(y(0), -r, r);
        Eigen::VectorXd v(1);
        v(0) = v0;
        const double mu = (v0 == y(0)) ? 0.0 : std::abs(2.0 * H(0, 0) * (v0 - y(0)));
        return {v, mu, 0.0, 0};
    }

    if (y.lpNorm<1>() <= r) return {y, 0.0, 0.0, 0};

    // Beyond mu_cap the soft threshold kills every coordinate of v(mu).
    const double mu_cap = 2.0 * (H * y).lpNorm<Eigen::Infinity>();

    Eigen::VectorXd v = (warm_v != nullptr && warm_v->size() == n)
                            ? *warm_v
                            : Eigen::VectorXd(y * (r / y.lpNorm<1>()));
    Eigen::VectorXd c = H * (v - y);

    int sweeps = 0;
    auto solve_penalized = [&](double mu) {
        for (int s = 0; s < 60; ++s) {
            if (++sweeps > kMaxSweeps) throw_nonconvergence(H);
            const double step = cd_sweep(H, y, mu, v, c);
            if (step <= 1e-13 * std::max(1.0, v.lpNorm<Eigen::Infinity>())) break;
        }
        return v.lpNorm<1>();
    };

    double lo = 0.0, hi = mu_cap;
    if (warm_mu > 0.0 && warm_mu < mu_cap) {
        // Bracket around the previous multiplier; in the rank-one-update
        // use case the new multiplier is almost always within a factor 2.
        const double a = 0.5 * warm_mu, b = std::min(2.0 * warm_mu, mu_cap);
        if (solve_penalized(a) <= r) {
            hi = a;
        } else {
            lo = a;
            if (solve_penalized(b) <= r) hi = b; else lo = b;
        }
    }

    L1ProjectionResult best;
    best.gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd polished;
    double polished_mu = 0.0;
    std::vector<Eigen::Index> support, prev_support;
    for (int it = 0; it < 200; ++it) {
        const double mu = 0.5 * (lo + hi);
        const double l1 = solve_penalized(mu);
        if (l1 > r) lo = mu; else hi = mu;

        // The support of v(mu) usually locks in after a couple of
        // iterations; once stable, an exact solve on it certifies
        // itself via KKT.
        support.clear();
        for (Eigen::Index i = 0; i < n; ++i)
            if (v(i) != 0.0) support.push_back(i);
        const bool support_stable = it > 0 && support == prev_support;
        prev_support = support;
        if (support_stable && polish_active_set(H, y, r, v, support, polished, polished_mu)) {
            const Eigen::VectorXd cp = H * (polished - y);
            const double primal = (polished - y).dot(cp);
            const double c_inf = cp.lpNorm<Eigen::Infinity>();
            const double s =
                (2.0 * c_inf > polished_mu && c_inf > 0.0) ? polished_mu / (2.0 * c_inf) : 1.0;
            const double dual =
                -2.0 * s * y.dot(cp) - s * s * (polished - y).dot(cp) - polished_mu * r;
            const double gap = primal - dual;
            if (gap <= kGapTol * std::max(1.0, primal))
                return {polished, polished_mu, std::max(gap, 0.0), sweeps};
            if (gap < best.gap) best = {polished, polished_mu, gap, sweeps};
        }

        // Fallback certificate: scale the iterate onto the ball for a
        // primal value and build a Fenchel dual point from the residual.
        const double shrink = (l1 > r) ? r / l1 : 1.0;
        const Eigen::VectorXd v_feas = v * shrink;
        const double primal = quad_value(H, y, v_feas);
        const double c_inf = c.lpNorm<Eigen::Infinity>();
        const double s = (2.0 * c_inf > mu && c_inf > 0.0) ? mu / (2.0 * c_inf) : 1.0;
        const double dual = -2.0 * s * y.dot(c) - s * s * (v - y).dot(c) - mu * r;
        const double gap = primal - dual;
        if (gap < best.gap) best = {v_feas, mu, gap, sweeps};
        if (gap <= kGapTol * std::max(1.0, primal)) {
            best.sweeps = sweeps;
            return best;
        }
    }
    throw_nonconvergence(H);
}

Eigen::VectorXd project_l1_h(const Eigen::VectorXd& y, const Eigen::MatrixXd& H, double r) {
    return project_l1_h_full(y, H, r).v;
}

double l1h_kkt_residual(const Eigen::VectorXd& y, const Eigen::MatrixXd& H, double r,
                        const Eigen::VectorXd& v, double mu) {
    const Eigen::VectorXd g = 2.0 * (H * (v - y));
    double res = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12)
            res = std::max(res, std::abs(g(i) + mu * (v(i) > 0.0 ? 1.0 : -1.0)));
        else
            res = std::max(res, std::max(0.0, std::abs(g(i)) - mu));
    }
    const double l1 = v.lpNorm<1>();
    res = std::max(res, l1 - r);                  // primal feasibility
    res = std::max(res, std::abs(mu * (l1 - r))); // complementary slackness
    return res;
}

} // namespace seqaudit
