#pragma once

#include <Eigen/Dense>

namespace seqaudit {

struct L1ProjectionResult {
    Eigen::VectorXd v;        // minimizer, ||v||_1 <= r
    double multiplier = 0.0;  // Lagrange multiplier of the norm constraint
    double gap = 0.0;         // certified duality gap at the returned point
    int sweeps = 0;           // coordinate-descent sweeps consumed
};

// Projection onto the l1 ball of radius r in the norm induced by SPD H:
//
//   argmin_{||v||_1 <= r} (v - y)^T H (v - y).
//
// The norm constraint is handled through its exact Lagrangian: for a
// multiplier mu the inner problem is an l1-penalized quadratic solved
// by cyclic coordinate descent with exact soft-threshold steps, and mu
// is driven to the value where ||v(mu)||_1 = r by bisection. Warm
// starts (previous v and mu) make the steady-state cost a handful of
// sweeps. Terminates when a Fenchel dual certificate puts the duality
// gap below 1e-10 (relative beyond unit scale); a cap of 10,000 total
// sweeps guards against ill-conditioned H.
//
// Throws std::invalid_argument on malformed inputs and
// std::runtime_error (with a condition estimate) on non-convergence.
L1ProjectionResult project_l1_h_full(const Eigen::VectorXd& y, const Eigen::MatrixXd& H,
                                     double r, const Eigen::VectorXd* warm_v = nullptr,
                                     double warm_mu = -1.0);

Eigen::VectorXd project_l1_h(const Eigen::VectorXd& y, const Eigen::MatrixXd& H, double r);

// Max-norm KKT residual of the projection problem at (v, mu):
// stationarity of 2H(v-y) + mu * sign(v), subgradient feasibility on
// zero coordinates, primal feasibility, and complementary slackness.
double l1h_kkt_residual(const Eigen::VectorXd& y, const Eigen::MatrixXd& H, double r,
                        const Eigen::VectorXd& v, double mu);

} // namespace seqaudit
