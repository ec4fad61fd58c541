#pragma once
/*
Multivariate ONS over the l1 ball of radius 1/2.

With payoff 1 + <lambda, z> and loss gradient nu = -z / payoff, each
step adds nu nu^T to the curvature matrix (equivalently z z^T / payoff^2)
and moves lambda along -H^{-1} nu before projecting back onto the ball
in the H-norm. The inverse is maintained by Sherman-Morrison rank-one
updates and refreshed by a full solve every 1,000 steps to bound drift.

For k = 1 this reproduces the univariate ONS recursion exactly.
*/

#include <Eigen/Dense>

namespace seqaudit {

struct MvOnsState {
    Eigen::VectorXd lambda;       // current bet, ||lambda||_1 <= radius
    Eigen::MatrixXd hessian;      // H_j, starts at identity
    Eigen::MatrixXd hessian_inv;  // H_j^{-1}, rank-one maintained
    double radius = 0.5;
    long steps = 0;
    double last_multiplier = -1.0;  // warm start for the projection

    explicit MvOnsState(int k);
};

// Advances the learner with outcome z and the payoff 1 + <lambda, z>
// the caller realized with the current bet. Throws std::logic_error if
// the payoff is not positive (the bet escaped the ball) and
// std::invalid_argument if ||z||_inf > 1.
void mv_ons_update(MvOnsState& state, const Eigen::VectorXd& z, double payoff_value);

} // namespace seqaudit
