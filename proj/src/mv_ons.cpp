#include "seqaudit/mv_ons.hpp"

#include <stdexcept>

#include "seqaudit/betting.hpp"
#include "seqaudit/projection.hpp"

namespace seqaudit {

namespace {
constexpr long kInverseRefreshPeriod = 1000;
}

MvOnsState::MvOnsState(int k) {
    if (k < 1) throw std::invalid_argument("MvOnsState: k must be positive");
    lambda = Eigen::VectorXd::Zero(k);
    hessian = Eigen::MatrixXd::Identity(k, k);
    hessian_inv = Eigen::MatrixXd::Identity(k, k);
}

void mv_ons_update(MvOnsState& state, const Eigen::VectorXd& z, double payoff_value) {
    if (z.size() != state.lambda.size())
        throw std::invalid_argument("mv_ons_update: outcome dimension mismatch");
    if (z.lpNorm<Eigen::Infinity>() > 1.0)
        throw std::invalid_argument("mv_ons_update: outcome outside [-1,1]^k");
    if (!(payoff_value > 0.0))
        throw std::logic_error(
            "mv_ons_update: nonpositive payoff, bets escaped the l1 ball");

    // nu = -z / payoff; the curvature update z z^T / payoff^2 is nu nu^T.
    const Eigen::VectorXd w = z / payoff_value;
    state.hessian.noalias() += w * w.transpose();

    state.steps += 1;
    if (state.steps % kInverseRefreshPeriod == 0) {
        state.hessian_inv = state.hessian.llt().solve(
            Eigen::MatrixXd::Identity(state.hessian.rows(), state.hessian.cols()));
    } else {
        const Eigen::VectorXd hw = state.hessian_inv * w;
        state.hessian_inv.noalias() -= hw * hw.transpose() / (1.0 + w.dot(hw));
    }

    const Eigen::VectorXd nu = -w;
    const Eigen::VectorXd target =
        state.lambda - ons_step_scale() * (state.hessian_inv * nu);
    if (target.lpNorm<1>() <= state.radius) {
        state.lambda = target;
        state.last_multiplier = -1.0;
    } else {
        L1ProjectionResult proj =
            project_l1_h_full(target, state.hessian, state.radius, &state.lambda,
                              state.last_multiplier);
        state.lambda = std::move(proj.v);
        state.last_multiplier = proj.multiplier;
    }
}

} // namespace seqaudit
