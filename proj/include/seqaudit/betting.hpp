#pragma once
/*
Online learners that choose betting fractions.

Univariate ONS: bets lambda_t in [-1/2, 1/2] on outcomes z in [-1, 1].
With payoff 1 + lambda*z and loss -ln(1 + lambda*z), the gradient at
lambda is nu = -z / (1 + lambda*z) and the update is

  lambda <- clip_{[-1/2,1/2]}( lambda - (2/(2-ln 3)) * nu / (1 + sum nu^2) ).

Simplex FTRL: entropic regularization on the d-simplex gives the
closed-form softmax weights v_i proportional to exp(eta * G_i) with
G = sum of past gradients and eta = sqrt(ln d / j) at step j.

Direction reduction: running simplex FTRL on the doubled stream
(z, -z) in dimension 2k and emitting u = v_plus - v_minus yields a
predictable direction with ||u||_1 <= 1.
*/

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "seqaudit/math_util.hpp"

namespace seqaudit {

// 2 / (2 - ln 3), the ONS step constant. Fixed, never tuned.
inline double ons_step_scale() {
    static const double v = 2.0 / (2.0 - std::log(3.0));
    return v;
}

struct UniOnsState {
    double lambda = 0.0;       // current bet, in [-1/2, 1/2]
    double grad_sq_sum = 0.0;  // sum of nu_i^2, nondecreasing
};

inline double uni_ons_bet(const UniOnsState& state) { return state.lambda; }

inline void uni_ons_update(UniOnsState& state, double z) {
    if (!(std::abs(z) <= 1.0))
        throw std::invalid_argument("uni_ons_update: outcome outside [-1,1]");
    const double nu = -z / (1.0 + state.lambda * z);
    state.grad_sq_sum += nu * nu;
    state.lambda = clip(state.lambda - ons_step_scale() * nu / (1.0 + state.grad_sq_sum),
                        -0.5, 0.5);
}

struct SimplexFtrlState {
    std::vector<double> grad_sum;  // sum of past gradients, length dim
    std::size_t step_count = 1;    // j, starts at 1
    std::size_t dim = 0;

    explicit SimplexFtrlState(std::size_t d) : grad_sum(d, 0.0), dim(d) {
        if (d == 0) throw std::invalid_argument("SimplexFtrlState: dim must be positive");
    }
};

// Closed-form FTRL iterate: v_i proportional to exp(eta * grad_sum_i),
// eta = sqrt(ln d / j). Max-shifted so large sums cannot overflow.
// d = 1 is degenerate: the simplex is a single point.
inline std::vector<double> ftrl_simplex_step(const SimplexFtrlState& state) {
    if (state.dim == 1) return {1.0};
    const double eta =
        std::sqrt(std::log(static_cast<double>(state.dim)) /
                  static_cast<double>(state.step_count));
    double hi = state.grad_sum[0];
    for (double g : state.grad_sum) hi = std::max(hi, g);
    std::vector<double> v(state.dim);
    double total = 0.0;
    for (std::size_t i = 0; i < state.dim; ++i) {
        v[i] = std::exp(eta * (state.grad_sum[i] - hi));
        total += v[i];
    }
    for (double& x : v) x /= total;
    return v;
}

inline void ftrl_simplex_observe(SimplexFtrlState& state, std::span<const double> g) {
    if (g.size() != state.dim)
        throw std::invalid_argument("ftrl_simplex_observe: gradient dimension mismatch");
    for (std::size_t i = 0; i < state.dim; ++i) state.grad_sum[i] += g[i];
    state.step_count += 1;
}

struct DirectionState {
    SimplexFtrlState inner;  // dimension 2k over the stream (z, -z)
    std::size_t k;

    explicit DirectionState(std::size_t k_) : inner(2 * k_), k(k_) {
        if (k_ == 0) throw std::invalid_argument("DirectionState: k must be positive");
    }
};

// Emits u_t = v_plus - v_minus from the current state, then feeds
// (z, -z) into the gradient sums. The emitted direction depends only
// on outcomes strictly before t, and ||u||_1 <= 1.
inline std::vector<double> direction_step(DirectionState& state, std::span<const double> z) {
    if (z.size() != state.k)
        throw std::invalid_argument("direction_step: outcome dimension mismatch");
    const std::vector<double> v = ftrl_simplex_step(state.inner);
    std::vector<double> u(state.k);
    for (std::size_t i = 0; i < state.k; ++i) u[i] = v[i] - v[state.k + i];
    std::vector<double> g(2 * state.k);
    for (std::size_t i = 0; i < state.k; ++i) {
        g[i] = z[i];
        g[state.k + i] = -z[i];
    }
    ftrl_simplex_observe(state.inner, g);
    return u;
}

} // namespace seqaudit
