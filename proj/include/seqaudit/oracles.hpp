#pragma once
/*
Independent reference computations used to check the fast paths.

None of these call the implementation they certify: the grid search
evaluates the projection objective directly, the simplex argmin runs
projected gradient descent on the written-out objective rather than the
closed form, and the martingale/lemma/level checks drive the real
processes but verify exhaustive or analytic facts about the output.
*/

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace seqaudit {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Brute-force minimizer of (v-y)^T H (v-y) over the lattice of spacing
// `resolution` inside the l1 ball of radius r. Exhaustive for k <= 2;
// for k = 3,4 a coarse pass localizes the convex objective and a full
// fine pass covers a generous box around it.
Eigen::VectorXd grid_min_l1ball(const Eigen::MatrixXd& H, const Eigen::VectorXd& y,
                                double r, double resolution);

// Value of the projection objective.
double l1ball_objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& v);

// Numeric argmin over the d-simplex of
//   sqrt(j)/sqrt(ln d) * (sum_i v_i ln v_i + ln d) - <v, grad_sum>
// by exact coordinate descent over mass-exchange directions, each 1-D
// subproblem solved by bisection.
std::vector<double> simplex_argmin_numeric(const std::vector<double>& grad_sum,
                                           std::size_t step_count);

// Exhaustive check of the supermartingale property: averages terminal
// linear wealth over all 2^(k*depth) equiprobable +-1 paths, at every
// prefix length, for the per-stream, multivariate, direction-reduced,
// and merged processes. Returns the worst |average - 1| per process.
struct MartingaleDeviation {
    std::string process;
    double max_abs_deviation;
};
std::vector<MartingaleDeviation> enumerate_martingale_deviation(int k, int depth,
                                                                bool include_mv,
                                                                bool include_ftrl);

// Log-wealth lower bound on random Rademacher and uniform streams.
PropertyResult lemma_log_wealth_check(std::uint64_t seed, int n_streams, int horizon);

// l1-ball regret of the direction reduction: 2 sqrt(t ln 2k).
PropertyResult ftrl_l1_regret_check(std::uint64_t seed, int n_streams, int k_max,
                                    int horizon);

// Simplex regret of raw FTRL iterates: 2 sqrt(t ln d).
PropertyResult ftrl_simplex_regret_check(std::uint64_t seed, int n_streams, int d_max,
                                         int horizon);

// Monte-Carlo level check on a null configuration; one result per test,
// each requiring rate <= alpha + 3 binomial standard errors.
std::vector<PropertyResult> level_alpha_check(double alpha, int k, int runs, int horizon,
                                              std::uint64_t seed);

// Deterministic pseudo-random helpers for test instances.
double oracle_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c);
double oracle_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c);
Eigen::MatrixXd random_spd(int k, std::uint64_t seed, double eig_lo = 1.0,
                           double eig_hi = 3.0);

} // namespace seqaudit
