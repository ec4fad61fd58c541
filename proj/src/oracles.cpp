#include "seqaudit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "seqaudit/betting.hpp"
#include "seqaudit/rng.hpp"
#include "seqaudit/sim.hpp"
#include "seqaudit/testing.hpp"
#include "seqaudit/wealth.hpp"

namespace seqaudit {

double oracle_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                      std::uint64_t c) {
    return keyed_uniform(seed, a, b, c);
}

double oracle_gaussian(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
    // Box-Muller over two keyed uniforms.
    const double u1 = std::max(keyed_uniform(seed, a, b, 2 * c), 1e-300);
    const double u2 = keyed_uniform(seed, a, b, 2 * c + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::MatrixXd random_spd(int k, std::uint64_t seed, double eig_lo, double eig_hi) {
    Eigen::MatrixXd A(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            A(i, j) = oracle_gaussian(seed, 1, static_cast<std::uint64_t>(i),
                                      static_cast<std::uint64_t>(j));
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(A).householderQ();
    Eigen::VectorXd eigs(k);
    for (int i = 0; i < k; ++i)
        eigs(i) = eig_lo + (eig_hi - eig_lo) *
                               oracle_uniform(seed, 2, static_cast<std::uint64_t>(i), 0);
    return Q * eigs.asDiagonal() * Q.transpose();
}

double l1ball_objective(const Eigen::MatrixXd& H, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& v) {
    const Eigen::VectorXd d = v - y;
    return d.dot(H * d);
}

namespace {

// Enumerates lattice points m*h with ||v - center||_inf <= half_width
// and ||v||_1 <= r, tracking the best objective value.
void lattice_scan(const Eigen::MatrixXd& H, const Eigen::VectorXd& y, double r, double h,
                  const Eigen::VectorXd& center, double half_width, Eigen::VectorXd& point,
                  int dim, double l1_used, double& best_value, Eigen::VectorXd& best_point) {
    const int k = static_cast<int>(y.size());
    if (dim == k) {
        const double value = l1ball_objective(H, y, point);
        if (value < best_value) {
            best_value = value;
            best_point = point;
        }
        return;
    }
    const double budget = r - l1_used;
    const double lo = std::max(center(dim) - half_width, -budget);
    const double hi = std::min(center(dim) + half_width, budget);
    const long m_lo = static_cast<long>(std::ceil(lo / h - 1e-12));
    const long m_hi = static_cast<long>(std::floor(hi / h + 1e-12));
    for (long m = m_lo; m <= m_hi; ++m) {
        const double v = static_cast<double>(m) * h;
        point(dim) = v;
        lattice_scan(H, y, r, h, center, half_width, point, dim + 1, l1_used + std::abs(v),
                     best_value, best_point);
    }
}

Eigen::VectorXd lattice_min(const Eigen::MatrixXd& H, const Eigen::VectorXd& y, double r,
                            double h, const Eigen::VectorXd& center, double half_width) {
    Eigen::VectorXd point = Eigen::VectorXd::Zero(y.size());
    Eigen::VectorXd best_point = Eigen::VectorXd::Zero(y.size());
    double best_value = std::numeric_limits<double>::infinity();
    lattice_scan(H, y, r, h, center, half_width, point, 0, 0.0, best_value, best_point);
    return best_point;
}

} // namespace

Eigen::VectorXd grid_min_l1ball(const Eigen::MatrixXd& H, const Eigen::VectorXd& y,
                                double r, double resolution) {
    const int k = static_cast<int>(y.size());
    const Eigen::VectorXd origin = Eigen::VectorXd::Zero(k);
    if (k <= 2) return lattice_min(H, y, r, resolution, origin, r + resolution);
    // Convexity lets a coarse pass localize the minimizer; each refinement
    // box is several times wider than the previous lattice spacing.
    Eigen::VectorXd center = lattice_min(H, y, r, 20.0 * resolution, origin, r);
    center = lattice_min(H, y, r, 4.0 * resolution, center, 100.0 * resolution);
    return lattice_min(H, y, r, resolution, center, 20.0 * resolution);
}

std::vector<double> simplex_argmin_numeric(const std::vector<double>& grad_sum,
                                           std::size_t step_count) {
    const std::size_t d = grad_sum.size();
    if (d == 1) return {1.0};
    const double reg_weight = std::sqrt(static_cast<double>(step_count)) /
                              std::sqrt(std::log(static_cast<double>(d)));
    std::vector<double> v(d, 1.0 / static_cast<double>(d));
    // Exact coordinate descent over mass-exchange directions e_i - e_j,
    // which span the simplex tangent space. Moving mass t from i to j
    // changes the objective with derivative
    //   g'(t) = c ln((v_j + t)/(v_i - t)) - (G_j - G_i),
    // strictly increasing with a sign change inside (-v_j, v_i), so each
    // 1-D subproblem is solved exactly by bisection. The entropy walls
    // keep every iterate strictly interior.
    for (int sweep = 0; sweep < 2000; ++sweep) {
        double max_move = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = i + 1; j < d; ++j) {
                const double dg = grad_sum[j] - grad_sum[i];
                auto slope = [&](double t) {
                    return reg_weight * std::log((v[j] + t) / (v[i] - t)) - dg;
                };
                double lo = -v[j], hi = v[i];
                if (!(slope(0.0) > 0.0)) lo = 0.0; else hi = 0.0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (slope(mid) > 0.0) hi = mid; else lo = mid;
                }
                const double t = 0.5 * (lo + hi);
                v[i] -= t;
                v[j] += t;
                max_move = std::max(max_move, std::abs(t));
            }
        }
        if (max_move < 1e-15) break;
    }
    return v;
}

namespace {

struct EnumAccumulators {
    // [process][prefix length - 1] sums of linear wealth over visited nodes
    std::vector<std::vector<long double>> sums;
    std::vector<std::string> names;
};

void enum_dfs(const MultiStreamWealth& state, int depth, int max_depth, int k,
              bool include_mv, bool include_ftrl, EnumAccumulators& acc) {
    if (depth == max_depth) return;
    const int patterns = 1 << k;
    std::vector<double> z(static_cast<std::size_t>(k));
    for (int pattern = 0; pattern < patterns; ++pattern) {
        for (int i = 0; i < k; ++i)
            z[static_cast<std::size_t>(i)] = (pattern >> i) & 1 ? 1.0 : -1.0;
        MultiStreamWealth child = state;
        child.step(z);

        const auto logs = child.per_stream_logs();
        std::size_t p = 0;
        for (int i = 0; i < k; ++i)
            acc.sums[p++][static_cast<std::size_t>(depth)] +=
                std::exp(static_cast<long double>(logs[static_cast<std::size_t>(i)]));
        const StreamAggregates agg = aggregate_stream_logs(logs);
        acc.sums[p++][static_cast<std::size_t>(depth)] +=
            std::exp(static_cast<long double>(agg.sum_log));
        acc.sums[p++][static_cast<std::size_t>(depth)] += std::exp(
            static_cast<long double>(agg.lse_log - std::log(static_cast<double>(k))));
        const double balance = merged_statistic_from(Method::balance, agg, std::nullopt,
                                                     std::nullopt)
                                   .statistic;
        acc.sums[p++][static_cast<std::size_t>(depth)] +=
            std::exp(static_cast<long double>(balance));
        if (include_mv)
            acc.sums[p++][static_cast<std::size_t>(depth)] +=
                std::exp(static_cast<long double>(child.mv_log()));
        if (include_ftrl)
            acc.sums[p++][static_cast<std::size_t>(depth)] +=
                std::exp(static_cast<long double>(child.ftrl_log()));

        enum_dfs(child, depth + 1, max_depth, k, include_mv, include_ftrl, acc);
    }
}

} // namespace

std::vector<MartingaleDeviation> enumerate_martingale_deviation(int k, int depth,
                                                                bool include_mv,
                                                                bool include_ftrl) {
    EnumAccumulators acc;
    for (int i = 0; i < k; ++i) acc.names.push_back("ons_" + std::to_string(i + 1));
    acc.names.emplace_back("prod");
    acc.names.emplace_back("ave");
    acc.names.emplace_back("balance");
    if (include_mv) acc.names.emplace_back("mv_ons");
    if (include_ftrl) acc.names.emplace_back("ftrl");
    acc.sums.assign(acc.names.size(),
                    std::vector<long double>(static_cast<std::size_t>(depth), 0.0L));

    MultiStreamWealth root(k, include_mv, include_ftrl);
    enum_dfs(root, 0, depth, k, include_mv, include_ftrl, acc);

    std::vector<MartingaleDeviation> out;
    for (std::size_t p = 0; p < acc.names.size(); ++p) {
        long double worst = 0.0L;
        long double nodes = 1.0L;
        for (int t = 0; t < depth; ++t) {
            nodes *= static_cast<long double>(1 << k);
            const long double avg = acc.sums[p][static_cast<std::size_t>(t)] / nodes;
            worst = std::max(worst, std::abs(avg - 1.0L));
        }
        out.push_back({acc.names[p], static_cast<double>(worst)});
    }
    return out;
}

PropertyResult lemma_log_wealth_check(std::uint64_t seed, int n_streams, int horizon) {
    int violations = 0;
    double min_slack = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_streams; ++s) {
        UniOnsState learner;
        WealthProcess proc;
        const bool rademacher = s % 2 == 0;
        for (int t = 1; t <= horizon; ++t) {
            const double u = oracle_uniform(seed, static_cast<std::uint64_t>(s),
                                            static_cast<std::uint64_t>(t), 0);
            const double z = rademacher ? (u < 0.5 ? -1.0 : 1.0) : 2.0 * u - 1.0;
            wealth_step(proc, 1.0 + uni_ons_bet(learner) * z, z);
            uni_ons_update(learner, z);
            min_slack = std::min(min_slack, proc.log_wealth - log_wealth_lower_bound(proc));
            if (!check_log_wealth_bound(proc)) ++violations;
        }
    }
    std::ostringstream detail;
    detail << n_streams << " streams x " << horizon << " steps, " << violations
           << " violations, min slack " << min_slack;
    return {"log-wealth-lower-bound", violations == 0, detail.str()};
}

PropertyResult ftrl_l1_regret_check(std::uint64_t seed, int n_streams, int k_max,
                                    int horizon) {
    int violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < n_streams; ++s) {
        const int k =
            1 + static_cast<int>(oracle_uniform(seed, 7, static_cast<std::uint64_t>(s), 0) *
                                 k_max) %
                    k_max;
        DirectionState dir(static_cast<std::size_t>(k));
        std::vector<double> z(static_cast<std::size_t>(k));
        std::vector<double> cum(static_cast<std::size_t>(k), 0.0);
        double earned = 0.0;
        for (int t = 1; t <= horizon; ++t) {
            for (int i = 0; i < k; ++i)
                z[static_cast<std::size_t>(i)] =
                    2.0 * oracle_uniform(seed, static_cast<std::uint64_t>(s),
                                         static_cast<std::uint64_t>(t),
                                         static_cast<std::uint64_t>(i)) -
                    1.0;
            const std::vector<double> u = direction_step(dir, z);
            for (int i = 0; i < k; ++i) {
                earned += u[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
                cum[static_cast<std::size_t>(i)] += z[static_cast<std::size_t>(i)];
            }
            double best = 0.0;
            for (double c : cum) best = std::max(best, std::abs(c));
            const double bound =
                2.0 * std::sqrt(static_cast<double>(t) * std::log(2.0 * k));
            worst_margin = std::min(worst_margin, bound - (best - earned));
            if (best - earned > bound) ++violations;
        }
    }
    std::ostringstream detail;
    detail << n_streams << " streams (k <= " << k_max << ") x " << horizon << " steps, "
           << violations << " violations, min margin " << worst_margin;
    return {"ftrl-l1-regret", violations == 0, detail.str()};
}

PropertyResult ftrl_simplex_regret_check(std::uint64_t seed, int n_streams, int d_max,
                                         int horizon) {
    int violations = 0;
    for (int s = 0; s < n_streams; ++s) {
        const std::size_t d = 2 + static_cast<std::size_t>(
                                      oracle_uniform(seed, 11, static_cast<std::uint64_t>(s), 0) *
                                      (d_max - 1)) %
                                      static_cast<std::size_t>(d_max - 1);
        SimplexFtrlState state(d);
        std::vector<double> g(d), cum(d, 0.0);
        double earned = 0.0;
        for (int t = 1; t <= horizon; ++t) {
            for (std::size_t i = 0; i < d; ++i)
                g[i] = 2.0 * oracle_uniform(seed, 100 + static_cast<std::uint64_t>(s),
                                            static_cast<std::uint64_t>(t),
                                            static_cast<std::uint64_t>(i)) -
                       1.0;
            const std::vector<double> v = ftrl_simplex_step(state);
            for (std::size_t i = 0; i < d; ++i) {
                earned += v[i] * g[i];
                cum[i] += g[i];
            }
            ftrl_simplex_observe(state, g);
            const double best = *std::max_element(cum.begin(), cum.end());
            const double bound =
                2.0 * std::sqrt(static_cast<double>(t) * std::log(static_cast<double>(d)));
            if (best - earned > bound) ++violations;
        }
    }
    std::ostringstream detail;
    detail << n_streams << " streams (d <= " << d_max << ") x " << horizon << " steps, "
           << violations << " violations";
    return {"ftrl-simplex-regret", violations == 0, detail.str()};
}

std::vector<PropertyResult> level_alpha_check(double alpha, int k, int runs, int horizon,
                                              std::uint64_t seed) {
    SimulationConfig config;
    SyntheticStreamSpec stream;
    stream.k = k;
    stream.nonnull_fraction = 0.0;
    stream.variance = 0.2;
    stream.seed = seed;
    config.stream = stream;
    for (Method m : default_methods(k)) config.tests.push_back({m, alpha});
    config.horizon = horizon;
    config.runs = runs;

    const auto estimates = type1_estimate(config);
    const double limit =
        alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(runs));
    std::vector<PropertyResult> out;
    for (const Type1Estimate& e : estimates) {
        std::ostringstream detail;
        detail << "rate " << e.rate << " vs limit " << limit << " (alpha " << alpha << ", "
               << runs << " runs)";
        out.push_back({std::string("level-alpha-") + method_name(e.spec.method),
                       e.rate <= limit, detail.str()});
    }
    return out;
}

} // namespace seqaudit
