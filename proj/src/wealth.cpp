#include "seqaudit/wealth.hpp"

#include <cmath>
#include <stdexcept>

namespace seqaudit {

void wealth_step(WealthProcess& p, double payoff, double outcome) {
    // 1e-12 slack absorbs inner-product rounding; anything lower means a
    // bet escaped its ball.
    if (!(payoff >= 0.5 - 1e-12))
        throw std::logic_error("wealth_step: payoff below the 1/2 floor");
    p.log_wealth += std::log(payoff);
    p.t += 1;
    p.diag_a += outcome;
    p.diag_v += outcome * outcome;
}

double log_wealth_lower_bound(const WealthProcess& p) {
    const double denom = p.diag_v + std::abs(p.diag_a);
    const double quad = denom > 0.0 ? p.diag_a * p.diag_a / (4.0 * denom) : 0.0;
    return quad - 2.0 * std::log(4.0 * static_cast<double>(p.t));
}

bool check_log_wealth_bound(const WealthProcess& p) {
    return p.log_wealth >= log_wealth_lower_bound(p);
}

MultiStreamWealth::MultiStreamWealth(int k, bool enable_mv, bool enable_ftrl) : k_(k) {
    if (k < 1) throw std::invalid_argument("MultiStreamWealth: k must be positive");
    stream_learners_.resize(static_cast<std::size_t>(k));
    stream_procs_.resize(static_cast<std::size_t>(k));
    stream_logs_.resize(static_cast<std::size_t>(k), 0.0);
    if (enable_mv) mv_.emplace(k);
    if (enable_ftrl) ftrl_.emplace(k);
}

void MultiStreamWealth::step(std::span<const double> z) {
    step_per_stream(z);
    if (mv_) step_mv(z);
    if (ftrl_) step_ftrl(z);
    t_ += 1;
}

void MultiStreamWealth::step_per_stream(std::span<const double> z) {
    if (z.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("step_per_stream: outcome dimension mismatch");
    for (int i = 0; i < k_; ++i) {
        auto& learner = stream_learners_[static_cast<std::size_t>(i)];
        auto& proc = stream_procs_[static_cast<std::size_t>(i)];
        const double zi = z[static_cast<std::size_t>(i)];
        wealth_step(proc, 1.0 + uni_ons_bet(learner) * zi, zi);
        uni_ons_update(learner, zi);
        stream_logs_[static_cast<std::size_t>(i)] = proc.log_wealth;
    }
}

void MultiStreamWealth::step_mv(std::span<const double> z) {
    if (!mv_) throw std::logic_error("step_mv: multivariate process disabled");
    if (z.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("step_mv: outcome dimension mismatch");
    Eigen::VectorXd zv = Eigen::Map<const Eigen::VectorXd>(z.data(), k_);
    const double payoff = 1.0 + mv_->learner.lambda.dot(zv);
    wealth_step(mv_->process, payoff, 0.0);
    mv_ons_update(mv_->learner, zv, payoff);
}

void MultiStreamWealth::step_ftrl(std::span<const double> z) {
    if (!ftrl_) throw std::logic_error("step_ftrl: direction process disabled");
    if (z.size() != static_cast<std::size_t>(k_))
        throw std::invalid_argument("step_ftrl: outcome dimension mismatch");
    const std::vector<double> u = direction_step(ftrl_->direction, z);
    double s = 0.0;
    for (int i = 0; i < k_; ++i)
        s += u[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
    s = clip(s, -1.0, 1.0);  // ||u||_1 <= 1 makes |s| <= 1 up to rounding
    const double payoff = 1.0 + uni_ons_bet(ftrl_->scalar_ons) * s;
    wealth_step(ftrl_->process, payoff, s);
    uni_ons_update(ftrl_->scalar_ons, s);
}

double MultiStreamWealth::mv_log() const { return mv_process().log_wealth; }

double MultiStreamWealth::ftrl_log() const { return ftrl_process().log_wealth; }

const WealthProcess& MultiStreamWealth::mv_process() const {
    if (!mv_) throw std::logic_error("multivariate process disabled");
    return mv_->process;
}

const WealthProcess& MultiStreamWealth::ftrl_process() const {
    if (!ftrl_) throw std::logic_error("direction process disabled");
    return ftrl_->process;
}

} // namespace seqaudit
