#pragma once
/*
Log-domain wealth processes.

Every strategy starts at wealth 1 and multiplies in one payoff per
step; we accumulate ln W_t instead, since the product-merged wealth
over hundreds of streams overflows doubles within a few hundred steps.
Bets are predictable by API shape: each step reads the current bet,
realizes the payoff, and only then shows the outcome to the learner.
All per-step payoffs are at least 1/2 (bets live in balls that
guarantee it), so every log increment is at least ln(1/2).
*/

#include <optional>
#include <span>
#include <vector>

#include "seqaudit/betting.hpp"
#include "seqaudit/mv_ons.hpp"

namespace seqaudit {

struct WealthProcess {
    double log_wealth = 0.0;
    long t = 0;
    double diag_a = 0.0;  // running sum of scalar outcomes (A_t)
    double diag_v = 0.0;  // running sum of squared outcomes (V_t)
};

// Folds one payoff into the process. `outcome` is the scalar the
// diagnostics accumulate (the stream value, or <u,z> for the
// direction-reduced process; 0 where no scalar stream exists).
void wealth_step(WealthProcess& p, double payoff, double outcome);

// Lower bound on ln W_t guaranteed for a univariate ONS wealth:
//   A_t^2 / (4 (V_t + |A_t|)) - 2 ln(4t).
double log_wealth_lower_bound(const WealthProcess& p);

// True iff the process respects the bound. Test-time invariant only,
// never part of any decision path.
bool check_log_wealth_bound(const WealthProcess& p);

// k per-stream ONS wealth processes, plus an optional multivariate ONS
// process and an optional FTRL direction process, advanced in lockstep
// so every enabled sub-process shares the same t.
class MultiStreamWealth {
  public:
    MultiStreamWealth(int k, bool enable_mv, bool enable_ftrl);

    // Advances every enabled sub-process with the outcome vector z.
    void step(std::span<const double> z);

    void step_per_stream(std::span<const double> z);
    void step_mv(std::span<const double> z);
    void step_ftrl(std::span<const double> z);

    int k() const { return k_; }
    long t() const { return t_; }
    bool mv_enabled() const { return mv_.has_value(); }
    bool ftrl_enabled() const { return ftrl_.has_value(); }

    std::span<const double> per_stream_logs() const { return stream_logs_; }
    double mv_log() const;
    double ftrl_log() const;

    const WealthProcess& stream_process(int i) const { return stream_procs_[i]; }
    const UniOnsState& stream_learner(int i) const { return stream_learners_[i]; }
    const WealthProcess& mv_process() const;
    const WealthProcess& ftrl_process() const;

  private:
    struct FtrlTest {
        DirectionState direction;
        UniOnsState scalar_ons;
        WealthProcess process;
        explicit FtrlTest(int k) : direction(static_cast<std::size_t>(k)) {}
    };
    struct MvTest {
        MvOnsState learner;
        WealthProcess process;
        explicit MvTest(int k) : learner(k) {}
    };

    int k_;
    long t_ = 0;
    std::vector<UniOnsState> stream_learners_;
    std::vector<WealthProcess> stream_procs_;
    std::vector<double> stream_logs_;
    std::optional<MvTest> mv_;
    std::optional<FtrlTest> ftrl_;
};

} // namespace seqaudit
