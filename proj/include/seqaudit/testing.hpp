#pragma once
/*
Martingale merging and level-alpha decision logic.

Every merge is computed in log domain. With per-stream log wealths
L_1..L_k the statistics and rejection rules are

  bonf:      max_i L_i            rejects at ln(1/alpha) + ln k
  prod:      sum_i L_i            rejects at ln(1/alpha)
  ave:       lse(L) - ln k        rejects at ln(1/alpha)
  balance:   lse(ln 1/2 + ave, ln 1/2 + prod)      at ln(1/alpha)
  max_union: max(prod, max_i L_i - ln k)           at ln(1/alpha) + ln 2
  mv_ons / ftrl: their own log wealth              at ln(1/alpha)

Ties reject (the comparison is >=) and a rejection is sticky: the
stopping time is a first hitting time.
*/

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqaudit/streams.hpp"

namespace seqaudit {

enum class Method { bonf, mv_ons, ftrl, prod, ave, balance, max_union };

const char* method_name(Method m);
Method method_from_string(const std::string& name);  // throws ConfigError
std::vector<Method> default_methods(int k);          // mv_ons only for small k

struct TestSpec {
    Method method = Method::bonf;
    double alpha = 0.05;
};

struct TestDecision {
    bool rejected = false;
    double statistic = 0.0;  // merged log-wealth
    double threshold = 0.0;  // log-domain rejection bar
    long t = 0;
};

struct MergedStat {
    double statistic;
    double threshold_offset;
};

// Shared reductions over the per-stream log wealths, computed once per
// step and reused by every merge.
struct StreamAggregates {
    double max_log;
    double sum_log;
    double lse_log;
    int k;
    int argmax;
};

StreamAggregates aggregate_stream_logs(std::span<const double> log_wealths);

MergedStat merged_statistic_from(Method method, const StreamAggregates& agg,
                                 std::optional<double> mv_log,
                                 std::optional<double> ftrl_log);

MergedStat merged_statistic(Method method, std::span<const double> log_wealths,
                            std::optional<double> mv_log = std::nullopt,
                            std::optional<double> ftrl_log = std::nullopt);

TestDecision decide(const TestSpec& spec, double statistic, double threshold_offset,
                    const TestDecision& prior);

struct StoppingRecord {
    int tau = 0;
    bool censored = false;
    int argmax_stream = -1;  // stream with the largest wealth at rejection;
                             // diagnostic only, no statistical claim attached
};

struct RunOptions {
    bool record_trajectories = false;
    int stride = 1;
    bool run_to_horizon = false;
};

struct RunResult {
    std::vector<StoppingRecord> records;            // one per spec
    std::vector<std::vector<double>> trajectories;  // [spec][recorded index]
    std::vector<int> recorded_ts;
    int steps = 0;
    bool exhausted = false;  // source ended before the horizon
};

// Advances one wealth state per outcome vector, evaluating every spec
// each step. A spec's record is fixed the first time it rejects; the
// simulation keeps running (wealths keep updating) until every spec
// has stopped or the horizon is reached.
RunResult run_until_stop(StreamSource& source, const std::vector<TestSpec>& specs,
                         int horizon, const RunOptions& options = {});

} // namespace seqaudit
