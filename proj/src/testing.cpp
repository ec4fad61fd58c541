#include "seqaudit/testing.hpp"

#include <algorithm>
#include <cmath>

#include "seqaudit/errors.hpp"
#include "seqaudit/math_util.hpp"
#include "seqaudit/wealth.hpp"

namespace seqaudit {

const char* method_name(Method m) {
    switch (m) {
        case Method::bonf: return "bonf";
        case Method::mv_ons: return "mv_ons";
        case Method::ftrl: return "ftrl";
        case Method::prod: return "prod";
        case Method::ave: return "ave";
        case Method::balance: return "balance";
        case Method::max_union: return "max_union";
    }
    return "?";
}

Method method_from_string(const std::string& name) {
    for (Method m : {Method::bonf, Method::mv_ons, Method::ftrl, Method::prod, Method::ave,
                     Method::balance, Method::max_union}) {
        if (name == method_name(m)) return m;
    }
    throw ConfigError("unknown test method '" + name + "'");
}

std::vector<Method> default_methods(int k) {
    std::vector<Method> methods = {Method::bonf, Method::ftrl, Method::prod, Method::ave,
                                   Method::balance, Method::max_union};
    // The multivariate learner costs O(k^2) per step plus a projection;
    // past small k it needs to be asked for explicitly.
    if (k <= 25) methods.insert(methods.begin() + 1, Method::mv_ons);
    return methods;
}

StreamAggregates aggregate_stream_logs(std::span<const double> log_wealths) {
    if (log_wealths.empty()) throw ConfigError("merged_statistic: no stream wealths");
    StreamAggregates agg{};
    agg.k = static_cast<int>(log_wealths.size());
    agg.max_log = log_wealths[0];
    agg.argmax = 0;
    agg.sum_log = 0.0;
    for (int i = 0; i < agg.k; ++i) {
        const double L = log_wealths[static_cast<std::size_t>(i)];
        agg.sum_log += L;
        if (L > agg.max_log) {
            agg.max_log = L;
            agg.argmax = i;
        }
    }
    double acc = 0.0;
    for (double L : log_wealths) acc += std::exp(L - agg.max_log);
    agg.lse_log = agg.max_log + std::log(acc);
    return agg;
}

MergedStat merged_statistic_from(Method method, const StreamAggregates& agg,
                                 std::optional<double> mv_log,
                                 std::optional<double> ftrl_log) {
    const double log_k = std::log(static_cast<double>(agg.k));
    switch (method) {
        case Method::bonf:
            return {agg.max_log, log_k};
        case Method::prod:
            return {agg.sum_log, 0.0};
        case Method::ave:
            return {agg.lse_log - log_k, 0.0};
        case Method::balance: {
            const double half = std::log(0.5);
            return {log_sum_exp(half + (agg.lse_log - log_k), half + agg.sum_log), 0.0};
        }
        case Method::max_union:
            return {std::max(agg.sum_log, agg.max_log - log_k), std::log(2.0)};
        case Method::mv_ons:
            if (!mv_log)
                throw ConfigError("mv_ons statistic requested but the process is disabled");
            return {*mv_log, 0.0};
        case Method::ftrl:
            if (!ftrl_log)
                throw ConfigError("ftrl statistic requested but the process is disabled");
            return {*ftrl_log, 0.0};
    }
    throw ConfigError("merged_statistic: unknown method");
}

MergedStat merged_statistic(Method method, std::span<const double> log_wealths,
                            std::optional<double> mv_log, std::optional<double> ftrl_log) {
    return merged_statistic_from(method, aggregate_stream_logs(log_wealths), mv_log, ftrl_log);
}

TestDecision decide(const TestSpec& spec, double statistic, double threshold_offset,
                    const TestDecision& prior) {
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
    TestDecision d;
    d.t = prior.t + 1;
    d.statistic = statistic;
    d.threshold = std::log(1.0 / spec.alpha) + threshold_offset;
    d.rejected = prior.rejected || statistic >= d.threshold;
    return d;
}

RunResult run_until_stop(StreamSource& source, const std::vector<TestSpec>& specs,
                         int horizon, const RunOptions& options) {
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (specs.empty()) throw ConfigError("no test specs given");
    if (options.stride < 1) throw ConfigError("trajectory stride must be at least 1");

    if (source.k() < 1) throw ConfigError("stream has no columns");
    bool needs_mv = false, needs_ftrl = false;
    for (const TestSpec& s : specs) {
        needs_mv |= s.method == Method::mv_ons;
        needs_ftrl |= s.method == Method::ftrl;
    }
    MultiStreamWealth wealth(source.k(), needs_mv, needs_ftrl);

    const std::size_t n = specs.size();
    RunResult result;
    result.records.resize(n);
    result.trajectories.resize(options.record_trajectories ? n : 0);
    std::vector<TestDecision> decisions(n);
    std::size_t still_running = n;

    std::vector<double> z;
    int t = 0;
    while (t < horizon) {
        if (!source.next(z)) {
            result.exhausted = true;
            break;
        }
        t += 1;
        wealth.step(z);

        const StreamAggregates agg = aggregate_stream_logs(wealth.per_stream_logs());
        const std::optional<double> mv_log =
            needs_mv ? std::optional<double>(wealth.mv_log()) : std::nullopt;
        const std::optional<double> ftrl_log =
            needs_ftrl ? std::optional<double>(wealth.ftrl_log()) : std::nullopt;

        const bool record_now = options.record_trajectories && t % options.stride == 0;
        if (record_now) result.recorded_ts.push_back(t);

        for (std::size_t j = 0; j < n; ++j) {
            const MergedStat stat =
                merged_statistic_from(specs[j].method, agg, mv_log, ftrl_log);
            const bool was_rejected = decisions[j].rejected;
            decisions[j] = decide(specs[j], stat.statistic, stat.threshold_offset, decisions[j]);
            if (!was_rejected && decisions[j].rejected) {
                result.records[j].tau = t;
                result.records[j].censored = false;
                result.records[j].argmax_stream = agg.argmax;
                still_running -= 1;
            }
            if (record_now) result.trajectories[j].push_back(stat.statistic);
        }

        if (still_running == 0 && !options.run_to_horizon && !options.record_trajectories)
            break;
    }

    for (std::size_t j = 0; j < n; ++j) {
        if (!decisions[j].rejected) {
            result.records[j].tau = t;
            result.records[j].censored = true;
            result.records[j].argmax_stream = -1;
        }
    }
    result.steps = t;
    return result;
}

} // namespace seqaudit
