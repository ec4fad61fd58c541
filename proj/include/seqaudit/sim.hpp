#pragma once
/*
Replication harness: N independent replications of one configuration,
collecting stopping-time distributions, censoring rates, and
wealth-trajectory quantiles.

Replications are independent tasks pulled from an atomic counter;
because every synthetic draw is keyed by (seed, replication, step,
coordinate) and aggregation is a reduction ordered by replication
index, the summary is bit-identical at any thread count.
*/

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "seqaudit/testing.hpp"

namespace seqaudit {

struct SimulationConfig {
    std::variant<SyntheticStreamSpec, ReplaySpec> stream;
    std::vector<TestSpec> tests;
    int horizon = 1000;
    int runs = 1000;
    bool record_trajectories = false;
    int trajectory_stride = 1;
    int threads = 0;  // 0: SEQAUDIT_THREADS env var, then hardware count
};

struct TestSummary {
    std::vector<int> taus;  // uncensored stopping times, replication order
    int censored_count = 0;
    double mean_uncensored = 0.0;  // NaN when every run is censored
    double tau_q25 = 0.0, tau_q50 = 0.0, tau_q75 = 0.0;  // over all runs,
                                                         // censored at horizon
    std::vector<std::array<double, 3>> trajectory_quantiles;  // {q25,q50,q75}
};

struct StoppingSummary {
    std::vector<TestSpec> tests;
    std::vector<std::vector<StoppingRecord>> records;  // [test][replication]
    std::vector<TestSummary> per_test;
    std::vector<int> recorded_ts;
    int runs = 0;
};

int resolve_thread_count(int requested);

StoppingSummary run_replications(const SimulationConfig& config);

struct Type1Estimate {
    TestSpec spec;
    double rate;
    double std_error;
};

// Rejection rate under the null with its binomial standard error.
// Refuses configurations that are not actually null.
std::vector<Type1Estimate> type1_estimate(const SimulationConfig& config);

} // namespace seqaudit
