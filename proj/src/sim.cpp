#include "seqaudit/sim.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "seqaudit/errors.hpp"
#include "seqaudit/math_util.hpp"

namespace seqaudit {

namespace {

std::unique_ptr<StreamSource> make_source(const SimulationConfig& config,
                                          std::uint64_t replication) {
    if (const auto* synth = std::get_if<SyntheticStreamSpec>(&config.stream))
        return std::make_unique<SyntheticSource>(*synth, replication);
    return std::make_unique<ReplaySource>(std::get<ReplaySpec>(config.stream));
}

void validate(const SimulationConfig& config) {
    if (config.runs < 1) throw ConfigError("runs must be at least 1");
    if (config.horizon < 1) throw ConfigError("horizon must be at least 1");
    if (config.trajectory_stride < 1) throw ConfigError("trajectory stride must be at least 1");
    if (config.tests.empty()) throw ConfigError("no tests configured");
    if (const auto* replay = std::get_if<ReplaySpec>(&config.stream)) {
        if (replay->path == "-" && config.runs != 1)
            throw ConfigError("replaying stdin supports a single run only");
    }
    if (const auto* synth = std::get_if<SyntheticStreamSpec>(&config.stream)) {
        // surfaces infeasible moments and bad dimensions before any work starts
        const SyntheticSource probe(*synth, 0);
        (void)probe;
    }
}

} // namespace

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SEQAUDIT_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

StoppingSummary run_replications(const SimulationConfig& config) {
    validate(config);

    const int runs = config.runs;
    RunOptions options;
    options.record_trajectories = config.record_trajectories;
    options.stride = config.trajectory_stride;
    options.run_to_horizon = config.record_trajectories;

    std::vector<RunResult> results(static_cast<std::size_t>(runs));
    std::atomic<int> next_rep{0};
    std::mutex error_mutex;
    std::string first_error;
    int first_error_rep = std::numeric_limits<int>::max();

    auto worker = [&]() {
        while (true) {
            const int rep = next_rep.fetch_add(1);
            if (rep >= runs) return;
            try {
                auto source = make_source(config, static_cast<std::uint64_t>(rep));
                results[static_cast<std::size_t>(rep)] =
                    run_until_stop(*source, config.tests, config.horizon, options);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (rep < first_error_rep) {
                    first_error_rep = rep;
                    first_error = e.what();
                }
            }
        }
    };

    const int threads = std::min(resolve_thread_count(config.threads), runs);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error_rep != std::numeric_limits<int>::max())
        throw std::runtime_error("replication " + std::to_string(first_error_rep) + ": " +
                                 first_error);

    StoppingSummary summary;
    summary.tests = config.tests;
    summary.runs = runs;
    const std::size_t n_tests = config.tests.size();
    summary.records.assign(n_tests, {});
    summary.per_test.assign(n_tests, {});

    // Trajectories can be ragged only when a replay source ran dry; the
    // quantiles then cover the steps every replication reached.
    std::size_t recorded = std::numeric_limits<std::size_t>::max();
    for (const RunResult& r : results)
        recorded = std::min(recorded, r.recorded_ts.size());
    if (!config.record_trajectories) recorded = 0;
    if (recorded > 0)
        summary.recorded_ts.assign(results[0].recorded_ts.begin(),
                                   results[0].recorded_ts.begin() +
                                       static_cast<std::ptrdiff_t>(recorded));

    for (std::size_t j = 0; j < n_tests; ++j) {
        auto& per_test = summary.per_test[j];
        auto& records = summary.records[j];
        records.reserve(static_cast<std::size_t>(runs));
        std::vector<double> all_taus;
        all_taus.reserve(static_cast<std::size_t>(runs));
        double tau_sum = 0.0;
        for (const RunResult& r : results) {
            const StoppingRecord& rec = r.records[j];
            records.push_back(rec);
            all_taus.push_back(static_cast<double>(rec.tau));
            if (rec.censored) {
                per_test.censored_count += 1;
            } else {
                per_test.taus.push_back(rec.tau);
                tau_sum += rec.tau;
            }
        }
        per_test.mean_uncensored =
            per_test.taus.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : tau_sum / static_cast<double>(per_test.taus.size());
        per_test.tau_q25 = quantile(all_taus, 0.25);
        per_test.tau_q50 = quantile(all_taus, 0.50);
        per_test.tau_q75 = quantile(all_taus, 0.75);

        per_test.trajectory_quantiles.resize(recorded);
        std::vector<double> column(static_cast<std::size_t>(runs));
        for (std::size_t idx = 0; idx < recorded; ++idx) {
            for (int rep = 0; rep < runs; ++rep)
                column[static_cast<std::size_t>(rep)] =
                    results[static_cast<std::size_t>(rep)].trajectories[j][idx];
            per_test.trajectory_quantiles[idx] = {quantile(column, 0.25),
                                                  quantile(column, 0.50),
                                                  quantile(column, 0.75)};
        }
    }
    return summary;
}

std::vector<Type1Estimate> type1_estimate(const SimulationConfig& config) {
    const auto* synth = std::get_if<SyntheticStreamSpec>(&config.stream);
    if (synth == nullptr)
        throw ConfigError("type-I estimation needs a synthetic stream whose means are "
                          "verifiably zero");
    if (synth->nonnull_count() > 0 && synth->nonnull_mean != 0.0)
        throw ConfigError("type-I estimation refused: configuration has " +
                          std::to_string(synth->nonnull_count()) +
                          " streams with nonzero mean");

    const StoppingSummary summary = run_replications(config);
    std::vector<Type1Estimate> estimates;
    estimates.reserve(summary.tests.size());
    for (std::size_t j = 0; j < summary.tests.size(); ++j) {
        const double runs = static_cast<double>(summary.runs);
        const double rejected =
            runs - static_cast<double>(summary.per_test[j].censored_count);
        const double rate = rejected / runs;
        const double se = std::sqrt(rate * (1.0 - rate) / runs);
        estimates.push_back({summary.tests[j], rate, se});
    }
    return estimates;
}

} // namespace seqaudit
