#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqaudit/errors.hpp"
#include "seqaudit/oracles.hpp"
#include "seqaudit/testing.hpp"
#include "seqaudit/wealth.hpp"

using namespace seqaudit;

namespace {

// Deterministic in-memory outcome source for path-level tests.
class FixedSource final : public StreamSource {
  public:
    FixedSource(int k, std::vector<std::vector<double>> rows)
        : k_(k), rows_(std::move(rows)) {}
    int k() const override { return k_; }
    bool next(std::vector<double>& out) override {
        if (pos_ >= rows_.size()) return false;
        out = rows_[pos_++];
        return true;
    }

  private:
    int k_;
    std::vector<std::vector<double>> rows_;
    std::size_t pos_ = 0;
};

std::vector<std::vector<double>> repeated_row(const std::vector<double>& row, int n) {
    return std::vector<std::vector<double>>(static_cast<std::size_t>(n), row);
}

} // namespace

TEST_SUITE("merging") {
    TEST_CASE("all wealths at 1 merge to statistic 0 and nothing rejects at alpha=0.01") {
        const std::vector<double> logs(5, 0.0);
        for (Method m : {Method::bonf, Method::prod, Method::ave, Method::balance,
                         Method::max_union}) {
            const MergedStat s = merged_statistic(m, logs);
            CHECK(s.statistic == doctest::Approx(0.0).epsilon(1e-14));
            const TestDecision d = decide({m, 0.01}, s.statistic, s.threshold_offset, {});
            CHECK_FALSE(d.rejected);
        }
    }

    TEST_CASE("k=2 wealths (8,2): prod 16, ave 5, balance 10.5") {
        const std::vector<double> logs{std::log(8.0), std::log(2.0)};
        CHECK(merged_statistic(Method::prod, logs).statistic ==
              doctest::Approx(std::log(16.0)).epsilon(1e-12));
        CHECK(merged_statistic(Method::ave, logs).statistic ==
              doctest::Approx(std::log(5.0)).epsilon(1e-12));
        CHECK(merged_statistic(Method::balance, logs).statistic ==
              doctest::Approx(std::log(10.5)).epsilon(1e-12));
        CHECK(merged_statistic(Method::bonf, logs).statistic ==
              doctest::Approx(std::log(8.0)).epsilon(1e-12));
        CHECK(merged_statistic(Method::bonf, logs).threshold_offset ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
        CHECK(merged_statistic(Method::max_union, logs).statistic ==
              doctest::Approx(std::log(16.0)).epsilon(1e-12));
        CHECK(merged_statistic(Method::max_union, logs).threshold_offset ==
              doctest::Approx(std::log(2.0)).epsilon(1e-12));
    }

    TEST_CASE("bonferroni k=10 at alpha=0.01 rejects at max wealth k/alpha = 1000") {
        std::vector<double> logs(10, 0.0);
        logs[3] = std::log(1000.5);
        MergedStat s = merged_statistic(Method::bonf, logs);
        CHECK(decide({Method::bonf, 0.01}, s.statistic, s.threshold_offset, {}).rejected);
        logs[3] = std::log(999.5);
        s = merged_statistic(Method::bonf, logs);
        CHECK_FALSE(
            decide({Method::bonf, 0.01}, s.statistic, s.threshold_offset, {}).rejected);
        // a statistic equal to the bar itself rejects (ties reject)
        const double bar = std::log(1.0 / 0.01) + s.threshold_offset;
        CHECK(decide({Method::bonf, 0.01}, bar, s.threshold_offset, {}).rejected);
    }

    TEST_CASE("average statistic ln(101) rejects at alpha=0.01") {
        const TestDecision d = decide({Method::ave, 0.01}, std::log(101.0), 0.0, {});
        CHECK(d.rejected);
    }

    TEST_CASE("tie at the threshold rejects") {
        const double alpha = 0.05;
        const TestDecision d =
            decide({Method::prod, alpha}, std::log(1.0 / alpha), 0.0, {});
        CHECK(d.rejected);
    }

    TEST_CASE("rejection is sticky") {
        TestDecision d = decide({Method::prod, 0.5}, 10.0, 0.0, {});
        CHECK(d.rejected);
        d = decide({Method::prod, 0.5}, -10.0, 0.0, d);
        CHECK(d.rejected);
        CHECK(d.t == 2);
    }

    TEST_CASE("requesting a disabled process is a configuration error") {
        const std::vector<double> logs(3, 0.0);
        CHECK_THROWS_AS(merged_statistic(Method::mv_ons, logs), ConfigError);
        CHECK_THROWS_AS(merged_statistic(Method::ftrl, logs), ConfigError);
        CHECK(merged_statistic(Method::mv_ons, logs, 1.5, std::nullopt).statistic == 1.5);
    }

    TEST_CASE("bad alpha is rejected") {
        CHECK_THROWS_AS(decide({Method::prod, 0.0}, 0.0, 0.0, {}), ConfigError);
        CHECK_THROWS_AS(decide({Method::prod, 1.0}, 0.0, 0.0, {}), ConfigError);
    }

    TEST_CASE("method names round-trip and unknown names fail") {
        for (Method m : {Method::bonf, Method::mv_ons, Method::ftrl, Method::prod,
                         Method::ave, Method::balance, Method::max_union})
            CHECK(method_from_string(method_name(m)) == m);
        CHECK_THROWS_AS(method_from_string("bonferroni"), ConfigError);
    }

    TEST_CASE("merge inequalities and log/linear consistency on random wealth vectors") {
        for (int inst = 0; inst < 200; ++inst) {
            const int k = 1 + static_cast<int>(oracle_uniform(31, inst, 0, 0) * 3.999);
            std::vector<double> wealth(static_cast<std::size_t>(k));
            std::vector<double> logs(static_cast<std::size_t>(k));
            for (int i = 0; i < k; ++i) {
                // linear wealth spread across [1e-3, 1e3]
                const double e = 6.0 * oracle_uniform(31, inst, 1, i) - 3.0;
                wealth[static_cast<std::size_t>(i)] = std::pow(10.0, e);
                logs[static_cast<std::size_t>(i)] =
                    std::log(wealth[static_cast<std::size_t>(i)]);
            }
            double sum = 0.0, maxw = 0.0, prod = 1.0;
            for (double w : wealth) {
                sum += w;
                maxw = std::max(maxw, w);
                prod *= w;
            }
            const double ave_stat = merged_statistic(Method::ave, logs).statistic;
            const double prod_stat = merged_statistic(Method::prod, logs).statistic;
            const double bal_stat = merged_statistic(Method::balance, logs).statistic;
            const double bonf_stat = merged_statistic(Method::bonf, logs).statistic;

            // direct linear-domain evaluation
            CHECK(ave_stat == doctest::Approx(std::log(sum / k)).epsilon(1e-10));
            CHECK(prod_stat == doctest::Approx(std::log(prod)).epsilon(1e-10));
            CHECK(bal_stat ==
                  doctest::Approx(std::log(0.5 * sum / k + 0.5 * prod)).epsilon(1e-10));

            // pointwise dominance relations
            CHECK(bal_stat >= std::log(0.5) + std::max(prod_stat, ave_stat) - 1e-12);
            CHECK(ave_stat <= bonf_stat + 1e-12);
        }
    }
}

TEST_SUITE("run_until_stop") {
    TEST_CASE("null stream never rejects; everything censors at the horizon") {
        FixedSource source(2, repeated_row({0.0, 0.0}, 50));
        std::vector<TestSpec> specs;
        for (Method m : default_methods(2)) specs.push_back({m, 0.01});
        const RunResult res = run_until_stop(source, specs, 50);
        for (const StoppingRecord& r : res.records) {
            CHECK(r.censored);
            CHECK(r.tau == 50);
        }
    }

    TEST_CASE("k=1 deterministic ones: bonf/prod/ave/balance stop together") {
        std::vector<TestSpec> specs = {{Method::bonf, 0.01},
                                       {Method::prod, 0.01},
                                       {Method::ave, 0.01},
                                       {Method::balance, 0.01},
                                       {Method::max_union, 0.01}};
        FixedSource source(1, repeated_row({1.0}, 100));
        const RunResult res = run_until_stop(source, specs, 100);
        for (int j = 0; j < 4; ++j) {
            CHECK_FALSE(res.records[static_cast<std::size_t>(j)].censored);
            CHECK(res.records[static_cast<std::size_t>(j)].tau == res.records[0].tau);
        }
        // max_union carries the 2/alpha threshold, so it stops strictly later
        CHECK(res.records[4].tau > res.records[0].tau);
    }

    TEST_CASE("looser alpha stops no later on the same path") {
        std::vector<std::vector<double>> rows;
        for (int t = 0; t < 400; ++t) {
            const double u = oracle_uniform(17, 0, static_cast<std::uint64_t>(t), 0);
            rows.push_back({u < 0.75 ? 0.8 : -0.8});
        }
        FixedSource source(1, rows);
        const std::vector<TestSpec> specs = {{Method::prod, 0.01}, {Method::prod, 0.1}};
        const RunResult res = run_until_stop(source, specs, 400);
        REQUIRE_FALSE(res.records[1].censored);
        CHECK(res.records[1].tau <= res.records[0].tau);
    }

    TEST_CASE("balance stops no later than max_union on any path") {
        for (int inst = 0; inst < 20; ++inst) {
            std::vector<std::vector<double>> rows;
            for (int t = 0; t < 300; ++t) {
                std::vector<double> row(3);
                for (int i = 0; i < 3; ++i) {
                    const double u = oracle_uniform(19, inst, static_cast<std::uint64_t>(t),
                                                    static_cast<std::uint64_t>(i));
                    row[static_cast<std::size_t>(i)] = u < 0.65 ? 0.7 : -0.7;
                }
                rows.push_back(row);
            }
            FixedSource source(3, rows);
            const std::vector<TestSpec> specs = {{Method::balance, 0.05},
                                                 {Method::max_union, 0.05}};
            const RunResult res = run_until_stop(source, specs, 300);
            const int tau_balance = res.records[0].censored ? 301 : res.records[0].tau;
            const int tau_union = res.records[1].censored ? 301 : res.records[1].tau;
            CHECK(tau_balance <= tau_union);
        }
    }

    TEST_CASE("source exhaustion censors with the actual length") {
        FixedSource source(1, repeated_row({0.0}, 7));
        const std::vector<TestSpec> specs = {{Method::prod, 0.01}};
        const RunResult res = run_until_stop(source, specs, 100);
        CHECK(res.exhausted);
        CHECK(res.records[0].censored);
        CHECK(res.records[0].tau == 7);
        CHECK(res.steps == 7);
    }

    TEST_CASE("trajectories respect the stride and record the statistic") {
        FixedSource source(1, repeated_row({0.5}, 20));
        const std::vector<TestSpec> specs = {{Method::prod, 1e-9}};
        RunOptions options;
        options.record_trajectories = true;
        options.stride = 5;
        const RunResult res = run_until_stop(source, specs, 20, options);
        CHECK(res.recorded_ts == std::vector<int>{5, 10, 15, 20});
        REQUIRE(res.trajectories.size() == 1);
        CHECK(res.trajectories[0].size() == 4);
        // wealth of a positive-mean deterministic stream grows
        CHECK(res.trajectories[0][3] > res.trajectories[0][0]);
    }

    TEST_CASE("argmax stream diagnostic points at the driving stream") {
        std::vector<std::vector<double>> rows = repeated_row({0.0, 1.0, 0.0}, 200);
        FixedSource source(3, rows);
        const std::vector<TestSpec> specs = {{Method::bonf, 0.05}};
        const RunResult res = run_until_stop(source, specs, 200);
        REQUIRE_FALSE(res.records[0].censored);
        CHECK(res.records[0].argmax_stream == 1);
    }
}
