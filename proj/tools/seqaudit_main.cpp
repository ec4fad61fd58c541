// seqaudit — multi-stream sequential testing front end.
//
//   simulate   Monte-Carlo stopping-time experiments on synthetic streams
//   replay     live decisions over recorded outcome rows (CSV or stdin)
//   check      on-demand invariant and oracle suites
//
// Exit codes: 0 success, 1 runtime failure, 2 bad configuration or
// unparseable input, 3 alarm raised (replay --stop-on-reject).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqaudit/betting.hpp"
#include "seqaudit/errors.hpp"
#include "seqaudit/oracles.hpp"
#include "seqaudit/projection.hpp"
#include "seqaudit/sim.hpp"
#include "seqaudit/wealth.hpp"

using nlohmann::ordered_json;
using namespace seqaudit;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAlarm = 3;

struct OutputPaths {
    std::string stopping_csv = "stopping_times.csv";
    std::string trajectories_csv = "trajectories.csv";
    std::string summary_json = "summary.json";
};

struct SimulateArgs {
    SyntheticStreamSpec synthetic;
    std::optional<ReplaySpec> replay;
    std::vector<std::string> test_names;  // empty: defaults for k
    double alpha = 0.01;
    int horizon = 1000;
    int runs = 1000;
    bool record_trajectories = true;
    int stride = 1;
    int threads = 0;
    bool linear = false;
    OutputPaths out;
};

void reject_unknown_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* key) {
                return item.key() == key;
            }) == allowed.end())
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

void load_config_file(const std::string& path, SimulateArgs& args) {
    std::ifstream in(path);
    if (!in.is_open()) throw ConfigError("cannot open config file '" + path + "'");
    ordered_json config;
    try {
        config = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(config,
                        {"stream", "tests", "alpha", "horizon", "runs",
                         "record_trajectories", "trajectory_stride", "threads", "output"},
                        "config");

    if (config.contains("stream")) {
        const auto& stream = config["stream"];
        const std::string type = stream.value("type", "synthetic");
        if (type == "synthetic") {
            reject_unknown_keys(stream, {"type", "k", "fraction", "mean", "var", "seed"},
                                "stream");
            args.synthetic.k = stream.value("k", args.synthetic.k);
            args.synthetic.nonnull_fraction =
                stream.value("fraction", args.synthetic.nonnull_fraction);
            args.synthetic.nonnull_mean = stream.value("mean", args.synthetic.nonnull_mean);
            args.synthetic.variance = stream.value("var", args.synthetic.variance);
            args.synthetic.seed = stream.value("seed", args.synthetic.seed);
        } else if (type == "replay") {
            reject_unknown_keys(stream, {"type", "path", "delimiter", "has_header"},
                                "stream");
            ReplaySpec replay;
            replay.path = stream.value("path", std::string("-"));
            const std::string delim = stream.value("delimiter", std::string(","));
            if (delim.size() != 1)
                throw ConfigError("delimiter must be a single character");
            replay.delimiter = delim[0];
            replay.has_header = stream.value("has_header", false);
            args.replay = replay;
        } else {
            throw ConfigError("stream type must be 'synthetic' or 'replay'");
        }
    }
    if (config.contains("tests")) {
        args.test_names.clear();
        for (const auto& name : config["tests"])
            args.test_names.push_back(name.get<std::string>());
    }
    args.alpha = config.value("alpha", args.alpha);
    args.horizon = config.value("horizon", args.horizon);
    args.runs = config.value("runs", args.runs);
    args.record_trajectories =
        config.value("record_trajectories", args.record_trajectories);
    args.stride = config.value("trajectory_stride", args.stride);
    args.threads = config.value("threads", args.threads);
    if (config.contains("output")) {
        const auto& out = config["output"];
        reject_unknown_keys(out, {"stopping_csv", "trajectories_csv", "summary_json"},
                            "output");
        args.out.stopping_csv = out.value("stopping_csv", args.out.stopping_csv);
        args.out.trajectories_csv =
            out.value("trajectories_csv", args.out.trajectories_csv);
        args.out.summary_json = out.value("summary_json", args.out.summary_json);
    }
}

std::vector<TestSpec> resolve_tests(const std::vector<std::string>& names, int k,
                                    double alpha) {
    std::vector<TestSpec> specs;
    if (names.empty()) {
        for (Method m : default_methods(k)) specs.push_back({m, alpha});
    } else {
        for (const std::string& name : names)
            specs.push_back({method_from_string(name), alpha});
    }
    return specs;
}

void ensure_writable(const std::string& path) {
    std::ofstream probe(path, std::ios::app);
    if (!probe.is_open()) throw ConfigError("output path not writable: '" + path + "'");
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double presented(double log_wealth, bool linear) {
    // presentation only: linear wealth clipped below at 1e-3 for log-scale plots
    return linear ? std::max(std::exp(log_wealth), 1e-3) : log_wealth;
}

void write_stopping_csv(const std::string& path, const StoppingSummary& summary) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw ConfigError("output path not writable: '" + path + "'");
    out << "test,run,tau,censored\n";
    for (std::size_t j = 0; j < summary.tests.size(); ++j) {
        const char* name = method_name(summary.tests[j].method);
        for (int rep = 0; rep < summary.runs; ++rep) {
            const StoppingRecord& r = summary.records[j][static_cast<std::size_t>(rep)];
            out << name << ',' << rep << ',' << r.tau << ',' << (r.censored ? 1 : 0)
                << '\n';
        }
    }
}

void write_trajectories_csv(const std::string& path, const StoppingSummary& summary,
                            bool linear) {
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw ConfigError("output path not writable: '" + path + "'");
    const char* header = linear
                             ? "test,t,q25_wealth,q50_wealth,q75_wealth\n"
                             : "test,t,q25_log_wealth,q50_log_wealth,q75_log_wealth\n";
    out << header;
    for (std::size_t j = 0; j < summary.tests.size(); ++j) {
        const char* name = method_name(summary.tests[j].method);
        const auto& quantiles = summary.per_test[j].trajectory_quantiles;
        for (std::size_t idx = 0; idx < quantiles.size(); ++idx) {
            out << name << ',' << summary.recorded_ts[idx];
            for (double q : quantiles[idx]) out << ',' << format_double(presented(q, linear));
            out << '\n';
        }
    }
}

ordered_json config_echo(const SimulateArgs& args) {
    ordered_json stream;
    if (args.replay) {
        stream = {{"type", "replay"},
                  {"path", args.replay->path},
                  {"delimiter", std::string(1, args.replay->delimiter)},
                  {"has_header", args.replay->has_header}};
    } else {
        stream = {{"type", "synthetic"},
                  {"k", args.synthetic.k},
                  {"fraction", args.synthetic.nonnull_fraction},
                  {"mean", args.synthetic.nonnull_mean},
                  {"var", args.synthetic.variance},
                  {"seed", args.synthetic.seed}};
    }
    return {{"stream", stream},
            {"tests", args.test_names},
            {"alpha", args.alpha},
            {"horizon", args.horizon},
            {"runs", args.runs},
            {"record_trajectories", args.record_trajectories},
            {"trajectory_stride", args.stride},
            {"threads", args.threads}};
}

void write_summary_json(const std::string& path, const SimulateArgs& args,
                        const StoppingSummary& summary) {
    ordered_json tests;
    for (std::size_t j = 0; j < summary.tests.size(); ++j) {
        const TestSummary& ts = summary.per_test[j];
        ordered_json entry = {
            {"mean_uncensored", ts.taus.empty() ? ordered_json(nullptr)
                                                : ordered_json(ts.mean_uncensored)},
            {"tau_q25", ts.tau_q25},
            {"tau_q50", ts.tau_q50},
            {"tau_q75", ts.tau_q75},
            {"censored_count", ts.censored_count},
            {"censoring_rate",
             static_cast<double>(ts.censored_count) / static_cast<double>(summary.runs)},
        };
        tests[method_name(summary.tests[j].method)] = entry;
    }
    ordered_json doc = {{"version", kVersion},
                        {"seed", args.synthetic.seed},
                        {"runs", summary.runs},
                        {"config", config_echo(args)},
                        {"tests", tests}};
    std::ofstream out(path, std::ios::trunc);
    if (!out.is_open()) throw ConfigError("output path not writable: '" + path + "'");
    out << doc.dump(2) << '\n';
}

int cmd_simulate(const SimulateArgs& args) {
    SimulationConfig config;
    int default_k = args.synthetic.k;
    if (args.replay) {
        config.stream = *args.replay;
        // default test set depends on the column count; peek it from the
        // file (stdin cannot be peeked, so defaults there skip mv_ons)
        if (args.test_names.empty())
            default_k = args.replay->path != "-" ? ReplaySource(*args.replay).k() : 1000;
    } else {
        config.stream = args.synthetic;
    }
    config.tests = resolve_tests(args.test_names, default_k, args.alpha);
    config.horizon = args.horizon;
    config.runs = args.runs;
    config.record_trajectories = args.record_trajectories;
    config.trajectory_stride = args.stride;
    config.threads = args.threads;

    ensure_writable(args.out.stopping_csv);
    ensure_writable(args.out.trajectories_csv);
    ensure_writable(args.out.summary_json);

    const StoppingSummary summary = run_replications(config);

    SimulateArgs echo = args;
    echo.test_names.clear();
    for (const TestSpec& spec : config.tests)
        echo.test_names.emplace_back(method_name(spec.method));
    write_stopping_csv(args.out.stopping_csv, summary);
    write_trajectories_csv(args.out.trajectories_csv, summary, args.linear);
    write_summary_json(args.out.summary_json, echo, summary);
    return kExitOk;
}

struct ReplayArgs {
    std::string input = "-";
    std::string delimiter = ",";
    bool has_header = false;
    double alpha = 0.01;
    std::vector<std::string> test_names;
    bool stop_on_reject = false;
    bool linear = false;
};

int cmd_replay(const ReplayArgs& args) {
    if (args.delimiter.size() != 1)
        throw ConfigError("delimiter must be a single character");
    ReplaySpec spec;
    spec.path = args.input;
    spec.delimiter = args.delimiter[0];
    spec.has_header = args.has_header;
    ReplaySource source(spec);

    const int k = source.k();
    if (k <= 0) return kExitOk;  // nothing to audit

    const std::vector<TestSpec> specs = resolve_tests(args.test_names, k, args.alpha);
    bool needs_mv = false, needs_ftrl = false;
    for (const TestSpec& s : specs) {
        needs_mv |= s.method == Method::mv_ons;
        needs_ftrl |= s.method == Method::ftrl;
    }
    MultiStreamWealth wealth(k, needs_mv, needs_ftrl);
    std::vector<TestDecision> decisions(specs.size());

    const char* value_key = args.linear ? "wealth" : "log_wealth";
    bool alerted = false;
    long t = 0;
    std::vector<double> row;
    while (source.next(row)) {
        t += 1;
        wealth.step(row);
        const StreamAggregates agg = aggregate_stream_logs(wealth.per_stream_logs());
        const std::optional<double> mv_log =
            needs_mv ? std::optional<double>(wealth.mv_log()) : std::nullopt;
        const std::optional<double> ftrl_log =
            needs_ftrl ? std::optional<double>(wealth.ftrl_log()) : std::nullopt;

        bool new_alert = false;
        for (std::size_t j = 0; j < specs.size(); ++j) {
            const MergedStat stat =
                merged_statistic_from(specs[j].method, agg, mv_log, ftrl_log);
            const bool was_rejected = decisions[j].rejected;
            decisions[j] =
                decide(specs[j], stat.statistic, stat.threshold_offset, decisions[j]);
            new_alert |= !was_rejected && decisions[j].rejected;
            const ordered_json line = {{"t", t},
                                       {"test", method_name(specs[j].method)},
                                       {value_key, presented(stat.statistic, args.linear)},
                                       {"rejected", decisions[j].rejected}};
            std::cout << line.dump() << '\n';
        }
        if (new_alert && !alerted) {
            alerted = true;
            ordered_json alert = {{"alert", "reject"}, {"t", t}};
            for (std::size_t j = 0; j < specs.size(); ++j)
                if (decisions[j].rejected) {
                    alert["test"] = method_name(specs[j].method);
                    break;
                }
            std::cout << alert.dump() << '\n';
        }
        if (alerted && args.stop_on_reject) return kExitAlarm;
    }
    return kExitOk;
}

void report(const PropertyResult& result, bool& all_pass) {
    std::cout << (result.pass ? "PASS" : "FAIL") << "  " << result.name << "  ("
              << result.detail << ")\n";
    all_pass &= result.pass;
}

int cmd_check(const std::string& suite) {
    bool all_pass = true;
    if (suite == "martingale-enum") {
        for (int k : {1, 2}) {
            const int depth = k == 1 ? 10 : 8;
            for (const auto& d : enumerate_martingale_deviation(k, depth, true, true)) {
                PropertyResult r;
                r.name = "martingale-enum-k" + std::to_string(k) + "-" + d.process;
                r.pass = d.max_abs_deviation <= 1e-9;
                r.detail = "max |E[W_t] - 1| = " + format_double(d.max_abs_deviation) +
                           " over all +-1 paths, t <= " + std::to_string(depth);
                report(r, all_pass);
            }
        }
    } else if (suite == "lemma-bounds") {
        report(lemma_log_wealth_check(20240901, 1000, 500), all_pass);
        report(ftrl_l1_regret_check(20240902, 100, 16, 500), all_pass);
        report(ftrl_simplex_regret_check(20240903, 100, 16, 500), all_pass);
    } else if (suite == "projection-oracle") {
        double worst_linf = 0.0, worst_kkt = 0.0;
        bool beats_grid = true;
        for (int inst = 0; inst < 50; ++inst) {
            const int k = 2 + inst % 2;
            const Eigen::MatrixXd H = random_spd(k, 500 + inst);
            Eigen::VectorXd y(k);
            for (int i = 0; i < k; ++i)
                y(i) = 2.0 * oracle_uniform(600 + inst, 5, i, 0) - 1.0;
            y *= (0.75 + 1.75 * oracle_uniform(600 + inst, 6, 0, 0)) / y.lpNorm<1>();
            const L1ProjectionResult res = project_l1_h_full(y, H, 0.5);
            const Eigen::VectorXd g = grid_min_l1ball(H, y, 0.5, 1e-3);
            worst_linf = std::max(worst_linf, (res.v - g).lpNorm<Eigen::Infinity>());
            worst_kkt =
                std::max(worst_kkt, l1h_kkt_residual(y, H, 0.5, res.v, res.multiplier));
            beats_grid &= l1ball_objective(H, y, res.v) <=
                          l1ball_objective(H, y, g) + 1e-12;
        }
        PropertyResult r;
        r.name = "projection-vs-grid";
        r.pass = worst_linf <= 2e-3 && worst_kkt <= 1e-8 && beats_grid;
        r.detail = "50 instances, worst linf " + format_double(worst_linf) +
                   ", worst KKT residual " + format_double(worst_kkt);
        report(r, all_pass);
    } else if (suite == "ftrl-oracle") {
        double worst = 0.0;
        for (int inst = 0; inst < 50; ++inst) {
            const std::size_t d =
                2 + static_cast<std::size_t>(oracle_uniform(700, inst, 0, 0) * 6.999);
            const std::size_t j =
                1 + static_cast<std::size_t>(oracle_uniform(700, inst, 1, 0) * 99.0);
            SimplexFtrlState state(d);
            state.step_count = j;
            for (std::size_t i = 0; i < d; ++i)
                state.grad_sum[i] = (2.0 * oracle_uniform(700, inst, 2, i) - 1.0) *
                                    static_cast<double>(j);
            const auto fast = ftrl_simplex_step(state);
            const auto slow = simplex_argmin_numeric(state.grad_sum, state.step_count);
            for (std::size_t i = 0; i < d; ++i)
                worst = std::max(worst, std::abs(fast[i] - slow[i]));
        }
        PropertyResult r;
        r.name = "ftrl-closed-form-vs-numeric";
        r.pass = worst <= 1e-6;
        r.detail = "50 instances (d <= 8, j <= 100), worst coordinate error " +
                   format_double(worst);
        report(r, all_pass);
    } else if (suite == "level-alpha") {
        for (const auto& r : level_alpha_check(0.05, 10, 400, 200, 20240904))
            report(r, all_pass);
    } else {
        std::cerr << "unknown suite '" << suite
                  << "' (expected martingale-enum, lemma-bounds, projection-oracle, "
                     "ftrl-oracle, or level-alpha)\n";
        return kExitConfig;
    }
    return all_pass ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-stream sequential testing by betting"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    SimulateArgs sim_args;
    std::string config_path;
    CLI::App* simulate = app.add_subcommand("simulate", "run Monte-Carlo experiments");
    simulate->add_option("--config", config_path, "JSON configuration file");
    simulate->add_option("--k", sim_args.synthetic.k, "number of streams");
    simulate->add_option("--fraction", sim_args.synthetic.nonnull_fraction,
                         "fraction of streams with nonzero mean");
    simulate->add_option("--mean", sim_args.synthetic.nonnull_mean,
                         "mean of the non-null streams");
    simulate->add_option("--var", sim_args.synthetic.variance, "variance of every stream");
    simulate->add_option("--seed", sim_args.synthetic.seed, "master seed");
    simulate->add_option("--alpha", sim_args.alpha, "significance level");
    simulate->add_option("--horizon", sim_args.horizon, "steps per replication");
    simulate->add_option("--runs", sim_args.runs, "number of replications");
    simulate->add_option("--tests", sim_args.test_names,
                         "comma-separated tests (bonf,mv_ons,ftrl,prod,ave,balance,"
                         "max_union)")
        ->delimiter(',');
    simulate->add_option("--threads", sim_args.threads,
                         "worker threads (0: SEQAUDIT_THREADS or hardware)");
    simulate->add_option("--stride", sim_args.stride, "trajectory recording stride");
    simulate->add_flag("--linear", sim_args.linear,
                       "write linear wealth clipped at 1e-3 instead of log wealth");

    ReplayArgs replay_args;
    CLI::App* replay = app.add_subcommand("replay", "audit a recorded stream");
    replay->add_option("input", replay_args.input, "delimited file, or - for stdin");
    replay->add_option("--alpha", replay_args.alpha, "significance level");
    replay->add_option("--tests", replay_args.test_names, "comma-separated tests")
        ->delimiter(',');
    replay->add_option("--delimiter", replay_args.delimiter, "cell delimiter");
    replay->add_flag("--header", replay_args.has_header,
                     "first row holds stream names");
    replay->add_flag("--stop-on-reject", replay_args.stop_on_reject,
                     "terminate with exit code 3 on the first rejection");
    replay->add_flag("--linear", replay_args.linear,
                     "emit linear wealth clipped at 1e-3 instead of log wealth");

    std::string suite;
    CLI::App* check = app.add_subcommand("check", "run an invariant/oracle suite");
    check
        ->add_option("suite", suite,
                     "martingale-enum | lemma-bounds | projection-oracle | ftrl-oracle | "
                     "level-alpha")
        ->required();

    // Parse the config file first so explicit flags override it.
    bool config_requested = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]).rfind("--config", 0) == 0) config_requested = true;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) {
            if (config_requested) {
                SimulateArgs from_file;
                load_config_file(config_path, from_file);
                // flags given on the command line win over file values
                SimulateArgs merged = from_file;
                if (simulate->count("--k")) merged.synthetic.k = sim_args.synthetic.k;
                if (simulate->count("--fraction"))
                    merged.synthetic.nonnull_fraction = sim_args.synthetic.nonnull_fraction;
                if (simulate->count("--mean"))
                    merged.synthetic.nonnull_mean = sim_args.synthetic.nonnull_mean;
                if (simulate->count("--var"))
                    merged.synthetic.variance = sim_args.synthetic.variance;
                if (simulate->count("--seed")) merged.synthetic.seed = sim_args.synthetic.seed;
                if (simulate->count("--alpha")) merged.alpha = sim_args.alpha;
                if (simulate->count("--horizon")) merged.horizon = sim_args.horizon;
                if (simulate->count("--runs")) merged.runs = sim_args.runs;
                if (simulate->count("--tests")) merged.test_names = sim_args.test_names;
                if (simulate->count("--threads")) merged.threads = sim_args.threads;
                if (simulate->count("--stride")) merged.stride = sim_args.stride;
                if (simulate->count("--linear")) merged.linear = sim_args.linear;
                return cmd_simulate(merged);
            }
            return cmd_simulate(sim_args);
        }
        if (replay->parsed()) return cmd_replay(replay_args);
        if (check->parsed()) return cmd_check(suite);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
