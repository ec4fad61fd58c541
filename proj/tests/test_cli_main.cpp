#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SEQAUDIT_CLI_PATH;

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

fs::path scratch_dir() {
    static int counter = 0;
    const fs::path dir =
        fs::temp_directory_path() / ("seqaudit_cli_test_" + std::to_string(++counter));
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd =
        kCli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WEXITSTATUS(raw);
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

std::string simulate_config(const fs::path& dir, int k, double fraction, double alpha,
                            int runs, int horizon, std::uint64_t seed,
                            const std::vector<std::string>& tests,
                            bool record_trajectories = true) {
    nlohmann::json config = {
        {"stream",
         {{"type", "synthetic"},
          {"k", k},
          {"fraction", fraction},
          {"mean", 0.1},
          {"var", 0.2},
          {"seed", seed}}},
        {"alpha", alpha},
        {"runs", runs},
        {"horizon", horizon},
        {"record_trajectories", record_trajectories},
        {"output",
         {{"stopping_csv", (dir / "stopping_times.csv").string()},
          {"trajectories_csv", (dir / "trajectories.csv").string()},
          {"summary_json", (dir / "summary.json").string()}}}};
    if (!tests.empty()) config["tests"] = tests;
    const fs::path path = dir / "config.json";
    spit(path, config.dump(2));
    return path.string();
}

} // namespace

TEST_SUITE("cli simulate") {
    TEST_CASE("tiny null run writes well-formed files and exits 0") {
        const fs::path dir = scratch_dir();
        const std::string config =
            simulate_config(dir, 2, 0.0, 0.01, 1, 1, 7, {"prod", "ave"});
        const CliResult res = run_cli("simulate --config " + config, dir);
        CHECK(res.exit_code == 0);

        const std::string stopping = slurp(dir / "stopping_times.csv");
        CHECK(stopping == "test,run,tau,censored\nprod,0,1,1\nave,0,1,1\n");
        const std::string traj = slurp(dir / "trajectories.csv");
        CHECK(traj.rfind("test,t,q25_log_wealth,q50_log_wealth,q75_log_wealth\n", 0) == 0);
        CHECK(count_lines(traj) == 3);  // header + one recorded step per test

        const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
        CHECK(summary["version"].is_string());
        CHECK(summary["seed"].get<std::uint64_t>() == 7);
        CHECK(summary["config"]["stream"]["k"].get<int>() == 2);
        CHECK(summary["tests"]["prod"]["censored_count"].get<int>() == 1);
        CHECK(summary["tests"]["prod"]["mean_uncensored"].is_null());
    }

    TEST_CASE("same config twice produces byte-identical outputs") {
        const fs::path dir_a = scratch_dir();
        const fs::path dir_b = scratch_dir();
        const std::string config_a =
            simulate_config(dir_a, 5, 0.4, 0.05, 20, 80, 99, {"bonf", "prod", "balance"});
        const std::string config_b =
            simulate_config(dir_b, 5, 0.4, 0.05, 20, 80, 99, {"bonf", "prod", "balance"});
        CHECK(run_cli("simulate --config " + config_a, dir_a).exit_code == 0);
        CHECK(run_cli("simulate --config " + config_b, dir_b).exit_code == 0);
        CHECK(slurp(dir_a / "stopping_times.csv") == slurp(dir_b / "stopping_times.csv"));
        CHECK(slurp(dir_a / "trajectories.csv") == slurp(dir_b / "trajectories.csv"));
    }

    TEST_CASE("thread count does not change the outputs") {
        const fs::path dir_a = scratch_dir();
        const fs::path dir_b = scratch_dir();
        const std::string config_a =
            simulate_config(dir_a, 4, 0.5, 0.05, 16, 60, 3, {"prod", "ftrl"});
        const std::string config_b =
            simulate_config(dir_b, 4, 0.5, 0.05, 16, 60, 3, {"prod", "ftrl"});
        CHECK(run_cli("simulate --config " + config_a + " --threads 1", dir_a).exit_code ==
              0);
        CHECK(run_cli("simulate --config " + config_b + " --threads 4", dir_b).exit_code ==
              0);
        CHECK(slurp(dir_a / "stopping_times.csv") == slurp(dir_b / "stopping_times.csv"));
        CHECK(slurp(dir_a / "trajectories.csv") == slurp(dir_b / "trajectories.csv"));
    }

    TEST_CASE("command-line flags override the config file") {
        const fs::path dir = scratch_dir();
        const std::string config = simulate_config(dir, 2, 0.0, 0.01, 1, 1, 7, {"prod"});
        const CliResult res =
            run_cli("simulate --config " + config + " --runs 3 --horizon 2", dir);
        CHECK(res.exit_code == 0);
        const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
        CHECK(summary["runs"].get<int>() == 3);
        CHECK(summary["config"]["horizon"].get<int>() == 2);
    }

    TEST_CASE("unknown config keys are rejected with exit 2") {
        const fs::path dir = scratch_dir();
        const fs::path path = dir / "config.json";
        spit(path, R"({"alpha": 0.05, "horizont": 100})");
        const CliResult res = run_cli("simulate --config " + path.string(), dir);
        CHECK(res.exit_code == 2);
        CHECK(res.err.find("horizont") != std::string::npos);
    }

    TEST_CASE("infeasible stream moments exit 2") {
        const fs::path dir = scratch_dir();
        const std::string config = simulate_config(dir, 2, 0.5, 0.01, 1, 1, 7, {"prod"});
        const CliResult res = run_cli("simulate --config " + config + " --mean 0.9", dir);
        CHECK(res.exit_code == 2);
    }

    TEST_CASE("simulate can replay a recorded file") {
        const fs::path dir = scratch_dir();
        std::string rows;
        for (int i = 0; i < 300; ++i) rows += "0.9\n";
        spit(dir / "recorded.csv", rows);
        nlohmann::json config = {
            {"stream", {{"type", "replay"}, {"path", (dir / "recorded.csv").string()}}},
            {"tests", {"prod"}},
            {"alpha", 0.01},
            {"runs", 1},
            {"horizon", 300},
            {"output",
             {{"stopping_csv", (dir / "stopping_times.csv").string()},
              {"trajectories_csv", (dir / "trajectories.csv").string()},
              {"summary_json", (dir / "summary.json").string()}}}};
        spit(dir / "config.json", config.dump());
        const CliResult res =
            run_cli("simulate --config " + (dir / "config.json").string(), dir);
        CHECK(res.exit_code == 0);
        const std::string stopping = slurp(dir / "stopping_times.csv");
        // a persistent 0.9 drift must reject well before 300 rows
        CHECK(stopping.find("prod,0,") != std::string::npos);
        CHECK(stopping.find(",0\n") != std::string::npos);  // uncensored
    }
}

TEST_SUITE("cli replay") {
    TEST_CASE("zeros never alert; one JSON line per test per row") {
        const fs::path dir = scratch_dir();
        std::string rows;
        for (int i = 0; i < 10; ++i) rows += "0,0\n";
        spit(dir / "zeros.csv", rows);
        const CliResult res =
            run_cli("replay " + (dir / "zeros.csv").string() + " --alpha 0.01", dir);
        CHECK(res.exit_code == 0);
        // default test set at k=2 has 7 methods
        CHECK(count_lines(res.out) == 70);
        CHECK(res.out.find("alert") == std::string::npos);
        CHECK(res.out.find("\"rejected\":true") == std::string::npos);
    }

    TEST_CASE("deterministic ones trip prod and stop with exit 3") {
        const fs::path dir = scratch_dir();
        std::string rows;
        for (int i = 0; i < 500; ++i) rows += "1.0\n";
        spit(dir / "ones.csv", rows);
        const CliResult res = run_cli("replay " + (dir / "ones.csv").string() +
                                          " --alpha 0.01 --tests prod --stop-on-reject",
                                      dir);
        CHECK(res.exit_code == 3);
        CHECK(res.out.find("\"alert\":\"reject\"") != std::string::npos);
        CHECK(count_lines(res.out) < 501);
    }

    TEST_CASE("malformed row names the row and exits 2") {
        const fs::path dir = scratch_dir();
        std::string rows;
        for (int i = 0; i < 6; ++i) rows += "0.1,0.1\n";
        rows += "0.1,banana\n";
        spit(dir / "bad.csv", rows);
        const CliResult res =
            run_cli("replay " + (dir / "bad.csv").string() + " --tests prod", dir);
        CHECK(res.exit_code == 2);
        CHECK(res.err.find("row 7") != std::string::npos);
    }

    TEST_CASE("linear flag emits clipped wealth") {
        const fs::path dir = scratch_dir();
        spit(dir / "one.csv", "0.0\n");
        const CliResult res = run_cli(
            "replay " + (dir / "one.csv").string() + " --tests prod --linear", dir);
        CHECK(res.exit_code == 0);
        CHECK(res.out.find("\"wealth\":1.0") != std::string::npos);
    }

    TEST_CASE("stdin locator streams rows") {
        const fs::path dir = scratch_dir();
        spit(dir / "stdin.csv", "0.5\n-0.5\n");
        const fs::path out = dir / "stdout.txt";
        const std::string cmd = kCli + " replay - --tests prod < " +
                                (dir / "stdin.csv").string() + " > " + out.string() +
                                " 2> /dev/null";
        const int raw = std::system(cmd.c_str());
        CHECK(WEXITSTATUS(raw) == 0);
        CHECK(count_lines(slurp(out)) == 2);
    }
}

TEST_SUITE("cli check") {
    TEST_CASE("unknown suite exits 2") {
        const fs::path dir = scratch_dir();
        const CliResult res = run_cli("check nonsense", dir);
        CHECK(res.exit_code == 2);
    }

    TEST_CASE("ftrl-oracle suite passes") {
        const fs::path dir = scratch_dir();
        const CliResult res = run_cli("check ftrl-oracle", dir);
        CHECK(res.exit_code == 0);
        CHECK(res.out.find("PASS") != std::string::npos);
        CHECK(res.out.find("FAIL") == std::string::npos);
    }
}
