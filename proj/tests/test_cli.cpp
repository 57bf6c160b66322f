// End-to-end checks of the command-line interface via subprocess calls.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string cli_path() { return DIFFSPEC_CLI_PATH; }

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "diffspec_cli_test";
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::size_t count_lines(const fs::path& file) {
    std::ifstream in(file);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

std::string read_all(const fs::path& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("simulate writes observations and is seed-deterministic") {
    const auto dir = work_dir();
    const auto obs1 = dir / "obs1.csv";
    const auto obs2 = dir / "obs2.csv";
    CHECK(run("simulate --preset reflected-bm --scheme deterministic -n 2000 --seed 9 -o " +
              obs1.string()) == 0);
    CHECK(run("simulate --preset reflected-bm --scheme deterministic -n 2000 --seed 9 -o " +
              obs2.string()) == 0);
    CHECK(count_lines(obs1) == 2002);  // header + N + 1 rows
    CHECK(read_all(obs1) == read_all(obs2));
}

TEST_CASE("estimate writes an 801-row curve on the default interval") {
    const auto dir = work_dir();
    const auto obs = dir / "obs_est.csv";
    const auto curve = dir / "curve.csv";
    REQUIRE(run("simulate --preset reflected-bm --scheme exponential -n 2000 --seed 4 -o " +
                obs.string()) == 0);
    CHECK(run("estimate --input " + obs.string() + " --dim 5 --out " + curve.string()) == 0);
    // comment header + column header + 801 data rows
    CHECK(count_lines(curve) == 803);
    const std::string content = read_all(curve);
    CHECK(content.find("x,value") != std::string::npos);
    CHECK(content.find("kind=volatility level=4 dim=5") != std::string::npos);
}

TEST_CASE("adapt runs the Lepski selector") {
    const auto dir = work_dir();
    const auto obs = dir / "obs_adapt.csv";
    const auto curve = dir / "adapt_curve.csv";
    const auto report = dir / "adapt_report.txt";
    REQUIRE(run("simulate --preset paper-sec6 --scheme uniform -n 3000 --seed 6 -o " +
                obs.string()) == 0);
    CHECK(run("adapt --input " + obs.string() + " --dims 2:6 --out " + curve.string() +
              " --report " + report.string()) == 0);
    CHECK(count_lines(curve) == 803);
    CHECK(read_all(report).find("chosen_dim=") != std::string::npos);
}

TEST_CASE("benchmark smoke run writes the report CSV") {
    const auto dir = work_dir();
    const auto report = dir / "report.csv";
    CHECK(run("benchmark --preset paper-sec6 --schemes deterministic --sizes 500 "
              "--iters 2 --dims 2:3 --seed 7 -o " +
              report.string()) == 0);
    const std::string content = read_all(report);
    CHECK(content.rfind("scheme,N,estimator,dim,rmise,mc_se,failures\n", 0) == 0);
    CHECK(content.find("deterministic,500,oracle,") != std::string::npos);
}

TEST_CASE("simulate can dump the raw path in binary form") {
    const auto dir = work_dir();
    const auto obs = dir / "obs_bin.csv";
    const auto bin = dir / "path.bin";
    CHECK(run("simulate --preset reflected-bm -n 100 --seed 2 -o " + obs.string() +
              " --path-out " + bin.string()) == 0);
    REQUIRE(fs::exists(bin));
    // 8-byte count + (100 * 0.25 / 0.001 + 1) little-endian doubles
    CHECK(fs::file_size(bin) == 8 + 25001 * 8);
}

TEST_CASE("estimate also writes the drift curve and matrix dumps") {
    const auto dir = work_dir();
    const auto obs = dir / "obs_drift.csv";
    const auto vol = dir / "vol.csv";
    const auto drift = dir / "drift.csv";
    REQUIRE(run("simulate --preset paper-sec6 --scheme deterministic -n 3000 --seed 5 -o " +
                obs.string()) == 0);
    CHECK(run("estimate --input " + obs.string() + " --dim 4 --out " + vol.string() +
              " --drift-out " + drift.string() + " --dump-matrices " + (dir / "m").string()) ==
          0);
    CHECK(read_all(drift).find("kind=drift") != std::string::npos);
    CHECK(count_lines(dir / "m_gram.csv") == 4);
    CHECK(count_lines(dir / "m_transition.csv") == 4);
}

TEST_CASE("benchmark accepts a JSON config file") {
    const auto dir = work_dir();
    const auto cfg = dir / "experiment.json";
    const auto report = dir / "cfg_report.csv";
    {
        std::ofstream out(cfg);
        out << R"({
            "model": {"sigma_sq": [1.0], "drift": [0.0], "d": 1.0, "D": 1.0},
            "schemes": ["exponential"],
            "sample_sizes": [300],
            "mc_iterations": 2,
            "oracle_dims": [2, 3],
            "adaptive": false,
            "seed": 3
        })";
    }
    CHECK(run("benchmark --config " + cfg.string() + " -o " + report.string()) == 0);
    CHECK(read_all(report).find("exponential,300,oracle,") != std::string::npos);

    // malformed JSON is a configuration error
    const auto bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    CHECK(run("benchmark --config " + bad.string() + " -o " + report.string()) == 1);
}

TEST_CASE("gsep-check passes and unknown flags fail with usage") {
    CHECK(run("gsep-check --trials 200 --size 5 --seed 3") == 0);
    CHECK(run("gsep-check --trials 200 --seed 3") == 0);
    CHECK(run("--definitely-not-a-flag") == 1);
    CHECK(run("estimate --no-such-flag") == 1);
}
