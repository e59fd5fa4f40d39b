#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
};

Result run_cli(const std::string& args) {
    const fs::path log = fs::temp_directory_path() / ("mesbo_cli_" + std::to_string(::getpid()) + ".log");
    const std::string cmd = std::string(MESBO_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    fs::remove(log);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

class Cli : public ::testing::Test {
protected:
    fs::path dir;

    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("mesbo_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
               std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& text) {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }

    std::string minimal() {
        return write("min.json", R"({"seed": 4, "certify_probes": 0,
          "bo": {"T": 5, "acq_budget": 100, "grid_size": 100, "kernel": {"scale": 1, "bandwidth": 0.2, "noise_var": 1e-6}},
          "objective": {"type": "quadratic", "dim": 1, "centre": [0.3]},
          "method": {"acquisition": "mes"}})");
    }

    static std::size_t lines(const fs::path& p) {
        std::ifstream in(p);
        std::size_t n = 0;
        for (std::string l; std::getline(in, l);) ++n;
        return n;
    }

    static std::string first_x(const fs::path& trace) {
        std::ifstream in(trace);
        for (std::string l; std::getline(in, l);)
            if (l.find("\"type\":\"iter\"") != std::string::npos) return l.substr(l.find("\"x\""), 40);
        return "";
    }

    static fs::path only_trace(const fs::path& out) {
        for (const auto& e : fs::directory_iterator(out))
            if (e.path().filename().string().rfind("trace_", 0) == 0) return e.path();
        return {};
    }
};

}  // namespace

TEST_F(Cli, MissingConfigIsConfigError) {
    EXPECT_EQ(run_cli("run -c " + (dir / "nope.json").string() + " -o " + (dir / "out").string()).code, 2);
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST_F(Cli, MinimalRunWritesRegretRows) {
    const auto r = run_cli("run -v -c " + minimal() + " -o " + (dir / "out").string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(dir / "out" / "regret.csv"), 1u + 5u);
    EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));
    EXPECT_FALSE(only_trace(dir / "out").empty());
}

TEST_F(Cli, SeedOverrideChangesFirstPoint) {
    const auto cfg = minimal();
    ASSERT_EQ(run_cli("run -c " + cfg + " -o " + (dir / "a").string()).code, 0);
    ASSERT_EQ(run_cli("run -c " + cfg + " -o " + (dir / "b").string() + " --seed 99").code, 0);
    ASSERT_EQ(run_cli("run -c " + cfg + " -o " + (dir / "c").string()).code, 0);
    const auto xa = first_x(only_trace(dir / "a")), xb = first_x(only_trace(dir / "b")),
               xc = first_x(only_trace(dir / "c"));
    EXPECT_NE(xa, xb);
    EXPECT_EQ(xa, xc);
}

TEST_F(Cli, ValidateReportsOkOrField) {
    const auto ok = run_cli("validate -c " + minimal());
    EXPECT_EQ(ok.code, 0);
    EXPECT_NE(ok.out.find("ok"), std::string::npos);
    const auto bad = write("bad.json", R"({"bo": {"kernel": {"bandwidth": -0.5}},
        "objective": {"type": "quadratic"}, "method": {}})");
    const auto r = run_cli("validate -c " + bad);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("bo.kernel.bandwidth"), std::string::npos) << r.out;
}

TEST_F(Cli, BenchWritesTraceFilesAndStrictFails) {
    const auto cfg = write("bench.json", R"({"seed": 2, "certify_probes": 0,
      "bo": {"T": 2, "acq_budget": 50, "grid_size": 50, "kernel": {"scale": 1, "bandwidth": 0.2, "noise_var": 1e-6}},
      "objective": {"type": "quadratic", "dim": 1},
      "methods": [{"acquisition": "mes"}, {"acquisition": "ei"}]})");
    ASSERT_EQ(run_cli("bench -c " + cfg + " -o " + (dir / "out").string() + " --parallel 2").code, 0);
    std::size_t traces = 0;
    for (const auto& e : fs::directory_iterator(dir / "out")) traces += e.path().extension() == ".jsonl";
    EXPECT_EQ(traces, 2u);

    const auto nf = write("nf.json", R"({"certify_probes": 0,
      "bo": {"T": 5, "acq_budget": 50, "grid_size": 50, "track_recommendation": false},
      "objective": {"type": "nonfinite", "dim": 1, "after": 2}, "method": {"acquisition": "mes"}})");
    EXPECT_EQ(run_cli("bench -c " + nf + " -o " + (dir / "nf").string()).code, 0);
    EXPECT_NE(run_cli("bench --strict -c " + nf + " -o " + (dir / "nf2").string()).code, 0);
    EXPECT_EQ(run_cli("run -c " + nf + " -o " + (dir / "nf3").string()).code, 3);
    EXPECT_EQ(lines(dir / "nf" / "failures.csv"), 2u);
}

TEST_F(Cli, TraceDumpRoundTrip) {
    ASSERT_EQ(run_cli("run -c " + minimal() + " -o " + (dir / "out").string()).code, 0);
    const auto r = run_cli("trace-dump " + only_trace(dir / "out").string());
    ASSERT_EQ(r.code, 0);
    std::size_t iters = 0;
    for (std::size_t p = r.out.find("\nt="); p != std::string::npos; p = r.out.find("\nt=", p + 1)) ++iters;
    EXPECT_EQ(iters, 5u);
    const auto garbage = write("g.jsonl", "not json\n");
    EXPECT_EQ(run_cli("trace-dump " + garbage).code, 2);
}
