// mesbo command-line driver: run, bench, validate, trace-dump.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mesbo/mesbo.hpp"

namespace fs = std::filesystem;
using namespace mesbo;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeAbort = 3;

// --seed wins, then the config file, then MAXENT_BO_SEED.
void apply_seed(ExperimentSpec& spec, const std::optional<std::uint64_t>& cli_seed) {
    if (cli_seed) {
        spec.seed = *cli_seed;
        return;
    }
    if (spec.seed_given) return;
    if (const char* env = std::getenv("MAXENT_BO_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError(std::string("MAXENT_BO_SEED: not an unsigned integer: ") + env);
        spec.seed = v;
    }
}

void prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ConfigError(dir + ": cannot create output directory");
}

void write_outputs(const std::string& dir, const ExperimentSpec& spec, const std::vector<RunResult>& runs) {
    if (spec.write_traces) {
        for (const auto& r : runs) {
            std::ofstream os(fs::path(dir) / trace_file_name(r));
            json header{{"objective", r.objective}, {"seed", r.seed}, {"repetition", r.repetition},
                        {"K", r.k},                 {"sampler", r.sampler}};
            if (r.true_partition) header["true_partition"] = to_json(*r.true_partition);
            write_trace(os, r.trace, header);
        }
    }
    std::ofstream regret(fs::path(dir) / "regret.csv");
    write_regret_csv(regret, runs);
    std::ofstream summary(fs::path(dir) / "summary.csv");
    write_summary_csv(summary, summarize(runs));
    std::ofstream failures(fs::path(dir) / "failures.csv");
    failures << "method,objective,seed,error\n";
    for (const auto& r : runs)
        if (r.failed) {
            std::string msg = r.error;
            for (char& c : msg)
                if (c == ',' || c == '\n') c = ';';
            failures << r.method << ',' << r.objective << ',' << r.seed << ',' << msg << '\n';
        }
}

int cmd_run(const std::string& config, const std::string& out, const std::optional<std::uint64_t>& seed, int verbose) {
    ExperimentSpec spec = load_experiment(config);
    apply_seed(spec, seed);
    prepare_dir(out);
    if (spec.objectives.size() > 1 || spec.methods.size() > 1 || spec.objectives[0].count > 1)
        std::cerr << "run: using the first method and objective instance only\n";
    spec.objectives.resize(1);
    spec.objectives[0].count = 1;
    spec.methods.resize(1);
    const auto objs = make_objectives(spec);
    RunResult r = run_single(spec, spec.methods[0], objs[0], run_seed(spec.seed, 0, 0), 0);
    write_outputs(out, spec, {r});
    if (verbose && !r.simple.empty()) std::cerr << "final simple regret " << r.simple.back() << "\n";
    if (r.failed) {
        std::cerr << "run aborted: " << r.error << "\n";
        return kRuntimeAbort;
    }
    return kOk;
}

int cmd_bench(const std::string& config, const std::string& out, const std::optional<std::uint64_t>& seed,
              std::size_t parallel, bool strict, int verbose) {
    ExperimentSpec spec = load_experiment(config);
    apply_seed(spec, seed);
    prepare_dir(out);
    const auto result = run_experiment(spec, parallel ? parallel : default_parallelism());
    write_outputs(out, spec, result.runs);
    const std::size_t failed = result.failed();
    if (verbose || failed) std::cerr << result.runs.size() << " runs, " << failed << " failed\n";
    return strict && failed ? kRuntimeAbort : kOk;
}

int cmd_validate(const std::string& config) {
    load_experiment(config);
    std::cout << "ok\n";
    return kOk;
}

std::string fmt_vec(const VectorXd& v) {
    std::string s = "[";
    for (Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
    return s + "]";
}

int cmd_trace_dump(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError(file + ": cannot open trace file");
    TraceFile tf;
    try {
        tf = read_trace(in);
    } catch (const ConfigError& e) {
        throw ConfigError(file + ": " + e.what());
    }
    std::cout << "# " << tf.header.dump() << "\n";
    for (const auto& ev : tf.trace.initial)
        std::cout << "init x=" << fmt_vec(ev.x) << " y=" << format_double(ev.y) << " f=" << format_double(ev.f) << "\n";
    for (const auto& rec : tf.trace.records) {
        std::cout << "t=" << rec.t << " x=" << fmt_vec(rec.x) << " y=" << format_double(rec.y)
                  << " f=" << format_double(rec.f) << " best_f=" << format_double(rec.best_f)
                  << " acq=" << format_double(rec.acq_value) << " acq_s=" << format_seconds(rec.acq_seconds);
        if (rec.recommendation_f) std::cout << " rec_f=" << format_double(*rec.recommendation_f);
        std::cout << "\n";
    }
    if (tf.trace.error) std::cout << "error: " << *tf.trace.error << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Max-value entropy search Bayesian optimization"};
    app.require_subcommand(1);
    app.fallthrough();
    int verbose = 0;
    app.add_flag("-v,--verbose", verbose, "More diagnostics on stderr");

    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::size_t parallel = 0;
    bool strict = false;
    std::string trace_file;

    auto* run = app.add_subcommand("run", "Run one optimization");
    run->add_option("-c,--config", config, "Config file")->required();
    run->add_option("-o,--out", out, "Output directory")->required();
    run->add_option("--seed", seed, "Seed override");

    auto* bench = app.add_subcommand("bench", "Run an experiment grid");
    bench->add_option("-c,--config", config, "Config file")->required();
    bench->add_option("-o,--out", out, "Output directory")->required();
    bench->add_option("--seed", seed, "Seed override");
    bench->add_option("--parallel", parallel, "Concurrent runs (default: logical cores)")->check(CLI::PositiveNumber);
    bench->add_flag("--strict", strict, "Exit non-zero if any run fails");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("-c,--config", config, "Config file")->required();

    auto* dump = app.add_subcommand("trace-dump", "Pretty-print a trace file");
    dump->add_option("file", trace_file, "Trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(config, out, seed, verbose);
        if (*bench) return cmd_bench(config, out, seed, parallel, strict, verbose);
        if (*validate) return cmd_validate(config);
        if (*dump) return cmd_trace_dump(trace_file);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ArgumentError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeAbort;
    }
    return kConfigError;
}
