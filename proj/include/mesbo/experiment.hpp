#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bo_loop.hpp"
#include "objectives.hpp"

namespace mesbo {

// ---- regret ----

/// r_t = known_max - running max of f. Non-increasing by construction.
inline std::vector<double> simple_regret(const std::vector<double>& f_values, double known_max) {
    std::vector<double> r;
    r.reserve(f_values.size());
    double best = -std::numeric_limits<double>::infinity();
    for (double f : f_values) {
        best = std::max(best, f);
        r.push_back(known_max - best);
    }
    return r;
}

/// One entry per iteration record; the running max includes the initial design.
inline std::vector<double> simple_regret(const BoTrace& trace, const Objective& obj) {
    if (!obj.known_max) throw UnsupportedMetric("simple_regret: objective '" + obj.name + "' has no known maximum");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& ev : trace.initial) best = std::max(best, ev.f);
    std::vector<double> r;
    r.reserve(trace.records.size());
    for (const auto& rec : trace.records) {
        best = std::max(best, rec.f);
        r.push_back(*obj.known_max - best);
    }
    return r;
}

/// R = known_max - f(argmax of the posterior mean), with the argmax found by optimize_acquisition.
inline double inference_regret(const GpPosterior& post, const Objective& obj, std::size_t budget, Rng& rng,
                               VectorXd* x_out = nullptr) {
    if (!obj.known_max) throw UnsupportedMetric("inference_regret: objective '" + obj.name + "' has no known maximum");
    const auto res = maximize_posterior_mean(post, obj.domain, budget, rng);
    if (x_out) *x_out = res.x;
    return *obj.known_max - obj(res.x);
}

/// Per-iteration R_t from the recommendations stored in the trace (NaN when absent).
inline std::vector<double> inference_regret(const BoTrace& trace, const Objective& obj) {
    if (!obj.known_max) throw UnsupportedMetric("inference_regret: objective '" + obj.name + "' has no known maximum");
    std::vector<double> out;
    for (const auto& rec : trace.records)
        out.push_back(rec.recommendation_f ? *obj.known_max - *rec.recommendation_f
                                           : std::numeric_limits<double>::quiet_NaN());
    return out;
}

// ---- experiment description ----

enum class ObjectiveType { quadratic, eggholder, shekel, michalewicz, synthetic_gp, synthetic_additive, nonfinite };

struct ObjectiveSpec {
    ObjectiveType type = ObjectiveType::quadratic;
    std::size_t dim = 1;
    std::size_t count = 1;              ///< independent instances (synthetic types)
    double scale = 5.0;                 ///< synthetic kernel scale
    double bandwidth = 0.0625;          ///< synthetic kernel bandwidth
    std::size_t features = 1000;        ///< synthetic D (per group when additive)
    std::optional<VectorXd> centre;     ///< quadratic
    std::size_t nonfinite_after = 3;    ///< nonfinite
    std::optional<std::uint64_t> instance_seed;
};

struct MethodSpec {
    std::string name;
    AcquisitionSpec acquisition;
    std::optional<std::size_t> num_features;
    bool use_true_partition = false;                 ///< additive: use the objective's partition
    std::optional<Partition> partition;
    std::optional<DecompositionLearning> learn;
};

struct ExperimentSpec {
    std::string name = "experiment";
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::size_t repetitions = 1;
    std::vector<ObjectiveSpec> objectives;
    std::vector<MethodSpec> methods;
    BoConfig bo;                          ///< shared settings; kernel filled per objective when unset
    bool kernel_given = false;
    bool write_traces = true;
    std::size_t certify_probes = 100000;  ///< random probes checked against every known maximum
};

struct ObjectiveInstance {
    Objective objective;
    std::string family;
    std::optional<KernelParams> true_kernel;
};

inline std::string objective_type_name(ObjectiveType t) {
    switch (t) {
        case ObjectiveType::quadratic: return "quadratic";
        case ObjectiveType::eggholder: return "eggholder";
        case ObjectiveType::shekel: return "shekel";
        case ObjectiveType::michalewicz: return "michalewicz";
        case ObjectiveType::synthetic_gp: return "synthetic_gp";
        case ObjectiveType::synthetic_additive: return "synthetic_additive";
        case ObjectiveType::nonfinite: return "nonfinite";
    }
    return "unknown";
}

/// Instantiate every objective; known maxima are certified against fresh probes.
inline std::vector<ObjectiveInstance> make_objectives(const ExperimentSpec& spec) {
    std::vector<ObjectiveInstance> out;
    for (std::size_t oi = 0; oi < spec.objectives.size(); ++oi) {
        const auto& os = spec.objectives[oi];
        for (std::size_t c = 0; c < os.count; ++c) {
            ObjectiveInstance inst;
            const std::uint64_t iseed = os.instance_seed ? *os.instance_seed + c : derive_seed(spec.seed, 77, oi, c);
            switch (os.type) {
                case ObjectiveType::quadratic: {
                    const VectorXd centre = os.centre.value_or(VectorXd::Constant(static_cast<Index>(os.dim), 0.3));
                    inst.objective = quadratic_objective(centre, Domain::unit(os.dim));
                    break;
                }
                case ObjectiveType::eggholder: inst.objective = eggholder_objective(); break;
                case ObjectiveType::shekel: inst.objective = shekel_objective(os.dim); break;
                case ObjectiveType::michalewicz: inst.objective = michalewicz_objective(os.dim); break;
                case ObjectiveType::synthetic_gp: {
                    const auto kp = KernelParams::isotropic(os.dim, os.scale, os.bandwidth, 0.0);
                    inst.objective = sample_synthetic_gp_objective(kp, os.dim, os.features, iseed);
                    inst.true_kernel = kp;
                    break;
                }
                case ObjectiveType::synthetic_additive: {
                    inst.objective = sample_synthetic_additive_objective(os.dim, os.scale, os.bandwidth, os.features, iseed);
                    inst.true_kernel = KernelParams::isotropic(os.dim, os.scale, os.bandwidth, 0.0);
                    break;
                }
                case ObjectiveType::nonfinite: inst.objective = nonfinite_objective(os.dim, os.nonfinite_after); break;
            }
            inst.family = inst.objective.name;
            if (os.count > 1 || os.type == ObjectiveType::synthetic_gp || os.type == ObjectiveType::synthetic_additive)
                inst.family = objective_type_name(os.type) + std::to_string(inst.objective.dim()) + "d";
            if (spec.certify_probes > 0 && os.type != ObjectiveType::nonfinite) {
                Rng crng(derive_seed(iseed, 99));
                certify_known_max(inst.objective, spec.certify_probes, crng);
            }
            out.push_back(std::move(inst));
        }
    }
    return out;
}

/// Loop settings for one (method, objective, seed) cell.
inline BoConfig config_for(const ExperimentSpec& spec, const MethodSpec& method, const ObjectiveInstance& inst,
                           std::uint64_t seed) {
    BoConfig cfg = spec.bo;
    cfg.acquisition = method.acquisition;
    cfg.seed = seed;
    if (method.num_features) cfg.num_features = *method.num_features;
    const std::size_t d = inst.objective.dim();
    if (!spec.kernel_given) {
        if (inst.true_kernel) {
            cfg.kernel = *inst.true_kernel;
        } else {
            cfg.kernel = KernelParams(1.0, (0.1 * inst.objective.domain.width().array()).matrix(), 0.0);
        }
        cfg.kernel.noise_var = std::max(cfg.noise_std * cfg.noise_std, 1e-6 * cfg.kernel.scale);
    } else if (cfg.kernel.dim() == 1 && d > 1) {
        cfg.kernel.bandwidths = VectorXd::Constant(static_cast<Index>(d), cfg.kernel.bandwidths[0]);
    }
    for (auto& eta : cfg.acquisition.hyper_set)
        if (eta.dim() == 1 && d > 1) eta.bandwidths = VectorXd::Constant(static_cast<Index>(d), eta.bandwidths[0]);
    if (is_additive(method.acquisition.kind)) {
        cfg.partition.reset();
        cfg.learn.reset();
        if (method.partition) {
            cfg.partition = method.partition;
        } else if (method.use_true_partition && inst.objective.true_partition) {
            cfg.partition = inst.objective.true_partition;
        } else if (method.learn) {
            cfg.learn = method.learn;
            if (method.learn->samples == 0) cfg.initial_design = std::max<std::size_t>(cfg.initial_design, 2);
        } else {
            cfg.partition = Partition::single(d);
        }
    }
    return cfg;
}

// ---- results ----

struct RunResult {
    std::string method;
    std::string objective;
    std::string family;
    std::uint64_t seed = 0;
    std::size_t repetition = 0;
    std::size_t k = 0;
    std::string sampler;
    BoTrace trace;
    std::vector<double> simple;
    std::vector<double> inference;
    bool failed = false;
    std::string error;
    std::optional<Partition> true_partition;
};

struct ExperimentResult {
    std::vector<RunResult> runs;
    std::size_t failed() const {
        return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunResult& r) { return r.failed; }));
    }
};

inline std::uint64_t run_seed(std::uint64_t base, std::size_t objective_index, std::size_t repetition) {
    return derive_seed(base, 1 + objective_index, 1 + repetition);
}

inline RunResult run_single(const ExperimentSpec& spec, const MethodSpec& method, const ObjectiveInstance& inst,
                            std::uint64_t seed, std::size_t repetition) {
    RunResult res;
    res.method = method.name;
    res.objective = inst.objective.name;
    res.family = inst.family;
    res.seed = seed;
    res.repetition = repetition;
    res.k = method.acquisition.samples;
    res.sampler = to_string(method.acquisition.sampler);
    res.true_partition = inst.objective.true_partition;
    try {
        const BoConfig cfg = config_for(spec, method, inst, seed);
        res.trace = run_bo(inst.objective.evaluate, inst.objective.domain, cfg);
        res.trace.method = method.name;
        if (res.trace.error) {
            res.failed = true;
            res.error = *res.trace.error;
        }
        if (inst.objective.known_max) {
            res.simple = simple_regret(res.trace, inst.objective);
            res.inference = inference_regret(res.trace, inst.objective);
        }
    } catch (const std::exception& e) {
        res.failed = true;
        res.error = e.what();
    }
    return res;
}

/// Run `jobs` callables on up to `workers` threads.
inline void parallel_for(std::size_t jobs, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, jobs));
    if (workers == 1) {
        for (std::size_t i = 0; i < jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < jobs; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

inline std::size_t default_parallelism() { return std::max(1u, std::thread::hardware_concurrency()); }

/// The full (method x objective x repetition) grid. Runs are independent and
/// seeded from (spec.seed, objective index, repetition), so methods see paired
/// initial designs and output does not depend on `parallel`.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, std::size_t parallel = default_parallelism(),
                                       const std::vector<ObjectiveInstance>* prepared = nullptr) {
    if (spec.methods.empty()) throw ArgumentError("run_experiment: no methods");
    if (spec.objectives.empty() && !prepared) throw ArgumentError("run_experiment: no objectives");
    if (spec.repetitions == 0) throw ArgumentError("run_experiment: repetitions must be >= 1");
    std::vector<ObjectiveInstance> owned;
    if (!prepared) owned = make_objectives(spec);
    const auto& objs = prepared ? *prepared : owned;

    struct Cell {
        std::size_t method, objective, rep;
    };
    std::vector<Cell> cells;
    for (std::size_t m = 0; m < spec.methods.size(); ++m)
        for (std::size_t o = 0; o < objs.size(); ++o)
            for (std::size_t r = 0; r < spec.repetitions; ++r) cells.push_back({m, o, r});

    ExperimentResult out;
    out.runs.resize(cells.size());
    parallel_for(cells.size(), parallel, [&](std::size_t i) {
        const auto& c = cells[i];
        out.runs[i] = run_single(spec, spec.methods[c.method], objs[c.objective], run_seed(spec.seed, c.objective, c.rep), c.rep);
    });
    return out;
}

// ---- output ----

inline std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_seconds(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline constexpr const char* kRegretHeader = "method,objective,seed,t,r_t,R_t,acq_seconds,K,sampler";

inline void write_regret_csv(std::ostream& os, const std::vector<RunResult>& runs) {
    os << kRegretHeader << '\n';
    for (const auto& r : runs) {
        for (std::size_t i = 0; i < r.trace.records.size(); ++i) {
            const auto& rec = r.trace.records[i];
            os << r.method << ',' << r.objective << ',' << r.seed << ',' << rec.t << ','
               << (i < r.simple.size() ? format_double(r.simple[i]) : "") << ','
               << (i < r.inference.size() ? format_double(r.inference[i]) : "") << ',' << format_seconds(rec.acq_seconds)
               << ',' << r.k << ',' << r.sampler << '\n';
        }
    }
}

/// Type-7 (linear interpolation) quantile of unsorted values.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct SummaryRow {
    std::string method;
    std::string family;
    std::size_t runs = 0;
    std::size_t failed = 0;
    std::size_t final_t = 0;
    double r_median = 0, r_q25 = 0, r_q75 = 0;
    double R_median = 0, R_q25 = 0, R_q75 = 0;
    double acq_mean = 0, acq_sd = 0;
};

/// Per (method, objective family): final-iteration regret quartiles over
/// successful runs, and mean/sd of per-iteration acquisition seconds.
inline std::vector<SummaryRow> summarize(const std::vector<RunResult>& runs) {
    std::vector<std::pair<std::string, std::string>> keys;
    std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
    for (const auto& r : runs) {
        auto key = std::make_pair(r.method, r.family);
        if (!groups.count(key)) keys.push_back(key);
        groups[key].push_back(&r);
    }
    std::vector<SummaryRow> out;
    for (const auto& key : keys) {
        SummaryRow row;
        row.method = key.first;
        row.family = key.second;
        std::vector<double> rs, Rs, secs;
        for (const RunResult* r : groups[key]) {
            ++row.runs;
            if (r->failed) {
                ++row.failed;
                continue;
            }
            if (!r->simple.empty()) rs.push_back(r->simple.back());
            if (!r->inference.empty() && !std::isnan(r->inference.back())) Rs.push_back(r->inference.back());
            row.final_t = std::max(row.final_t, r->trace.records.size());
            for (const auto& rec : r->trace.records) secs.push_back(rec.acq_seconds);
        }
        row.r_median = quantile(rs, 0.5);
        row.r_q25 = quantile(rs, 0.25);
        row.r_q75 = quantile(rs, 0.75);
        row.R_median = quantile(Rs, 0.5);
        row.R_q25 = quantile(Rs, 0.25);
        row.R_q75 = quantile(Rs, 0.75);
        if (!secs.empty()) {
            double s = 0, s2 = 0;
            for (double v : secs) s += v;
            row.acq_mean = s / static_cast<double>(secs.size());
            for (double v : secs) s2 += (v - row.acq_mean) * (v - row.acq_mean);
            row.acq_sd = secs.size() > 1 ? std::sqrt(s2 / static_cast<double>(secs.size() - 1)) : 0.0;
        }
        out.push_back(row);
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << "method,objective,runs,failed,t,r_median,r_q25,r_q75,R_median,R_q25,R_q75,acq_seconds_mean,acq_seconds_sd\n";
    for (const auto& s : rows)
        os << s.method << ',' << s.family << ',' << s.runs << ',' << s.failed << ',' << s.final_t << ','
           << format_double(s.r_median) << ',' << format_double(s.r_q25) << ',' << format_double(s.r_q75) << ','
           << format_double(s.R_median) << ',' << format_double(s.R_q25) << ',' << format_double(s.R_q75) << ','
           << format_seconds(s.acq_mean) << ',' << format_seconds(s.acq_sd) << '\n';
}

inline std::string trace_file_name(const RunResult& r) {
    return "trace_" + r.method + "_" + r.objective + "_" + std::to_string(r.seed) + ".jsonl";
}

}  // namespace mesbo
