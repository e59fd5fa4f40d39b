#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "experiment.hpp"

namespace mesbo {

namespace detail {

using json = nlohmann::json;

// Typed field access with dotted-path error messages.
class Fields {
public:
    Fields(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!allowed.count(it.key())) throw ConfigError(at(it.key()) + ": unknown field");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& raw(const std::string& key) const { return j_.at(key); }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where() const { return path_.empty() ? "<root>" : path_; }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(at(key) + ": expected a number");
        return v.get<double>();
    }
    double positive(const std::string& key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(at(key) + ": must be > 0");
        return v;
    }
    double non_negative(const std::string& key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(at(key) + ": must be >= 0");
        return v;
    }
    std::uint64_t count(const std::string& key, std::uint64_t fallback, std::uint64_t min = 0) const {
        if (!has(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(at(key) + ": expected a non-negative integer");
        const auto n = v.get<std::uint64_t>();
        if (n < min) throw ConfigError(at(key) + ": must be >= " + std::to_string(min));
        return n;
    }
    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(at(key) + ": expected true/false");
        return j_.at(key).get<bool>();
    }
    std::string string(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_string()) throw ConfigError(at(key) + ": expected a string");
        return j_.at(key).get<std::string>();
    }
    VectorXd vector(const std::string& key) const {
        const json& v = j_.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError(at(key) + ": expected a non-empty array of numbers");
        VectorXd out(static_cast<Index>(v.size()));
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]: expected a number");
            out[static_cast<Index>(i)] = v[i].get<double>();
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

inline KernelParams parse_kernel(const json& j, const std::string& path) {
    Fields f(j, path, {"scale", "bandwidths", "bandwidth", "noise_var"});
    KernelParams p;
    p.scale = f.positive("scale", 1.0);
    if (f.has("bandwidths")) {
        p.bandwidths = f.vector("bandwidths");
        for (Index i = 0; i < p.bandwidths.size(); ++i)
            if (!(p.bandwidths[i] > 0.0))
                throw ConfigError(f.at("bandwidths") + "[" + std::to_string(i) + "]: must be > 0");
    } else {
        p.bandwidths = VectorXd::Constant(1, f.positive("bandwidth", 0.1));
    }
    p.noise_var = f.non_negative("noise_var", 0.0);
    return p;
}

inline Partition parse_partition(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected an array of index arrays");
    Partition p;
    for (std::size_t m = 0; m < j.size(); ++m) {
        const std::string gp = path + "[" + std::to_string(m) + "]";
        if (!j[m].is_array() || j[m].empty()) throw ConfigError(gp + ": expected a non-empty array of indices");
        std::vector<std::size_t> g;
        for (const auto& v : j[m]) {
            if (!v.is_number_unsigned()) throw ConfigError(gp + ": indices must be non-negative integers");
            g.push_back(v.get<std::size_t>());
        }
        p.groups.push_back(std::move(g));
    }
    return p;
}

inline AcquisitionKind parse_kind(const std::string& s, const std::string& path) {
    static const std::pair<const char*, AcquisitionKind> table[] = {
        {"mes", AcquisitionKind::mes},         {"add_mes", AcquisitionKind::add_mes},
        {"ucb", AcquisitionKind::ucb},         {"pi", AcquisitionKind::pi},
        {"ei", AcquisitionKind::ei},           {"est", AcquisitionKind::est},
        {"add_gp_ucb", AcquisitionKind::add_gp_ucb}, {"mes_marginal", AcquisitionKind::mes_marginal},
        {"random", AcquisitionKind::random}};
    for (const auto& [name, kind] : table)
        if (s == name) return kind;
    throw ConfigError(path + ": unknown acquisition '" + s + "'");
}

inline ObjectiveSpec parse_objective(const json& j, const std::string& path) {
    Fields f(j, path, {"type", "dim", "count", "scale", "bandwidth", "features", "centre", "after", "seed"});
    ObjectiveSpec o;
    const std::string type = f.string("type", "");
    static const std::pair<const char*, ObjectiveType> table[] = {
        {"quadratic", ObjectiveType::quadratic},       {"eggholder", ObjectiveType::eggholder},
        {"shekel", ObjectiveType::shekel},             {"michalewicz", ObjectiveType::michalewicz},
        {"synthetic_gp", ObjectiveType::synthetic_gp}, {"synthetic_additive", ObjectiveType::synthetic_additive},
        {"nonfinite", ObjectiveType::nonfinite}};
    bool found = false;
    for (const auto& [name, t] : table)
        if (type == name) o.type = t, found = true;
    if (!found) throw ConfigError(f.at("type") + ": unknown objective '" + type + "'");
    const std::size_t default_dim = o.type == ObjectiveType::eggholder ? 2
                                    : (o.type == ObjectiveType::shekel || o.type == ObjectiveType::michalewicz ||
                                       o.type == ObjectiveType::synthetic_additive)
                                        ? 10
                                    : o.type == ObjectiveType::synthetic_gp ? 2
                                                                            : 1;
    o.dim = f.count("dim", default_dim, 1);
    if (o.type == ObjectiveType::eggholder && o.dim != 2) throw ConfigError(f.at("dim") + ": eggholder is 2-dimensional");
    if (o.type == ObjectiveType::synthetic_additive && o.dim % 2 != 0) throw ConfigError(f.at("dim") + ": must be even");
    o.count = f.count("count", 1, 1);
    o.scale = f.positive("scale", 5.0);
    o.bandwidth = f.positive("bandwidth", o.type == ObjectiveType::synthetic_additive ? 0.1 : 0.0625);
    o.features = f.count("features", 1000, 1000);
    o.nonfinite_after = f.count("after", 3);
    if (f.has("seed")) o.instance_seed = f.count("seed", 0);
    if (f.has("centre")) {
        o.centre = f.vector("centre");
        if (static_cast<std::size_t>(o.centre->size()) != o.dim) throw ConfigError(f.at("centre") + ": length must equal dim");
    }
    return o;
}

inline MethodSpec parse_method(const json& j, const std::string& path) {
    Fields f(j, path, {"name", "acquisition", "K", "sampler", "beta", "pi_margin", "hyper_set", "D", "partition", "learn"});
    MethodSpec m;
    m.acquisition.kind = parse_kind(f.string("acquisition", "mes"), f.at("acquisition"));
    m.acquisition.samples = f.count("K", 1, 1);
    const std::string sampler = f.string("sampler", "gumbel");
    if (sampler == "gumbel") m.acquisition.sampler = SamplerKind::gumbel;
    else if (sampler == "feature") m.acquisition.sampler = SamplerKind::feature;
    else throw ConfigError(f.at("sampler") + ": expected 'gumbel' or 'feature'");
    if (f.has("beta")) m.acquisition.beta = f.non_negative("beta", 0.0);
    if (f.has("pi_margin")) m.acquisition.pi_margin = f.non_negative("pi_margin", 0.0);
    if (f.has("hyper_set")) {
        const json& hs = f.raw("hyper_set");
        if (!hs.is_array() || hs.empty()) throw ConfigError(f.at("hyper_set") + ": expected a non-empty array");
        for (std::size_t i = 0; i < hs.size(); ++i)
            m.acquisition.hyper_set.push_back(parse_kernel(hs[i], f.at("hyper_set") + "[" + std::to_string(i) + "]"));
    }
    if (m.acquisition.kind == AcquisitionKind::mes_marginal && m.acquisition.hyper_set.empty())
        throw ConfigError(f.at("hyper_set") + ": required for mes_marginal");
    if (f.has("D")) m.num_features = f.count("D", 500, 1);
    if (f.has("partition")) {
        const json& p = f.raw("partition");
        if (p.is_string()) {
            if (p.get<std::string>() != "true") throw ConfigError(f.at("partition") + ": expected \"true\" or index groups");
            m.use_true_partition = true;
        } else {
            m.partition = parse_partition(p, f.at("partition"));
        }
    }
    if (f.has("learn")) {
        Fields l(f.raw("learn"), f.at("learn"), {"n_candidates", "max_group_size", "samples"});
        m.learn = DecompositionLearning{l.count("n_candidates", 10000, 1), l.count("max_group_size", 2, 1),
                                        l.count("samples", 500)};
    }
    std::string def = to_string(m.acquisition.kind);
    if (m.acquisition.kind == AcquisitionKind::mes || m.acquisition.kind == AcquisitionKind::add_mes ||
        m.acquisition.kind == AcquisitionKind::mes_marginal)
        def += std::string("-") + to_string(m.acquisition.sampler) + std::to_string(m.acquisition.samples);
    m.name = f.string("name", def);
    if (m.name.empty() || m.name.find_first_of(",/\\\n\" ") != std::string::npos)
        throw ConfigError(f.at("name") + ": must be non-empty without commas, slashes, quotes or spaces");
    return m;
}

inline void parse_bo(const json& j, const std::string& path, ExperimentSpec& spec) {
    Fields f(j, path, {"T", "noise_std", "initial_design", "refit_every", "refit_budget", "D", "grid_size", "acq_budget",
                       "restarts", "clamp", "track_recommendation", "kernel"});
    BoConfig& c = spec.bo;
    c.iterations = f.count("T", 60, 1);
    c.noise_std = f.non_negative("noise_std", 0.0);
    c.initial_design = f.count("initial_design", 1);
    if (f.has("refit_every")) c.refit_every = f.count("refit_every", 10, 1);
    c.refit_budget = f.count("refit_budget", 300, 1);
    c.num_features = f.count("D", 500, 1);
    if (f.has("grid_size")) c.grid_size = f.count("grid_size", 0, 2);
    if (f.has("acq_budget")) c.acq_budget = f.count("acq_budget", 2000, 1);
    c.restarts = f.count("restarts", 10, 1);
    c.clamp = f.boolean("clamp", true);
    c.track_recommendation = f.boolean("track_recommendation", true);
    if (f.has("kernel")) {
        c.kernel = parse_kernel(f.raw("kernel"), f.at("kernel"));
        spec.kernel_given = true;
    }
}

}  // namespace detail

/// Parse and validate an experiment file. Every error names the offending field.
inline ExperimentSpec parse_experiment(const nlohmann::json& j) {
    using detail::Fields;
    Fields f(j, "", {"name", "seed", "repetitions", "certify_probes", "write_traces", "bo", "objectives", "objective",
                     "methods", "method"});
    ExperimentSpec spec;
    spec.name = f.string("name", "experiment");
    spec.seed = f.count("seed", 1);
    spec.seed_given = f.has("seed");
    spec.repetitions = f.count("repetitions", 1, 1);
    spec.certify_probes = f.count("certify_probes", 100000);
    spec.write_traces = f.boolean("write_traces", true);
    if (f.has("bo")) detail::parse_bo(f.raw("bo"), "bo", spec);

    auto list = [&](const char* plural, const char* single) {
        std::vector<std::pair<const nlohmann::json*, std::string>> out;
        if (f.has(plural)) {
            const auto& a = f.raw(plural);
            if (!a.is_array() || a.empty()) throw ConfigError(std::string(plural) + ": expected a non-empty array");
            for (std::size_t i = 0; i < a.size(); ++i) out.emplace_back(&a[i], std::string(plural) + "[" + std::to_string(i) + "]");
        }
        if (f.has(single)) out.emplace_back(&f.raw(single), single);
        if (out.empty()) throw ConfigError(std::string(plural) + ": at least one entry required");
        return out;
    };
    for (const auto& [js, p] : list("objectives", "objective")) spec.objectives.push_back(detail::parse_objective(*js, p));
    for (const auto& [js, p] : list("methods", "method")) spec.methods.push_back(detail::parse_method(*js, p));

    std::set<std::string> names;
    for (std::size_t i = 0; i < spec.methods.size(); ++i)
        if (!names.insert(spec.methods[i].name).second)
            throw ConfigError("methods[" + std::to_string(i) + "].name: duplicate method name '" + spec.methods[i].name + "'");

    // Cross-field checks against each objective's dimension.
    for (std::size_t oi = 0; oi < spec.objectives.size(); ++oi) {
        const std::size_t d = spec.objectives[oi].dim;
        if (spec.kernel_given && spec.bo.kernel.dim() != 1 && spec.bo.kernel.dim() != d)
            throw ConfigError("bo.kernel.bandwidths: length " + std::to_string(spec.bo.kernel.dim()) +
                              " does not match objectives[" + std::to_string(oi) + "].dim = " + std::to_string(d));
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            const auto& m = spec.methods[mi];
            const std::string mp = "methods[" + std::to_string(mi) + "]";
            if (m.partition) {
                try {
                    m.partition->validate(d);
                } catch (const ArgumentError& e) {
                    throw ConfigError(mp + ".partition: " + e.what());
                }
            }
            for (std::size_t h = 0; h < m.acquisition.hyper_set.size(); ++h)
                if (m.acquisition.hyper_set[h].dim() != 1 && m.acquisition.hyper_set[h].dim() != d)
                    throw ConfigError(mp + ".hyper_set[" + std::to_string(h) + "].bandwidths: dimension mismatch");
            if (m.use_true_partition && spec.objectives[oi].type != ObjectiveType::synthetic_additive)
                throw ConfigError(mp + ".partition: \"true\" needs a synthetic_additive objective");
            if (m.learn && spec.objectives[oi].type != ObjectiveType::synthetic_additive && !is_additive(m.acquisition.kind))
                throw ConfigError(mp + ".learn: only valid for additive acquisitions");
        }
    }
    return spec;
}

inline ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        return parse_experiment(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace mesbo
