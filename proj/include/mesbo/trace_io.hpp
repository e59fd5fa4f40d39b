#pragma once

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bo_loop.hpp"
#include "errors.hpp"

namespace mesbo {

using json = nlohmann::json;

inline json to_json(const VectorXd& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline VectorXd vector_from_json(const json& j) {
    VectorXd v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

inline json to_json(const Partition& p) { return json(p.groups); }

/// Line-delimited trace: a header line, one "init" line per initial-design
/// point, one "iter" line per record, and an "error" line when the run aborted.
inline void write_trace(std::ostream& os, const BoTrace& trace, const json& header_extra = json::object()) {
    json header = header_extra;
    header["type"] = "header";
    header["method"] = trace.method;
    header["iterations"] = trace.records.size();
    if (trace.partition) header["partition"] = to_json(*trace.partition);
    os << header.dump() << '\n';
    for (const auto& ev : trace.initial)
        os << json{{"type", "init"}, {"x", to_json(ev.x)}, {"y", ev.y}, {"f", ev.f}}.dump() << '\n';
    for (const auto& rec : trace.records) {
        json j{{"type", "iter"},          {"t", rec.t},           {"x", to_json(rec.x)},
               {"y", rec.y},              {"f", rec.f},           {"ystar", rec.y_star},
               {"acq_value", rec.acq_value}, {"acq_seconds", rec.acq_seconds}, {"best_f", rec.best_f},
               {"refit", rec.refit}};
        if (std::isfinite(rec.max_observed_before)) j["max_observed_before"] = rec.max_observed_before;
        if (rec.recommendation) j["rec_x"] = to_json(*rec.recommendation);
        if (rec.recommendation_f) j["rec_f"] = *rec.recommendation_f;
        os << j.dump() << '\n';
    }
    if (trace.error) os << json{{"type", "error"}, {"message", *trace.error}}.dump() << '\n';
}

struct TraceFile {
    json header;
    BoTrace trace;
};

/// Parse a trace stream; malformed input raises ConfigError naming the line.
inline TraceFile read_trace(std::istream& is) {
    TraceFile out;
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& msg) { throw ConfigError("line " + std::to_string(lineno) + ": " + msg); };
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail(std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) fail("missing field 'type'");
        const std::string type = j["type"];
        try {
            if (type == "header") {
                out.header = j;
                out.trace.method = j.value("method", "");
                if (j.contains("partition")) out.trace.partition = Partition{j["partition"].get<std::vector<std::vector<std::size_t>>>()};
            } else if (type == "init") {
                out.trace.initial.push_back({vector_from_json(j.at("x")), j.at("y").get<double>(), j.at("f").get<double>()});
            } else if (type == "iter") {
                IterationRecord rec;
                rec.t = j.at("t").get<std::size_t>();
                rec.x = vector_from_json(j.at("x"));
                rec.y = j.at("y").get<double>();
                rec.f = j.at("f").get<double>();
                rec.y_star = j.at("ystar").get<std::vector<std::vector<double>>>();
                rec.acq_value = j.at("acq_value").get<double>();
                rec.acq_seconds = j.at("acq_seconds").get<double>();
                rec.best_f = j.at("best_f").get<double>();
                rec.refit = j.value("refit", false);
                if (j.contains("max_observed_before")) rec.max_observed_before = j["max_observed_before"].get<double>();
                if (j.contains("rec_x")) rec.recommendation = vector_from_json(j["rec_x"]);
                if (j.contains("rec_f")) rec.recommendation_f = j["rec_f"].get<double>();
                out.trace.records.push_back(std::move(rec));
            } else if (type == "error") {
                out.trace.error = j.at("message").get<std::string>();
            } else {
                fail("unknown record type '" + type + "'");
            }
        } catch (const json::exception& e) {
            fail(std::string("bad '") + type + "' record: " + e.what());
        }
    }
    if (out.header.is_null()) throw ConfigError("trace has no header line");
    return out;
}

}  // namespace mesbo
