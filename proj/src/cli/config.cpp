// config.cpp - RunConfig parsing, validation and echo

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "nonmark/cli.hpp"
#include "nonmark/errors.hpp"

namespace nonmark::cli {

using nlohmann::json;

double parse_number(const std::string& s, const std::string& what)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(what + ": '" + s + "' is not a number");
    }
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

Range range_from_json(const json& j, const std::string& key)
{
    if (j.is_string()) return parse_range(j.get<std::string>());
    if (j.is_array() && (j.size() == 2 || j.size() == 3)) {
        Range r{j[0].get<double>(), j[1].get<double>(), 0};
        if (j.size() == 3) r.n = j[2].get<std::size_t>();
        return r;
    }
    throw ConfigError(key + ": expected \"a:b:n\" or [a, b, n]");
}

json range_to_json(const Range& r) { return json::array({r.lo, r.hi, r.n}); }

} // namespace

Range parse_range(const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() != 2 && parts.size() != 3) throw ConfigError("range '" + text + "' must be a:b or a:b:n");
    Range r{parse_number(parts[0], "range start"), parse_number(parts[1], "range end"), 0};
    if (parts.size() == 3) {
        const auto& s = parts[2];
        unsigned long n = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("range count '" + s + "' is not an integer");
        r.n = n;
    }
    return r;
}

std::string to_string(const Range& r)
{
    return format_number(r.lo) + ":" + format_number(r.hi) + (r.n ? ":" + std::to_string(r.n) : "");
}

json model_spec(const std::string& arg, const std::vector<std::string>& params)
{
    json spec;
    if (arg.ends_with(".json") || std::filesystem::is_regular_file(arg)) {
        std::ifstream in(arg);
        if (!in) throw ConfigError("cannot open model file " + arg);
        try {
            spec = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(arg + ": " + e.what());
        }
    } else {
        spec = {{"model", arg}, {"params", json::object()}};
    }
    for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--params expects key=value, got '" + kv + "'");
        if (spec.value("model", "") == "custom") throw ConfigError("--params does not apply to custom models");
        spec["params"][kv.substr(0, eq)] = parse_number(kv.substr(eq + 1), kv.substr(0, eq));
    }
    return spec;
}

RunConfig config_from_json(const json& j)
{
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    try {
        c.command = j.value("command", c.command);
        if (j.contains("model")) {
            const auto& m = j["model"];
            c.model = m.is_string() ? model_spec(m.get<std::string>(), {}) : m;
        }
        if (j.contains("params")) {
            for (const auto& [k, v] : j["params"].items()) c.model["params"][k] = v;
        }
        if (j.contains("t1")) c.t1 = range_from_json(j["t1"], "t1");
        if (j.contains("dt")) c.dt = range_from_json(j["dt"], "dt");
        c.resolution = j.value("resolution", c.resolution);
        c.refine = j.value("refine", c.refine);
        c.max_refinements = j.value("max_refinements", c.max_refinements);
        c.rtol = j.value("tol", c.rtol);
        c.atol = j.value("atol", c.atol);
        c.guard = j.value("guard", c.guard);
        c.neg_threshold = j.value("neg_threshold", c.neg_threshold);
        c.jobs = j.value("jobs", c.jobs);
        c.seed = j.value("seed", c.seed);
        c.samples = j.value("samples", c.samples);
        c.param = j.value("param", c.param);
        c.values = j.value("values", c.values);
        c.out = j.value("out", c.out);
        const auto fmt = j.value("format", std::string("csv"));
        if (fmt != "csv" && fmt != "json") throw ConfigError("format must be csv or json");
        c.format = fmt == "json" ? Format::json : Format::csv;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const RunConfig& c)
{
    json j = {
        {"command", c.command},
        {"model", c.model},
        {"resolution", c.resolution},
        {"refine", c.refine},
        {"max_refinements", c.max_refinements},
        {"tol", c.rtol},
        {"atol", c.atol},
        {"guard", c.guard},
        {"neg_threshold", c.neg_threshold},
        {"jobs", c.jobs},
        {"seed", c.seed},
        {"samples", c.samples},
        {"format", c.format == Format::json ? "json" : "csv"},
        {"out", c.out},
    };
    if (c.t1) j["t1"] = range_to_json(*c.t1);
    if (c.dt) j["dt"] = range_to_json(*c.dt);
    if (!c.param.empty()) {
        j["param"] = c.param;
        j["values"] = c.values;
    }
    return j;
}

measure::GridOptions RunConfig::grid_options() const
{
    measure::GridOptions g;
    g.prop.tol.rtol = rtol;
    g.prop.tol.atol = atol;
    g.prop.guard = guard;
    g.neg_threshold = neg_threshold;
    g.jobs = jobs;
    return g;
}

measure::EstimateOptions RunConfig::estimate_options() const
{
    measure::EstimateOptions e;
    e.grid = grid_options();
    e.resolution = resolution;
    e.refine = refine;
    e.max_refinements = max_refinements;
    return e;
}

void RunConfig::validate() const
{
    static const std::vector<std::string> commands{"ncp-grid", "nm", "sweep", "check"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
        throw ConfigError("unknown command '" + command + "'");
    }
    if (!model.is_object() || !model.contains("model")) throw ConfigError("no model given (use --model)");
    for (const auto* r : {&t1, &dt}) {
        if (!*r) continue;
        if (!((*r)->lo >= 0.0) || !((*r)->hi > (*r)->lo) || !std::isfinite((*r)->hi)) {
            throw ConfigError("time range " + to_string(**r) + " must satisfy 0 <= a < b");
        }
        if ((*r)->n == 1) throw ConfigError("time range " + to_string(**r) + " needs at least 2 samples");
    }
    if (command == "ncp-grid" && (t1.has_value() != dt.has_value())) {
        throw ConfigError("ncp-grid needs both --t1 and --dt, or neither");
    }
    if (resolution < 2) throw ConfigError("resolution must be at least 2");
    if (max_refinements < 0) throw ConfigError("max_refinements must be non-negative");
    if (!(rtol > 0.0) || !(atol > 0.0) || !(guard > 0.0)) throw ConfigError("tolerances and guard must be positive");
    if (!(neg_threshold >= 0.0)) throw ConfigError("neg_threshold must be non-negative");
    if (jobs < 0) throw ConfigError("jobs must be non-negative");
    if (command == "sweep") {
        if (param.empty()) throw ConfigError("sweep needs --param");
        if (values.empty()) throw ConfigError("sweep needs --values");
        if (model.value("model", "") == "custom") throw ConfigError("sweep works on built-in families only");
    }
}

} // namespace nonmark::cli
