// cli.hpp - run configuration, subcommands and output writers for the nonmark tool

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonmark/measure.hpp"

namespace nonmark::cli {

enum class Format { csv, json };

/// a:b:n (inclusive, n samples) or a:b when the sample count comes from elsewhere.
struct Range {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
};
Range parse_range(const std::string& text);
double parse_number(const std::string& text, const std::string& what);
std::string to_string(const Range& r);

struct RunConfig {
    std::string command; // ncp-grid | nm | sweep | check
    nlohmann::json model = nlohmann::json::object();
    std::optional<Range> t1;
    std::optional<Range> dt;
    std::size_t resolution = 400;
    bool refine = true;
    int max_refinements = 4;
    double rtol = ode::Tolerances{}.rtol;
    double atol = ode::Tolerances{}.atol;
    double guard = dynamics::kDefaultGuard;
    double neg_threshold = measure::kDefaultNegThreshold;
    int jobs = 0;
    std::uint64_t seed = 0;
    std::size_t samples = 0; // nm: > 0 switches to the uniform random sampler
    std::string param;       // sweep
    std::vector<double> values;
    std::string out;         // empty: stdout, no manifest
    Format format = Format::csv;

    measure::GridOptions grid_options() const;
    measure::EstimateOptions estimate_options() const;
    void validate() const; // throws ConfigError
};

/// Model argument: a built-in family name or a path to a JSON model file.
nlohmann::json model_spec(const std::string& arg, const std::vector<std::string>& params);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

struct CheckResult {
    std::string property;
    bool passed = false;
    double deviation = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Oracle and invariant checks for a built-in model.
std::vector<CheckResult> run_checks(const dynamics::TimeLocalModel& model, const RunConfig& cfg);

// ---- writers (numbers with 17 significant digits) ----

std::string format_number(double v);
void write_grid(std::ostream& os, const measure::NcpGrid& g, Format f);
void write_estimate(std::ostream& os, const measure::NmEstimate& e, Format f);
void write_sweep(std::ostream& os, const measure::SweepResult& s, Format f);
void write_checks(std::ostream& os, const std::vector<CheckResult>& checks, Format f);

nlohmann::json estimate_to_json(const measure::NmEstimate& e);
nlohmann::json stats_to_json(const ode::Stats& s);

/// Runs one subcommand; returns the process exit code
/// (0 ok, 1 check failure, 2 config error, 3 model or integration error).
int run(const RunConfig& cfg, std::ostream& diag);

/// Full command line entry point.
int main_entry(int argc, char** argv);

} // namespace nonmark::cli
