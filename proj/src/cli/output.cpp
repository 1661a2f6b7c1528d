// output.cpp - CSV / JSON writers

#include <cstdio>

#include "nonmark/cli.hpp"

namespace nonmark::cli {

using nlohmann::json;

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json stats_to_json(const ode::Stats& s)
{
    return {{"steps", s.steps},
            {"rejected", s.rejected},
            {"rhs_evals", s.rhs_evals},
            {"max_error_estimate", s.max_error_estimate}};
}

namespace {

json region_to_json(const measure::RepresentativeRegion& r)
{
    return {{"t1", {r.t1_lo, r.t1_hi}},
            {"dt", {r.dt_lo, r.dt_hi}},
            {"kind", measure::to_string(r.kind)},
            {"rationale", r.rationale}};
}

void csv_field(std::ostream& os, const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        os << s;
        return;
    }
    os << '"';
    for (char c : s) {
        if (c == '"') os << '"';
        os << c;
    }
    os << '"';
}

} // namespace

json estimate_to_json(const measure::NmEstimate& e)
{
    return {{"nm", e.nm},
            {"support_fraction", e.support_fraction},
            {"n_cells_total", e.n_cells_total},
            {"n_cells_positive", e.n_cells_positive},
            {"max_ncp", e.max_ncp},
            {"region", region_to_json(e.region)},
            {"convergence", e.convergence},
            {"resolutions", e.resolutions},
            {"converged", e.converged}};
}

void write_grid(std::ostream& os, const measure::NcpGrid& g, Format f)
{
    const std::size_t n1 = g.t1_axis.size();
    const std::size_t n2 = g.dt_axis.size();
    if (f == Format::csv) {
        os << "t1,dt,ncp,flag\n";
        for (std::size_t i = 0; i < n1; ++i)
            for (std::size_t j = 0; j < n2; ++j) {
                os << format_number(g.t1_axis[i]) << ',' << format_number(g.dt_axis[j]) << ','
                   << format_number(g.value(i, j)) << ',' << measure::to_string(g.flag(i, j)) << '\n';
            }
        return;
    }
    json values = json::array(), flags = json::array();
    for (std::size_t i = 0; i < n1; ++i) {
        json vr = json::array(), fr = json::array();
        for (std::size_t j = 0; j < n2; ++j) {
            vr.push_back(g.value(i, j));
            fr.push_back(measure::to_string(g.flag(i, j)));
        }
        values.push_back(std::move(vr));
        flags.push_back(std::move(fr));
    }
    const json j = {{"model", g.model.family},
                    {"t1", g.t1_axis},
                    {"dt", g.dt_axis},
                    {"ncp", std::move(values)},
                    {"flag", std::move(flags)},
                    {"neg_threshold", g.neg_threshold}};
    os << j.dump(2) << '\n';
}

void write_estimate(std::ostream& os, const measure::NmEstimate& e, Format f)
{
    if (f == Format::json) {
        os << estimate_to_json(e).dump(2) << '\n';
        return;
    }
    os << "nm,support_fraction,n_cells_total,n_cells_positive,max_ncp,t1_lo,t1_hi,dt_lo,dt_hi,region_kind,converged\n";
    os << format_number(e.nm) << ',' << format_number(e.support_fraction) << ',' << e.n_cells_total << ','
       << e.n_cells_positive << ',' << format_number(e.max_ncp) << ',' << format_number(e.region.t1_lo) << ','
       << format_number(e.region.t1_hi) << ',' << format_number(e.region.dt_lo) << ','
       << format_number(e.region.dt_hi) << ',' << measure::to_string(e.region.kind) << ','
       << (e.converged ? "true" : "false") << '\n';
}

void write_sweep(std::ostream& os, const measure::SweepResult& s, Format f)
{
    if (f == Format::json) {
        json points = json::array();
        for (const auto& p : s.points) {
            json item = {{"param", p.param}, {"error", p.error}};
            if (p.estimate) item["estimate"] = estimate_to_json(*p.estimate);
            points.push_back(std::move(item));
        }
        json j = {{"family", s.family},
                  {"param_name", s.param_name},
                  {"points", std::move(points)},
                  {"nondecreasing", s.nondecreasing}};
        j["argmax"] = s.argmax ? json(*s.argmax) : json(nullptr);
        j["first_positive"] = s.first_positive ? json(*s.first_positive) : json(nullptr);
        os << j.dump(2) << '\n';
        return;
    }
    os << "param,nm,support_fraction,error\n";
    for (const auto& p : s.points) {
        os << format_number(p.param) << ',';
        if (p.estimate) os << format_number(p.estimate->nm) << ',' << format_number(p.estimate->support_fraction);
        else os << ',';
        os << ',';
        csv_field(os, p.error);
        os << '\n';
    }
}

void write_checks(std::ostream& os, const std::vector<CheckResult>& checks, Format f)
{
    if (f == Format::json) {
        json arr = json::array();
        for (const auto& c : checks) {
            arr.push_back({{"property", c.property},
                           {"passed", c.passed},
                           {"deviation", c.deviation},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
        }
        os << arr.dump(2) << '\n';
        return;
    }
    os << "property,passed,deviation,tolerance,detail\n";
    for (const auto& c : checks) {
        csv_field(os, c.property);
        os << ',' << (c.passed ? "true" : "false") << ',' << format_number(c.deviation) << ','
           << format_number(c.tolerance) << ',';
        csv_field(os, c.detail);
        os << '\n';
    }
}

} // namespace nonmark::cli
