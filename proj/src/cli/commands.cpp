// commands.cpp - subcommand drivers, oracle checks and the command line

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "nonmark/builtin_models.hpp"
#include "nonmark/cli.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/model_io.hpp"
#include "nonmark/propagator.hpp"

#ifndef NONMARK_VERSION
#define NONMARK_VERSION "0.0.0"
#endif

namespace nonmark::cli {

using dynamics::TimeLocalModel;
using nlohmann::json;
using qmat::ComplexMatrix;
using qmat::cplx;

namespace {

// ---- check suite ----

struct Window {
    double t1_lo, t1_hi, dt_hi, margin;
};

Window check_window(const TimeLocalModel& model)
{
    const auto& b = model.descriptor().builtin;
    if (const auto* p = std::get_if<dynamics::DampedJcParams>(&b)) {
        if (p->ratio() > 0.5) {
            const auto r = measure::representative_region(model);
            const double period = r.t1_hi - r.t1_lo;
            return {r.t1_lo, r.t1_hi, period, 0.02 * period};
        }
        return {0.0, 10.0 / p->lambda, 10.0 / p->lambda, 0.0};
    }
    if (const auto* p = std::get_if<dynamics::SpinBathParams>(&b)) {
        const double period = dynamics::spinbath_period(*p);
        return {0.0, period, period, 0.02 * period};
    }
    if (const auto* p = std::get_if<dynamics::DetunedJcParams>(&b)) return {0.0, 5.0 / p->lambda, 5.0 / p->lambda, 0.0};
    throw NotApplicable("check needs a built-in model");
}

class TimeSampler {
public:
    TimeSampler(const TimeLocalModel& model, double margin, std::uint64_t seed)
        : model_(model), margin_(std::max(margin, 10.0 * dynamics::kDefaultGuard)), rng_(seed)
    {
    }
    // Uniform in [lo, hi], redrawn while within `margin` of a singular time.
    double operator()(double lo, double hi)
    {
        std::uniform_real_distribution<double> u(lo, hi);
        for (int k = 0; k < 1000; ++k) {
            const double t = u(rng_);
            if (!model_.singular_times().near(t, margin_)) return t;
        }
        throw InvalidParams("could not draw a time away from the singular points");
    }
    std::mt19937_64& rng() { return rng_; }

private:
    const TimeLocalModel& model_;
    double margin_;
    std::mt19937_64 rng_;
};

CheckResult compare(std::string property, double deviation, double tolerance, std::string detail)
{
    return {std::move(property), deviation <= tolerance, deviation, tolerance, std::move(detail)};
}

CheckResult oracle_check(const TimeLocalModel& model, const Window& w, const RunConfig& cfg)
{
    const auto opts = cfg.grid_options();
    const auto& b = model.descriptor().builtin;
    const auto t1_axis = measure::cell_centres(w.t1_lo, w.t1_hi, 30);
    const auto dt_axis = measure::cell_centres(0.0, w.dt_hi, 30);

    if (const auto* p = std::get_if<dynamics::DampedJcParams>(&b)) {
        const auto g = measure::ncp_grid(model, t1_axis, dt_axis, opts);
        double dev = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < t1_axis.size(); ++i)
            for (std::size_t j = 0; j < dt_axis.size(); ++j) {
                if (g.flag(i, j) != measure::CellFlag::ok) continue;
                try {
                    const double o = dynamics::oracle_ncp_damped(*p, t1_axis[i], t1_axis[i] + dt_axis[j]);
                    dev = std::max(dev, std::abs(g.value(i, j) - o));
                    ++used;
                } catch (const SingularPoint&) {
                }
            }
        return compare("oracle_ncp_damped", dev, 1e-6, std::to_string(used) + " cells of a 30x30 grid");
    }
    if (const auto* p = std::get_if<dynamics::SpinBathParams>(&b)) {
        double dev = 0.0;
        std::size_t used = 0;
        for (double t1 : t1_axis) {
            if (model.singular_times().near(t1, opts.prop.guard)) continue;
            std::vector<double> t2;
            for (double dt : dt_axis) t2.push_back(t1 + dt);
            const auto ray = dynamics::propagate_ray(model, t1, t2, opts.prop);
            for (std::size_t j = 0; j < t2.size(); ++j) {
                if (!ray.maps[j]) continue;
                const auto choi = dynamics::choi_from_propagator({model.dim(), t1, t2[j], *ray.maps[j], {}});
                dev = std::max(dev, qmat::max_abs_diff(choi.matrix, dynamics::oracle_choi_spinbath(*p, t1, t2[j])));
                ++used;
            }
        }
        return compare("oracle_choi_spinbath", dev, 1e-8, std::to_string(used) + " cells of a 30x30 grid");
    }
    const auto& p = std::get<dynamics::DetunedJcParams>(b);
    const double t_max = w.t1_hi + w.dt_hi;
    const auto sampled = dynamics::solve_c_detuned(p, t_max, opts.prop.tol);
    double dev = 0.0;
    for (std::size_t k = 0; k < sampled.t.size(); ++k) {
        dev = std::max(dev, std::abs(sampled.c[k] - dynamics::detuned_amplitude(p, sampled.t[k])));
    }
    return compare("detuned_amplitude_vs_ode", dev, 1e-8, std::to_string(sampled.t.size()) + " samples");
}

ComplexMatrix random_unitary(std::size_t d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    ComplexMatrix h(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            h(i, j) = i == j ? cplx{n(rng), 0.0} : cplx{n(rng), n(rng)};
            h(j, i) = std::conj(h(i, j));
        }
    return qmat::hermitian_eig(h).eigenvectors;
}

} // namespace

std::vector<CheckResult> run_checks(const TimeLocalModel& model, const RunConfig& cfg)
{
    const auto w = check_window(model);
    const auto opts = cfg.grid_options();
    const std::size_t d = model.dim();
    const auto id = ComplexMatrix::identity(d);
    TimeSampler draw(model, w.margin, cfg.seed);
    std::vector<CheckResult> out;

    out.push_back(oracle_check(model, w, cfg));

    double comp = 0.0, tp = 0.0, unit = 0.0, anc = 0.0;
    constexpr int kCases = 10;
    for (int c = 0; c < kCases; ++c) {
        double t[3] = {draw(0.0, w.t1_hi + w.dt_hi), draw(0.0, w.t1_hi + w.dt_hi), draw(0.0, w.t1_hi + w.dt_hi)};
        std::sort(std::begin(t), std::end(t));
        const auto p21 = dynamics::propagate(model, t[0], t[1], opts.prop).matrix;
        const auto p32 = dynamics::propagate(model, t[1], t[2], opts.prop).matrix;
        const auto p31 = dynamics::propagate(model, t[0], t[2], opts.prop);
        comp = std::max(comp, qmat::max_abs_diff(p31.matrix, p32 * p21));

        const auto choi = dynamics::choi_from_propagator(p31);
        tp = std::max(tp, qmat::max_abs_diff(qmat::partial_trace(choi.matrix, d, d, qmat::Subsystem::B),
                                             (1.0 / static_cast<double>(d)) * id));

        const auto u = qmat::kron(random_unitary(d, draw.rng()), id);
        const auto rotated = u * choi.matrix * u.adjoint();
        unit = std::max(unit, std::abs(measure::ncp(rotated, opts.neg_threshold) - measure::ncp(choi, opts.neg_threshold)));

        const auto via_ancilla = dynamics::choi_via_ancilla(model, t[0], t[2], opts.prop);
        anc = std::max(anc, qmat::max_abs_diff(via_ancilla.matrix, choi.matrix));
    }
    out.push_back(compare("composition_law", comp, 1e-7, std::to_string(kCases) + " random triples"));
    out.push_back(compare("choi_partial_trace", tp, 1e-8, std::to_string(kCases) + " random intervals"));
    out.push_back(compare("ncp_unitary_invariance", unit, 1e-10, std::to_string(kCases) + " random unitaries"));
    out.push_back(compare("ancilla_equivalence", anc, 1e-8, std::to_string(kCases) + " random intervals"));

    double worst = 0.0;
    for (double t : measure::linspace(0.0, w.t1_hi + w.dt_hi, 41)) {
        if (model.singular_times().near(t, opts.prop.guard)) continue;
        worst = std::min(worst, qmat::min_eigenvalue(dynamics::choi_of_interval(model, 0.0, t, opts.prop).matrix));
    }
    out.push_back(compare("cp_from_zero", std::max(0.0, -worst), 1e-7, "min Choi eigenvalue of L(t,0) over 41 times"));

    double self = 0.0;
    for (int c = 0; c < kCases; ++c) {
        const double t = draw(0.0, w.t1_hi);
        self = std::max(self, measure::ncp_interval(model, t, t, opts.prop, opts.neg_threshold).value);
    }
    out.push_back(compare("ncp_identity", self, 0.0, "Ncp(t, t) at random t"));
    return out;
}

int run(const RunConfig& cfg, std::ostream& diag)
{
    const auto start = std::chrono::steady_clock::now();
    json warnings = json::array();
    ode::Stats stats;
    std::ostringstream body;
    int code = 0;
    std::optional<TimeLocalModel> model;

    try {
        cfg.validate();
        model = dynamics::model_from_json(cfg.model);
    } catch (const ConfigError& e) {
        diag << "nonmark: config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidParams& e) {
        diag << "nonmark: config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        diag << "nonmark: model error: " << e.what() << '\n';
        return 3;
    }

    try {
        if (cfg.command == "ncp-grid") {
            std::vector<double> t1_axis, dt_axis;
            if (cfg.t1) {
                const auto axis = [&](const Range& r) {
                    return measure::linspace(r.lo, r.hi, r.n ? r.n : cfg.resolution);
                };
                t1_axis = axis(*cfg.t1);
                dt_axis = axis(*cfg.dt);
            } else {
                const auto r = measure::representative_region(*model, cfg.grid_options());
                t1_axis = measure::cell_centres(r.t1_lo, r.t1_hi, cfg.resolution);
                dt_axis = measure::cell_centres(r.dt_lo, r.dt_hi, cfg.resolution);
            }
            const auto g = measure::ncp_grid(*model, t1_axis, dt_axis, cfg.grid_options());
            stats = g.stats;
            if (auto n = g.count(measure::CellFlag::skipped_guard)) {
                warnings.push_back(std::to_string(n) + " cells inside singular guards skipped");
            }
            if (auto n = g.count(measure::CellFlag::failed)) {
                warnings.push_back(std::to_string(n) + " cells failed to integrate");
                code = 3;
            }
            write_grid(body, g, cfg.format);
        } else if (cfg.command == "nm") {
            measure::NmEstimate e;
            std::optional<measure::RepresentativeRegion> region;
            if (cfg.t1 && cfg.dt) {
                region = measure::RepresentativeRegion{cfg.t1->lo, cfg.t1->hi, cfg.dt->lo, cfg.dt->hi,
                                                       measure::RegionKind::custom, "given on the command line"};
            } else if (cfg.t1 || cfg.dt) {
                throw ConfigError("nm needs both --t1 and --dt to override the region");
            } else {
                try {
                    region = measure::representative_region(*model, cfg.grid_options());
                } catch (const NotApplicable& na) {
                    e.region.kind = measure::RegionKind::empty;
                    e.region.rationale = na.what();
                    e.convergence = {0.0};
                    e.converged = true;
                    warnings.push_back(na.what());
                }
            }
            if (region) {
                e = cfg.samples > 0
                        ? measure::nm_random_estimate(*model, *region, cfg.samples, cfg.seed, cfg.grid_options())
                        : measure::nm_estimate(*model, *region, cfg.estimate_options());
                stats = cfg.samples > 0 ? e.grid.stats : e.stats;
                if (!e.converged) warnings.push_back("refinement did not reach the 0.5% criterion");
            }
            write_estimate(body, e, cfg.format);
        } else if (cfg.command == "sweep") {
            std::map<std::string, double> base;
            const auto given = cfg.model.value("params", json::object());
            for (const auto& [k, v] : given.items()) base[k] = v.get<double>();
            const auto s = measure::nm_sweep(cfg.model["model"].get<std::string>(), cfg.param, cfg.values, base,
                                             cfg.estimate_options());
            std::size_t failures = 0;
            for (const auto& p : s.points) {
                if (p.estimate) {
                    stats += p.estimate->stats;
                } else {
                    ++failures;
                    warnings.push_back(cfg.param + "=" + format_number(p.param) + ": " + p.error);
                }
            }
            if (failures == s.points.size()) code = 3;
            write_sweep(body, s, cfg.format);
        } else {
            const auto checks = run_checks(*model, cfg);
            for (const auto& c : checks) {
                if (!c.passed) {
                    code = 1;
                    warnings.push_back(c.property + " failed: deviation " + format_number(c.deviation));
                }
            }
            write_checks(body, checks, cfg.format);
        }
    } catch (const ConfigError& e) {
        diag << "nonmark: config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        diag << "nonmark: " << e.what() << '\n';
        return 3;
    }

    for (const auto& w : warnings) diag << "nonmark: warning: " << w.get<std::string>() << '\n';
    if (cfg.out.empty()) {
        std::cout << body.str();
        return code;
    }
    std::ofstream out(cfg.out, std::ios::binary);
    out << body.str();
    if (!out) {
        diag << "nonmark: cannot write " << cfg.out << '\n';
        return 2;
    }
    json desc = dynamics::descriptor_to_json(model->descriptor());
    desc["time_unit"] = model->time_unit();
    const json manifest = {
        {"tool", "nonmark"},
        {"version", NONMARK_VERSION},
        {"config", config_to_json(cfg)},
        {"model", desc},
        {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
        {"integrator", stats_to_json(stats)},
        {"warnings", warnings},
        {"exit_code", code},
        {"output", cfg.out},
    };
    std::ofstream(cfg.out + ".manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    return code;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Non-Markovianity of time-local master equations from non-CP intermediate maps"};
    app.set_version_flag("--version", NONMARK_VERSION);
    app.require_subcommand(1);

    std::string config_path, model_arg, t1, dt, values, format, out;
    std::vector<std::string> params;
    std::size_t resolution = 0, samples = 0;
    double tol = 0.0, guard = 0.0, neg_threshold = 0.0;
    int jobs = 0, max_refinements = 0;
    bool refine = true;
    std::uint64_t seed = 0;
    std::string param;

    auto* opt_config = app.add_option("--config", config_path, "JSON run configuration; flags override it");
    auto* opt_model = app.add_option("--model", model_arg, "built-in family or model JSON file");
    auto* opt_params = app.add_option("--params", params, "model parameters key=value");
    auto* opt_t1 = app.add_option("--t1", t1, "t1 range a:b[:n]");
    auto* opt_dt = app.add_option("--dt", dt, "dt range a:b[:n]");
    auto* opt_res = app.add_option("--resolution", resolution, "cells per axis on the first grid");
    auto* opt_refine = app.add_option("--refine", refine, "double the resolution until NM settles");
    auto* opt_maxref = app.add_option("--max-refinements", max_refinements);
    auto* opt_tol = app.add_option("--tol", tol, "integrator relative tolerance");
    auto* opt_guard = app.add_option("--guard", guard, "half-width of singular guard intervals");
    auto* opt_thr = app.add_option("--neg-threshold", neg_threshold, "eigenvalues below -threshold count");
    auto* opt_jobs = app.add_option("--jobs", jobs, "OpenMP threads (0: default)");
    auto* opt_seed = app.add_option("--seed", seed, "seed for random sampling");
    auto* opt_samples = app.add_option("--samples", samples, "nm: random samples instead of grids");
    auto* opt_param = app.add_option("--param", param, "sweep: parameter name");
    auto* opt_values = app.add_option("--values", values, "sweep: v1,v2,... or a:b:n");
    auto* opt_format = app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    auto* opt_out = app.add_option("--out", out, "output file (stdout if omitted)");

    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"ncp-grid", "Ncp over a (t1, dt) grid as CSV t1,dt,ncp,flag"},
             {"nm", "averaged measure NM over the representative region"},
             {"sweep", "NM along one model parameter"},
             {"check", "oracle and invariant checks for a built-in model"}}) {
        app.add_subcommand(name, help)->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        if (*opt_config) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config " + config_path);
            try {
                cfg = config_from_json(json::parse(in));
            } catch (const json::exception& e) {
                throw ConfigError(config_path + ": " + e.what());
            }
        }
        cfg.command = app.get_subcommands().front()->get_name();
        if (*opt_model) {
            cfg.model = model_spec(model_arg, params);
        } else if (*opt_params) {
            const auto extra = model_spec("", params)["params"];
            for (const auto& [k, v] : extra.items()) cfg.model["params"][k] = v;
        }
        if (*opt_t1) cfg.t1 = parse_range(t1);
        if (*opt_dt) cfg.dt = parse_range(dt);
        if (*opt_res) cfg.resolution = resolution;
        if (*opt_refine) cfg.refine = refine;
        if (*opt_maxref) cfg.max_refinements = max_refinements;
        if (*opt_tol) cfg.rtol = tol;
        if (*opt_guard) cfg.guard = guard;
        if (*opt_thr) cfg.neg_threshold = neg_threshold;
        if (*opt_jobs) cfg.jobs = jobs;
        if (*opt_seed) cfg.seed = seed;
        if (*opt_samples) cfg.samples = samples;
        if (*opt_param) cfg.param = param;
        if (*opt_values) {
            cfg.values.clear();
            if (values.find(':') != std::string::npos) {
                const auto r = parse_range(values);
                if (r.n < 1) throw ConfigError("--values a:b:n needs a count");
                cfg.values = r.n == 1 ? std::vector<double>{r.lo} : measure::linspace(r.lo, r.hi, r.n);
            } else {
                std::stringstream ss(values);
                for (std::string item; std::getline(ss, item, ',');) cfg.values.push_back(parse_number(item, "--values"));
            }
        }
        if (*opt_format) cfg.format = format == "json" ? Format::json : Format::csv;
        if (*opt_out) cfg.out = out;
    } catch (const ConfigError& e) {
        std::cerr << "nonmark: config error: " << e.what() << '\n';
        return 2;
    }
    return run(cfg, std::cerr);
}

} // namespace nonmark::cli
