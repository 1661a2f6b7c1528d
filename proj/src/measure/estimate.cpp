// estimate.cpp - representative regions, NM by grid refinement, random sampling, parameter sweeps

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <omp.h>

#include "nonmark/builtin_models.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/measure.hpp"

namespace nonmark::measure {

namespace {

constexpr double kPrescanLevel = 1e-8;
constexpr std::size_t kPrescanCells = 100;
constexpr double kPrescanSpan = 25.0; // in units of 1/lambda

RepresentativeRegion damped_region(const dynamics::DampedJcParams& p, double guard)
{
    if (p.ratio() <= 0.5) {
        throw NotApplicable("damped_jc with R=" + std::to_string(p.ratio()) + " <= 1/2 has only CP intermediate maps");
    }
    const auto st = dynamics::damped_singular_times(p);
    const double ts = *st.first;
    const double w = std::sqrt(2.0 * p.gamma0 * p.lambda - p.lambda * p.lambda);
    // |c(t)| <= bound * exp(-lambda t / 2), and |c| at the guard edge is about
    // |c'(ts)| * guard, so beyond this Ncp(t1 ~ ts, dt) is zero.
    const double bound = std::sqrt(1.0 + p.lambda * p.lambda / (w * w));
    const double slope = std::abs(dynamics::oracle_cdot_damped(p, dynamics::cplx{ts, 0.0}));
    const double t2_max = (2.0 / p.lambda) * std::log(bound / (slope * guard));
    RepresentativeRegion r;
    r.t1_lo = ts - 0.5 * st.period;
    r.t1_hi = ts + 0.5 * st.period;
    r.dt_lo = 0.0;
    r.dt_hi = std::max(t2_max - ts + guard, st.period);
    r.kind = RegionKind::truncated;
    r.rationale = "one period of c(t) centred on its first zero; dt cut where Ncp from the guard edge vanishes";
    return r;
}

RepresentativeRegion spin_region(const dynamics::SpinBathParams& p)
{
    const double period = dynamics::spinbath_period(p);
    RepresentativeRegion r;
    r.t1_lo = 0.0;
    r.t1_hi = period;
    r.dt_lo = 0.0;
    r.dt_hi = period;
    r.kind = RegionKind::periodic;
    r.rationale = "one period in t1 and dt";
    return r;
}

RepresentativeRegion prescan_region(const TimeLocalModel& model, double span, const GridOptions& opts)
{
    const double h = span / static_cast<double>(kPrescanCells);
    const auto axis = cell_centres(0.0, span, kPrescanCells);
    const auto g = ncp_grid(model, axis, axis, opts);
    std::size_t i_lo = kPrescanCells, i_hi = 0, j_lo = kPrescanCells, j_hi = 0;
    for (std::size_t i = 0; i < kPrescanCells; ++i) {
        for (std::size_t j = 0; j < kPrescanCells; ++j) {
            if (g.value(i, j) > kPrescanLevel) {
                i_lo = std::min(i_lo, i);
                i_hi = std::max(i_hi, i);
                j_lo = std::min(j_lo, j);
                j_hi = std::max(j_hi, j);
            }
        }
    }
    if (i_lo > i_hi) throw NotApplicable("coarse scan found no intermediate map with Ncp > 1e-8");
    RepresentativeRegion r;
    r.t1_lo = std::max(0.0, h * static_cast<double>(i_lo) - h);
    r.t1_hi = h * static_cast<double>(i_hi + 1) + h;
    r.dt_lo = std::max(0.0, h * static_cast<double>(j_lo) - h);
    r.dt_hi = h * static_cast<double>(j_hi + 1) + h;
    r.kind = RegionKind::bounded;
    r.rationale = "bounding box of a coarse scan for Ncp > 1e-8, padded by one coarse cell";
    return r;
}

// Some rate negative somewhere in [lo, hi] (outside guards)?
bool rates_turn_negative(const TimeLocalModel& model, double lo, double hi, double guard)
{
    constexpr int kSamples = 4000;
    for (int i = 0; i <= kSamples; ++i) {
        const double t = lo + (hi - lo) * i / kSamples;
        if (model.singular_times().near(t, guard)) continue;
        for (const auto& ch : model.channels()) {
            if (ch.rate(t) < 0.0) return true;
        }
    }
    return false;
}

void check_region(const RepresentativeRegion& r)
{
    if (!(r.t1_lo >= 0.0) || !(r.t1_hi > r.t1_lo) || !(r.dt_lo >= 0.0) || !(r.dt_hi > r.dt_lo)) {
        throw InvalidParams("region must satisfy 0 <= t1_lo < t1_hi and 0 <= dt_lo < dt_hi");
    }
}

} // namespace

const char* to_string(RegionKind k)
{
    switch (k) {
    case RegionKind::periodic: return "periodic";
    case RegionKind::bounded: return "bounded";
    case RegionKind::truncated: return "truncated";
    case RegionKind::custom: return "custom";
    case RegionKind::empty: return "empty";
    }
    return "?";
}

RepresentativeRegion representative_region(const TimeLocalModel& model, const GridOptions& opts)
{
    const auto& b = model.descriptor().builtin;
    if (const auto* p = std::get_if<dynamics::DampedJcParams>(&b)) return damped_region(*p, opts.prop.guard);
    if (const auto* p = std::get_if<dynamics::SpinBathParams>(&b)) return spin_region(*p);
    if (const auto* p = std::get_if<dynamics::DetunedJcParams>(&b)) {
        return prescan_region(model, kPrescanSpan / p->lambda, opts);
    }
    throw NotApplicable("no representative region for model family '" + model.descriptor().family +
                        "'; give the region explicitly");
}

NmEstimate nm_from_grid(const NcpGrid& grid)
{
    NmEstimate e;
    double sum = 0.0;
    for (std::size_t k = 0; k < grid.values.size(); ++k) {
        const auto f = grid.flags[k];
        if (f != CellFlag::ok && f != CellFlag::singular_limit) continue;
        ++e.n_cells_total;
        const double v = grid.values[k];
        if (v > 0.0) {
            ++e.n_cells_positive;
            sum += v;
            e.max_ncp = std::max(e.max_ncp, v);
        }
    }
    e.nm = e.n_cells_positive > 0 ? sum / static_cast<double>(e.n_cells_positive) : 0.0;
    e.support_fraction =
        e.n_cells_total > 0 ? static_cast<double>(e.n_cells_positive) / static_cast<double>(e.n_cells_total) : 0.0;
    return e;
}

NmEstimate nm_estimate(const TimeLocalModel& model, const RepresentativeRegion& region, const EstimateOptions& opts)
{
    check_region(region);
    if (opts.resolution < 2) throw InvalidParams("resolution must be at least 2");

    NmEstimate best;
    std::vector<double> history;
    std::vector<std::size_t> resolutions;
    std::size_t n = opts.resolution;
    const int rounds = opts.refine ? opts.max_refinements + 1 : 1;
    bool converged = false;
    ode::Stats stats;

    for (int round = 0; round < rounds; ++round, n *= 2) {
        const auto t1_axis = cell_centres(region.t1_lo, region.t1_hi, n);
        const auto dt_axis = cell_centres(region.dt_lo, region.dt_hi, n);
        auto grid = ncp_grid(model, t1_axis, dt_axis, opts.grid);
        stats += grid.stats;
        best = nm_from_grid(grid);
        best.grid = std::move(grid);
        history.push_back(best.nm);
        resolutions.push_back(n);

        if (best.n_cells_positive == 0) {
            if (rates_turn_negative(model, region.t1_lo, region.t1_hi + region.dt_hi, opts.grid.prop.guard)) {
                throw RegionTooCoarse("no positive Ncp cell at resolution " + std::to_string(n) +
                                      " although a rate turns negative in the region");
            }
            converged = true;
            break;
        }
        if (history.size() >= 2) {
            const double prev = history[history.size() - 2];
            if (std::abs(best.nm - prev) <= opts.rel_change * std::abs(best.nm)) {
                converged = true;
                break;
            }
        }
    }
    best.region = region;
    best.convergence = std::move(history);
    best.resolutions = std::move(resolutions);
    best.converged = converged;
    best.stats = stats;
    return best;
}

NmEstimate nm_random_estimate(const TimeLocalModel& model, const RepresentativeRegion& region, std::size_t n_samples,
                              std::uint64_t seed, const GridOptions& opts)
{
    check_region(region);
    if (n_samples == 0) throw InvalidParams("n_samples must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u1(region.t1_lo, region.t1_hi);
    std::uniform_real_distribution<double> u2(region.dt_lo, region.dt_hi);
    std::vector<double> t1(n_samples), dt(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) {
        t1[k] = u1(rng);
        dt[k] = u2(rng);
    }

    NcpGrid samples;
    samples.model = model.descriptor();
    samples.t1_axis = t1;
    samples.dt_axis = dt;
    samples.values.assign(n_samples, 0.0);
    samples.flags.assign(n_samples, CellFlag::failed);
    samples.neg_threshold = opts.neg_threshold;
    const int threads = opts.jobs > 0 ? opts.jobs : omp_get_max_threads();
    const auto count = static_cast<long>(n_samples);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long k = 0; k < count; ++k) {
        const auto i = static_cast<std::size_t>(k);
        try {
            const auto v = ncp_interval(model, t1[i], t1[i] + dt[i], opts.prop, opts.neg_threshold);
            samples.values[i] = v.value;
            samples.flags[i] = v.flag;
        } catch (const Error&) {
            samples.flags[i] = CellFlag::failed;
        }
    }

    // values/flags are a flat list here, not a rectangle
    NmEstimate e = nm_from_grid(samples);
    e.region = region;
    e.convergence = {e.nm};
    e.resolutions = {n_samples};
    e.converged = true;
    e.grid = std::move(samples);
    return e;
}

SweepResult nm_sweep(const std::string& family, const std::string& param_name, const std::vector<double>& values,
                     const std::map<std::string, double>& base, const EstimateOptions& opts)
{
    SweepResult out;
    out.family = family;
    out.param_name = param_name;
    for (double v : values) {
        SweepPoint point;
        point.param = v;
        try {
            auto params = base;
            params[param_name] = v;
            const auto model = dynamics::builtin_model(family, params);
            try {
                const auto region = representative_region(model, opts.grid);
                point.estimate = nm_estimate(model, region, opts);
            } catch (const NotApplicable& e) {
                NmEstimate zero;
                zero.region.kind = RegionKind::empty;
                zero.region.rationale = e.what();
                zero.convergence = {0.0};
                zero.converged = true;
                point.estimate = std::move(zero);
            }
        } catch (const Error& e) {
            point.error = e.what();
        }
        out.points.push_back(std::move(point));
    }

    std::optional<double> prev;
    double best = -1.0;
    for (const auto& p : out.points) {
        if (!p.estimate) continue;
        const double nm = p.estimate->nm;
        if (prev && nm < *prev) out.nondecreasing = false;
        prev = nm;
        if (nm > best) {
            best = nm;
            out.argmax = p.param;
        }
        if (nm > 0.0 && !out.first_positive) out.first_positive = p.param;
    }
    return out;
}

} // namespace nonmark::measure
