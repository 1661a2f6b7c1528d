// grid.cpp - Ncp over (t1, dt) grids; OpenMP over rows plus the serial reference

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

#include "nonmark/errors.hpp"
#include "nonmark/measure.hpp"

namespace nonmark::measure {

namespace {

void check_axes(const std::vector<double>& t1_axis, const std::vector<double>& dt_axis)
{
    auto increasing = [](const std::vector<double>& v) {
        return std::adjacent_find(v.begin(), v.end(), [](double a, double b) { return !(b > a); }) == v.end();
    };
    if (t1_axis.empty() || dt_axis.empty()) throw InvalidParams("ncp_grid: empty axis");
    if (!increasing(t1_axis) || !increasing(dt_axis)) throw InvalidParams("ncp_grid: axes must be strictly increasing");
    if (t1_axis.front() < 0.0 || dt_axis.front() < 0.0) throw InvalidParams("ncp_grid: negative times");
}

using qmat::cplx;
using Block = std::vector<cplx>; // row-major n x n, n = d^2

void block_product(std::span<const cplx> a, std::span<const cplx> b, std::size_t n, std::span<cplx> out)
{
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            cplx acc{};
            for (std::size_t m = 0; m < n; ++m) acc += a[r * n + m] * b[m * n + c];
            out[r * n + c] = acc;
        }
}

// Ncp of the map with row-major superoperator `phi`.
NcpValue cell_from_map(std::span<const cplx> phi, std::size_t d, double neg_threshold)
{
    const std::size_t n = d * d;
    const ComplexMatrix superop(n, n, std::vector<cplx>(phi.begin(), phi.end()));
    const auto choi = (1.0 / static_cast<double>(d)) * dynamics::reshuffle(superop, d);
    if (!choi.all_finite()) return {0.0, CellFlag::failed};
    try {
        return {ncp(choi, neg_threshold), CellFlag::ok};
    } catch (const Error&) {
        return {0.0, CellFlag::failed};
    }
}

// Fills one t1 row. Every cell is written, so rows are independent.
void evaluate_row(const TimeLocalModel& model, double t1, const std::vector<double>& dt_axis,
                  const GridOptions& opts, double* values, CellFlag* flags, ode::Stats& stats)
{
    const auto& st = model.singular_times();
    const std::size_t n = dt_axis.size();

    if (auto ts = st.near(t1, opts.prop.guard)) {
        for (std::size_t j = 0; j < n; ++j) {
            const double t2 = t1 + dt_axis[j];
            values[j] = 0.0;
            if (dt_axis[j] == 0.0) {
                flags[j] = CellFlag::ok;
            } else if (!st.near(t2, opts.prop.guard) && model.limit_diverges && model.limit_diverges(*ts, t2)) {
                values[j] = std::numbers::pi / 2;
                flags[j] = CellFlag::singular_limit;
            } else {
                flags[j] = CellFlag::skipped_guard;
            }
        }
        return;
    }

    // cells the integration never reaches keep the failed flag
    std::vector<double> t2(n);
    for (std::size_t j = 0; j < n; ++j) {
        t2[j] = t1 + dt_axis[j];
        values[j] = 0.0;
        flags[j] = st.near(t2[j], opts.prop.guard) ? CellFlag::skipped_guard : CellFlag::failed;
    }
    const std::size_t d = model.dim();
    try {
        stats += dynamics::propagate_with(model, t1, t2, opts.prop, [&](std::size_t j, std::span<const cplx> phi) {
            const auto v = dt_axis[j] == 0.0 ? NcpValue{} : cell_from_map(phi, d, opts.neg_threshold);
            values[j] = v.value;
            flags[j] = v.flag;
        });
    } catch (const Error&) {
    }
}

NcpGrid make_grid(const TimeLocalModel& model, const std::vector<double>& t1_axis, const std::vector<double>& dt_axis,
                  const GridOptions& opts)
{
    check_axes(t1_axis, dt_axis);
    NcpGrid g;
    g.model = model.descriptor();
    g.t1_axis = t1_axis;
    g.dt_axis = dt_axis;
    g.values.assign(t1_axis.size() * dt_axis.size(), 0.0);
    g.flags.assign(g.values.size(), CellFlag::ok);
    g.neg_threshold = opts.neg_threshold;
    return g;
}

// Checkpoints splitting [lo, hi]: midpoints between neighbouring singular
// times plus a uniform subdivision, all well away from any guard interval.
std::vector<double> checkpoints(const TimeLocalModel& model, double lo, double hi, double guard)
{
    constexpr int kUniform = 32;
    const auto& st = model.singular_times();
    const double span = hi - lo;
    std::vector<double> out;
    const auto sing = st.in_range(std::max(0.0, lo - span), hi + span);
    for (std::size_t k = 0; k + 1 < sing.size(); ++k) out.push_back(0.5 * (sing[k] + sing[k + 1]));
    for (int k = 1; k < kUniform; ++k) out.push_back(lo + span * k / kUniform);
    std::erase_if(out, [&](double t) { return !(t > lo && t < hi) || st.near(t, 10.0 * guard); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

std::size_t NcpGrid::count(CellFlag f) const { return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), f)); }

NcpGrid ncp_grid(const TimeLocalModel& model, const std::vector<double>& t1_axis, const std::vector<double>& dt_axis,
                 const GridOptions& opts)
{
    // Λ(t2, t1) = Φ(t2, C_k) S_{k-1} ... S_{k0} M(t1) with checkpoints C, segment
    // maps S_k = Λ(C_{k+1}, C_k) and M(t1) = Λ(C_k0, t1). Each row integrates only
    // up to its first checkpoint; each segment is integrated once for all rows.
    NcpGrid g = make_grid(model, t1_axis, dt_axis, opts);
    const auto& st = model.singular_times();
    const double guard = opts.prop.guard;
    const std::size_t d = model.dim();
    const std::size_t n = d * d;
    const std::size_t rows = t1_axis.size();
    const std::size_t cols = dt_axis.size();
    const int threads = opts.jobs > 0 ? opts.jobs : omp_get_max_threads();

    const auto cps = checkpoints(model, t1_axis.front(), t1_axis.back() + dt_axis.back(), guard);
    const std::size_t n_cp = cps.size();

    // segment maps between consecutive checkpoints
    std::vector<Block> seg(n_cp > 0 ? n_cp - 1 : 0);
    std::vector<char> seg_ok(seg.size(), 0);
    std::vector<ode::Stats> seg_stats(seg.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long k = 0; k < static_cast<long>(seg.size()); ++k) {
        const auto u = static_cast<std::size_t>(k);
        try {
            auto p = dynamics::propagate(model, cps[u], cps[u + 1], opts.prop);
            seg_stats[u] = p.stats;
            seg[u].assign(p.matrix.data().begin(), p.matrix.data().end());
            seg_ok[u] = 1;
        } catch (const Error&) {
        }
    }

    // rows: cells up to the first checkpoint directly, then M(t1) and prefixes
    std::vector<std::size_t> first_cp(rows, n_cp);
    std::vector<std::vector<Block>> prefix(rows); // prefix[i][k - first_cp[i]] maps t1 -> C_k
    std::vector<char> row_ok(rows, 0);
    std::vector<ode::Stats> row_stats(rows);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long ii = 0; ii < static_cast<long>(rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double t1 = t1_axis[i];
        double* values = g.values.data() + i * cols;
        CellFlag* flags = g.flags.data() + i * cols;
        if (st.near(t1, guard)) {
            evaluate_row(model, t1, dt_axis, opts, values, flags, row_stats[i]);
            continue;
        }
        const auto k0 = static_cast<std::size_t>(std::lower_bound(cps.begin(), cps.end(), t1) - cps.begin());
        first_cp[i] = k0;
        const double stop = k0 < n_cp ? cps[k0] : std::numeric_limits<double>::infinity();

        std::vector<double> t2;
        for (std::size_t j = 0; j < cols && t1 + dt_axis[j] <= stop; ++j) t2.push_back(t1 + dt_axis[j]);
        const std::size_t direct = t2.size();
        if (k0 < n_cp) t2.push_back(stop);
        std::fill(values, values + cols, 0.0);
        for (std::size_t j = 0; j < cols; ++j) {
            flags[j] = j < direct && st.near(t2[j], guard) ? CellFlag::skipped_guard : CellFlag::failed;
        }

        Block m;
        try {
            row_stats[i] = dynamics::propagate_with(model, t1, t2, opts.prop, [&](std::size_t j, std::span<const cplx> phi) {
                if (j == direct) {
                    m.assign(phi.begin(), phi.end());
                    return;
                }
                const auto v = dt_axis[j] == 0.0 ? NcpValue{} : cell_from_map(phi, d, opts.neg_threshold);
                values[j] = v.value;
                flags[j] = v.flag;
            });
        } catch (const Error&) {
            continue;
        }
        if (k0 >= n_cp || m.empty()) continue;
        auto& pre = prefix[i];
        pre.push_back(std::move(m));
        // stops at the first failed segment; later cells of the row stay failed
        for (std::size_t k = k0; k + 1 < n_cp && seg_ok[k]; ++k) {
            Block next(n * n);
            block_product(seg[k], pre.back(), n, next);
            pre.push_back(std::move(next));
        }
        row_ok[i] = 1;
    }

    // segments: every remaining cell from one integration per checkpoint
    const double t2_max = t1_axis.back() + dt_axis.back();
    std::vector<ode::Stats> pass_stats(n_cp);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long kk = 0; kk < static_cast<long>(n_cp); ++kk) {
        const auto k = static_cast<std::size_t>(kk);
        const double lo = cps[k];
        const double hi = k + 1 < n_cp ? cps[k + 1] : t2_max;
        struct Entry {
            double t2;
            std::size_t i, j;
        };
        std::vector<Entry> entries;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!row_ok[i] || first_cp[i] > k || k - first_cp[i] >= prefix[i].size()) continue;
            const double t1 = t1_axis[i];
            auto j = static_cast<std::size_t>(
                std::upper_bound(dt_axis.begin(), dt_axis.end(), lo - t1) - dt_axis.begin());
            for (; j < cols; ++j) {
                const double t2 = t1 + dt_axis[j];
                if (t2 <= lo) continue;
                if (t2 > hi) break;
                if (st.near(t2, guard)) {
                    g.flags[i * cols + j] = CellFlag::skipped_guard;
                } else {
                    entries.push_back({t2, i, j});
                }
            }
        }
        if (entries.empty()) continue;
        std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.t2 < b.t2; });
        std::vector<double> t2(entries.size());
        for (std::size_t e = 0; e < entries.size(); ++e) t2[e] = entries[e].t2;
        Block lam(n * n);
        try {
            pass_stats[k] = dynamics::propagate_with(model, lo, t2, opts.prop, [&](std::size_t e, std::span<const cplx> phi) {
                const auto [t, i, j] = entries[e];
                const auto& pre = prefix[i][k - first_cp[i]];
                block_product(phi, pre, n, lam);
                const auto v = cell_from_map(lam, d, opts.neg_threshold);
                g.values[i * cols + j] = v.value;
                g.flags[i * cols + j] = v.flag;
            });
        } catch (const Error&) {
            // cells of this pass stay flagged as failed
        }
    }

    for (const auto& s : seg_stats) g.stats += s;
    for (const auto& s : row_stats) g.stats += s;
    for (const auto& s : pass_stats) g.stats += s;
    return g;
}

NcpGrid ncp_grid_serial(const TimeLocalModel& model, const std::vector<double>& t1_axis,
                        const std::vector<double>& dt_axis, const GridOptions& opts)
{
    NcpGrid g = make_grid(model, t1_axis, dt_axis, opts);
    const std::size_t n = dt_axis.size();
    for (std::size_t r = 0; r < t1_axis.size(); ++r) {
        ode::Stats s;
        evaluate_row(model, t1_axis[r], dt_axis, opts, g.values.data() + r * n, g.flags.data() + r * n, s);
        g.stats += s;
    }
    return g;
}

} // namespace nonmark::measure
