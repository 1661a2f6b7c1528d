// test_measure.cpp - Ncp, grids, NM estimates, trace-distance witness

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nonmark/builtin_models.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/measure.hpp"
#include "nonmark/model_io.hpp"
#include "support/generators.hpp"

using namespace nonmark;
using namespace nonmark::measure;
using dynamics::damped_jc;
using dynamics::spin_bath;
using dynamics::TimeLocalModel;

namespace {

constexpr double pi = std::numbers::pi;

ComplexMatrix dephasing_choi(double k)
{
    ComplexMatrix m(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    m(0, 3) = m(3, 0) = 0.5 * k;
    return m;
}

} // namespace

TEST(Ncp, Examples)
{
    EXPECT_EQ(ncp(dynamics::maximally_entangled(2)), 0.0);
    EXPECT_NEAR(ncp(dephasing_choi(2.0)), std::atan(0.5), 1e-14);
    EXPECT_NEAR(ncp(dephasing_choi(2.0)), 0.46365, 1e-5);
    EXPECT_EQ(ncp(dephasing_choi(1.0)), 0.0);
    EXPECT_EQ(ncp(dephasing_choi(-1.0)), 0.0);
    EXPECT_THROW(ncp(qmat::pauli::plus()), NotHermitian);
}

TEST(Ncp, Threshold)
{
    // eigenvalue -5e-11 sits below the default threshold
    const auto m = dephasing_choi(1.0 + 1e-10);
    EXPECT_EQ(ncp(m), 0.0);
    EXPECT_GT(ncp(m, 0.0), 0.0);
}

TEST(Ncp, BoundedAndUnitarilyInvariant)
{
    testgen::Gen gen(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto h = gen.hermitian(4);
        const double v = ncp(h);
        EXPECT_GE(v, 0.0);
        EXPECT_LT(v, pi / 2);
        const auto u = qmat::kron(gen.unitary(2), gen.unitary(2));
        EXPECT_NEAR(ncp(u * h * u.adjoint()), v, 1e-10);
    }
}

TEST(NcpInterval, Examples)
{
    const auto spin = spin_bath({1, 1.0});
    EXPECT_EQ(ncp_interval(spin, 0.4, 0.4).value, 0.0);
    EXPECT_NEAR(ncp_interval(spin, pi / 3, 5 * pi / 12).value, std::atan((std::sqrt(3.0) - 1.0) / 2.0), 1e-8);

    const auto at_pole = ncp_interval(spin, pi / 4 + 1e-5, pi / 2 + 0.2);
    EXPECT_EQ(at_pole.flag, CellFlag::singular_limit);
    EXPECT_EQ(at_pole.value, pi / 2);
    EXPECT_EQ(ncp_interval(spin, 0.1, pi / 4).flag, CellFlag::skipped_guard);
    // start on a pole, end on a zero of the coherence: no divergence verdict
    EXPECT_EQ(ncp_interval(spin, pi / 4, 3 * pi / 4).flag, CellFlag::skipped_guard);
}

TEST(NcpInterval, DampedLobeMatchesOracle)
{
    const dynamics::DampedJcParams p{5.0, 1.0};
    const auto model = damped_jc(p);
    const double ts = *dynamics::damped_singular_times(p).first;
    for (auto [t1, t2] : {std::pair{ts - 0.1, ts + 0.4}, {ts - 0.3, ts + 0.9}, {ts - 0.02, ts + 2.5}}) {
        const double oracle = dynamics::oracle_ncp_damped(p, t1, t2);
        ASSERT_GT(oracle, 0.0);
        EXPECT_NEAR(ncp_interval(model, t1, t2).value, oracle, 1e-6);
    }
}

TEST(Grid, MarkovianIsZero)
{
    const auto model = damped_jc({0.3, 1.0});
    const auto g = ncp_grid(model, cell_centres(0.0, 8.0, 20), cell_centres(0.0, 8.0, 20));
    for (double v : g.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(g.count(CellFlag::ok), g.values.size());
}

TEST(Grid, ZeroDtColumn)
{
    const auto model = damped_jc({5.0, 1.0});
    const auto g = ncp_grid(model, cell_centres(0.0, 4.0, 16), linspace(0.0, 3.0, 7));
    for (std::size_t i = 0; i < g.t1_axis.size(); ++i) EXPECT_EQ(g.value(i, 0), 0.0);
}

TEST(Grid, SpinPeriodicInT1)
{
    const auto model = spin_bath({1, 1.0});
    const auto period = dynamics::spinbath_period({1, 1.0});
    ASSERT_NEAR(period, pi / 2, 1e-15);
    const auto t1 = cell_centres(0.0, period, 12);
    std::vector<double> shifted;
    for (double t : t1) shifted.push_back(t + period);
    const auto dt = cell_centres(0.0, pi, 15);
    const auto a = ncp_grid(model, t1, dt);
    const auto b = ncp_grid(model, shifted, dt);
    std::size_t positive = 0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        if (a.flags[k] != CellFlag::ok || b.flags[k] != CellFlag::ok) continue;
        EXPECT_NEAR(a.values[k], b.values[k], 1e-8);
        positive += a.values[k] > 0.0;
    }
    EXPECT_GT(positive, 0u);
}

TEST(Grid, ThreadCountDoesNotChangeValues)
{
    const auto model = damped_jc({5.0, 1.0});
    const auto t1 = cell_centres(0.5, 3.0, 10), dt = cell_centres(0.0, 4.0, 10);
    GridOptions one, many;
    one.jobs = 1;
    many.jobs = 4;
    const auto a = ncp_grid(model, t1, dt, one);
    const auto b = ncp_grid(model, t1, dt, many);
    EXPECT_EQ(a.values, b.values);
    EXPECT_EQ(a.flags, b.flags);
}

TEST(Grid, CompositionMatchesSerialReference)
{
    for (const auto& model : {damped_jc({5.0, 1.0}), spin_bath({3, 1.0}), dynamics::detuned_jc({0.3, 1.0, 6.0})}) {
        const auto t1 = cell_centres(0.0, 3.0, 9), dt = cell_centres(0.0, 4.0, 11);
        const auto fast = ncp_grid(model, t1, dt);
        const auto ref = ncp_grid_serial(model, t1, dt);
        EXPECT_EQ(fast.flags, ref.flags);
        for (std::size_t k = 0; k < fast.values.size(); ++k) {
            EXPECT_NEAR(fast.values[k], ref.values[k], 1e-9) << model.descriptor().family << " cell " << k;
        }
    }
}

TEST(Grid, RejectsBadAxes)
{
    const auto model = damped_jc({1.0, 1.0});
    EXPECT_THROW(ncp_grid(model, {1.0, 0.5}, {0.0, 1.0}), InvalidParams);
    EXPECT_THROW(ncp_grid(model, {0.5, 1.0}, {-1.0, 1.0}), InvalidParams);
}

TEST(Region, Examples)
{
    const auto r5 = representative_region(damped_jc({5.0, 1.0}));
    EXPECT_NEAR(r5.t1_hi - r5.t1_lo, 2 * pi / 3, 1e-12);
    EXPECT_EQ(r5.kind, RegionKind::truncated);
    const auto s4 = representative_region(spin_bath({4, 1.0}));
    EXPECT_NEAR(s4.t1_hi - s4.t1_lo, pi, 1e-12);
    EXPECT_EQ(s4.kind, RegionKind::periodic);
    EXPECT_THROW(representative_region(damped_jc({0.3, 1.0})), NotApplicable);
}

TEST(Estimate, RecomputableFromGrid)
{
    const auto model = spin_bath({1, 1.0});
    EstimateOptions opts;
    opts.resolution = 40;
    opts.max_refinements = 1;
    const auto e = nm_estimate(model, representative_region(model), opts);
    const auto again = nm_from_grid(e.grid);
    EXPECT_EQ(e.nm, again.nm);
    EXPECT_EQ(e.n_cells_positive, again.n_cells_positive);
    EXPECT_EQ(e.convergence.size(), e.resolutions.size());
    EXPECT_GT(e.nm, 0.0);
    EXPECT_LE(e.nm, e.max_ncp);
    EXPECT_GT(e.stats.steps, 0u);
}

TEST(Estimate, ZeroIffNoPositiveCell)
{
    NcpGrid g;
    g.t1_axis = {0.0, 1.0};
    g.dt_axis = {0.0, 1.0};
    g.values = {0.0, 0.0, 0.0, 0.0};
    g.flags.assign(4, CellFlag::ok);
    EXPECT_EQ(nm_from_grid(g).nm, 0.0);
    g.values[3] = 0.2;
    g.values[1] = pi / 2;
    g.flags[1] = CellFlag::singular_limit;
    g.values[2] = 0.4;
    g.flags[2] = CellFlag::skipped_guard; // excluded
    const auto e = nm_from_grid(g);
    EXPECT_DOUBLE_EQ(e.nm, 0.5 * (0.2 + pi / 2));
    EXPECT_EQ(e.n_cells_total, 3u);
    EXPECT_DOUBLE_EQ(e.support_fraction, 2.0 / 3.0);
}

TEST(Estimate, MarkovianRegionGivesZero)
{
    const auto model = damped_jc({0.3, 1.0});
    RepresentativeRegion r{0.0, 5.0, 0.0, 5.0, RegionKind::custom, ""};
    EstimateOptions opts;
    opts.resolution = 20;
    const auto e = nm_estimate(model, r, opts);
    EXPECT_EQ(e.nm, 0.0);
    EXPECT_TRUE(e.converged);
}

TEST(Estimate, RandomSamplerAgreesWithGrid)
{
    const auto model = spin_bath({1, 1.0});
    const auto region = representative_region(model);
    const auto a = nm_random_estimate(model, region, 400, 42);
    const auto b = nm_random_estimate(model, region, 400, 42);
    EXPECT_EQ(a.nm, b.nm);
    EstimateOptions opts;
    opts.resolution = 60;
    opts.refine = false;
    const auto grid = nm_estimate(model, region, opts);
    EXPECT_NEAR(a.nm, grid.nm, 0.15 * grid.nm);
    EXPECT_THROW(nm_random_estimate(model, region, 0, 1), InvalidParams);
}

TEST(Sweep, RecordsNotApplicableAsZeroAndErrors)
{
    EstimateOptions opts;
    opts.resolution = 30;
    opts.refine = false;
    const auto s = nm_sweep("damped_jc", "R", {0.3, 2.0, -1.0}, {{"lambda", 1.0}}, opts);
    ASSERT_EQ(s.points.size(), 3u);
    ASSERT_TRUE(s.points[0].estimate);
    EXPECT_EQ(s.points[0].estimate->nm, 0.0);
    EXPECT_EQ(s.points[0].estimate->region.kind, RegionKind::empty);
    ASSERT_TRUE(s.points[1].estimate);
    EXPECT_GT(s.points[1].estimate->nm, 0.0);
    EXPECT_FALSE(s.points[2].estimate);
    EXPECT_FALSE(s.points[2].error.empty());
    EXPECT_TRUE(s.nondecreasing);
    EXPECT_EQ(s.first_positive, 2.0);
}

TEST(Witness, TraceDistance)
{
    testgen::Gen gen(9);
    const DensityMatrix a(gen.density(2));
    EXPECT_NEAR(trace_distance(a, a), 0.0, 1e-15);
    const auto ground = DensityMatrix::pure({1.0, 0.0});
    const auto excited = DensityMatrix::pure({0.0, 1.0});
    EXPECT_NEAR(trace_distance(ground, excited), 1.0, 1e-15);
    EXPECT_THROW(trace_distance(ground, DensityMatrix(gen.density(3))), DimensionMismatch);
    EXPECT_THROW(DensityMatrix(ComplexMatrix::identity(2)), InvalidParams);
}

TEST(Witness, IncreaseIntervals)
{
    std::vector<WitnessSample> s{{0.0, 1.0, -1}, {1.0, 0.5, 1}, {2.0, 0.6, 1}, {3.0, 0.7, -1}, {4.0, 0.1, 1}, {5.0, 0.2, 0}};
    const auto iv = increase_intervals(s);
    ASSERT_EQ(iv.size(), 2u);
    EXPECT_EQ(iv[0], std::make_pair(1.0, 3.0));
    EXPECT_EQ(iv[1], std::make_pair(4.0, 5.0));
}

TEST(Witness, DampedRegimes)
{
    const auto grid = linspace(0.0, 10.0, 201);
    const auto markov = damped_jc({0.3, 1.0});
    const auto [r1, r2] = default_witness_pair(markov);
    EXPECT_TRUE(increase_intervals(blp_witness(markov, r1, r2, grid)).empty());
    const auto revivals = damped_jc({5.0, 1.0});
    const auto samples = blp_witness(revivals, r1, r2, grid);
    EXPECT_NEAR(samples.front().distance, 1.0, 1e-14);
    EXPECT_FALSE(increase_intervals(samples).empty());
}

TEST(Grid, PoleWithoutContinuationMarksCellsFailed)
{
    const TimeLocalModel model(2, {}, {{"z", qmat::pauli::z(), dynamics::tabulated({0.0, 2.0}, {1.0, -1.0})}},
                               {{1.0}, {}, 0.0}, "1", {"custom", {}, {}});
    const auto t1 = linspace(0.0, 0.5, 6), dt = linspace(0.0, 1.5, 7);
    const auto fast = ncp_grid(model, t1, dt);
    const auto ref = ncp_grid_serial(model, t1, dt);
    EXPECT_GT(fast.count(CellFlag::failed), 0u);
    EXPECT_EQ(fast.flags, ref.flags);
    for (std::size_t i = 0; i < t1.size(); ++i) {
        for (std::size_t j = 0; j < dt.size(); ++j) {
            if (t1[i] + dt[j] < 0.9) EXPECT_EQ(fast.flag(i, j), CellFlag::ok);
        }
    }
}
