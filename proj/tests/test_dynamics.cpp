// test_dynamics.cpp - generators, propagators, Choi states, built-in models

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nonmark/builtin_models.hpp"
#include "nonmark/errors.hpp"
#include "nonmark/model_io.hpp"
#include "nonmark/propagator.hpp"
#include "support/generators.hpp"

using namespace nonmark;
using namespace nonmark::dynamics;
using qmat::pauli::minus;
using qmat::pauli::z;

namespace {

constexpr double pi = std::numbers::pi;

TimeLocalModel dephasing(double gamma)
{
    return TimeLocalModel(2, {}, {{"z", z(), ScalarFunction::constant(gamma)}}, {}, "1", {"custom", {}, {}});
}

TimeLocalModel null_model() { return TimeLocalModel(2, {}, {}, {}, "1", {"custom", {}, {}}); }

ComplexMatrix plus_state()
{
    return ComplexMatrix{{0.5, 0.5}, {0.5, 0.5}};
}

// a time in [lo, hi] at least `margin` away from the model's singular times
double away_from_poles(testgen::Gen& gen, const TimeLocalModel& m, double lo, double hi, double margin = 1e-2)
{
    while (true) {
        const double t = gen.uniform(lo, hi);
        if (!m.singular_times().near(t, margin)) return t;
    }
}

// period of the model's dynamics, used to size random time windows
double time_scale(const TimeLocalModel& m)
{
    const auto& st = m.singular_times();
    return st.first ? st.period : 5.0;
}

std::vector<TimeLocalModel> random_models(testgen::Gen& gen)
{
    return {damped_jc(gen.damped()), detuned_jc(gen.detuned()), spin_bath(gen.spin())};
}

} // namespace

// ---- generator ----

TEST(Generator, NullModelGivesZero)
{
    testgen::Gen gen(1);
    const auto rho = gen.density(2);
    EXPECT_EQ(apply_generator(null_model(), 0.3, rho), ComplexMatrix(2, 2));
    EXPECT_EQ(generator_superoperator(null_model(), 0.3), ComplexMatrix(4, 4));
}

TEST(Generator, DephasingOnPlusState)
{
    // z rho z - rho on |+><+|
    const auto out = apply_generator(dephasing(1.0), 0.0, plus_state());
    const ComplexMatrix expected{{0.0, -1.0}, {-1.0, 0.0}};
    EXPECT_LE(qmat::max_abs_diff(out, expected), 1e-15);
}

TEST(Generator, DephasingSuperoperator)
{
    ComplexMatrix expected(4, 4);
    expected(1, 1) = expected(2, 2) = -2.0;
    EXPECT_LE(qmat::max_abs_diff(generator_superoperator(dephasing(1.0), 0.0), expected), 1e-15);
}

TEST(Generator, DampedOnExcitedState)
{
    const DampedJcParams p{5.0, 1.0};
    const auto model = damped_jc(p);
    const double t = 0.4;
    const double g = oracle_gamma_damped(p, t);
    const auto out = apply_generator(model, t, qmat::ket_bra(2, 1, 1));
    ComplexMatrix expected(2, 2);
    expected(0, 0) = g;
    expected(1, 1) = -g;
    EXPECT_LE(qmat::max_abs_diff(out, expected), 1e-12 * std::max(1.0, std::abs(g)));
}

TEST(Generator, SuperoperatorMatchesMatrixForm)
{
    testgen::Gen gen(2);
    for (int trial = 0; trial < 20; ++trial) {
        for (const auto& model : random_models(gen)) {
            const double t = away_from_poles(gen, model, 0.0, 2.0 * time_scale(model));
            const auto rho = gen.matrix(2, 2);
            const auto lhs = qmat::vec(apply_generator(model, t, rho));
            const auto l = generator_superoperator(model, t);
            const auto v = qmat::vec(rho);
            for (std::size_t r = 0; r < 4; ++r) {
                qmat::cplx acc{};
                for (std::size_t c = 0; c < 4; ++c) acc += l(r, c) * v[c];
                EXPECT_LE(std::abs(acc - lhs[r]), 1e-10 * std::max(1.0, l.max_abs()));
            }
            // traceless output
            const auto out = apply_generator(model, t, gen.density(2));
            EXPECT_LE(std::abs(out.trace()), 1e-12 * std::max(1.0, out.max_abs()));
        }
    }
}

TEST(Generator, LinearInChannels)
{
    const TimeLocalModel both(2, {}, {{"z", z(), ScalarFunction::constant(0.7)}, {"m", minus(), ScalarFunction::constant(1.1)}},
                              {}, "1", {"custom", {}, {}});
    const TimeLocalModel only_m(2, {}, {{"m", minus(), ScalarFunction::constant(1.1)}}, {}, "1", {"custom", {}, {}});
    const auto sum = generator_superoperator(dephasing(0.7), 0.0) + generator_superoperator(only_m, 0.0);
    EXPECT_LE(qmat::max_abs_diff(generator_superoperator(both, 0.0), sum), 1e-15);
}

TEST(Generator, GuardAndShape)
{
    const auto model = spin_bath({1, 1.0});
    EXPECT_THROW(apply_generator(model, pi / 4 + 1e-6, plus_state()), SingularTime);
    EXPECT_THROW(apply_generator(model, 0.1, ComplexMatrix(3, 3)), DimensionMismatch);
}

// ---- built-in models and oracles ----

TEST(DampedOracle, FirstZeroWhereTangentIsMinusThree)
{
    const DampedJcParams p{5.0, 1.0};
    // c(t) = e^{-t/2} [cos(3t/2) + sin(3t/2)/3]; bisect the bracket around its first zero
    auto c = [](double t) { return std::exp(-0.5 * t) * (std::cos(1.5 * t) + std::sin(1.5 * t) / 3.0); };
    double lo = 1.0, hi = 2.0;
    ASSERT_GT(c(lo), 0.0);
    ASSERT_LT(c(hi), 0.0);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (c(mid) > 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);
    EXPECT_NEAR(std::tan(1.5 * root), -3.0, 1e-9);
    EXPECT_NEAR(*damped_singular_times(p).first, root, 1e-12);
    EXPECT_NEAR(damped_singular_times(p).period, 2 * pi / 3, 1e-14);
    EXPECT_NEAR(oracle_c_damped(p, 0.0), 1.0, 1e-15);
    for (double t : {0.3, 1.0, 2.5, 4.0}) EXPECT_NEAR(oracle_c_damped(p, t), c(t), 1e-14);
    EXPECT_NEAR(oracle_c_damped(p, root), 0.0, 1e-14);
}

TEST(DampedOracle, MarkovianDecayIsMonotone)
{
    for (double r : {0.01, 0.1, 0.3, 0.49, 0.5}) {
        const DampedJcParams p{r, 1.0};
        double prev = 1.0;
        for (int i = 1; i <= 400; ++i) {
            const double t = 0.05 * i;
            const double c = std::abs(oracle_c_damped(p, t));
            EXPECT_LT(c, prev) << "R=" << r << " t=" << t;
            prev = c;
            EXPECT_GE(oracle_gamma_damped(p, t), 0.0);
        }
        EXPECT_TRUE(damped_singular_times(p).empty());
    }
}

TEST(DampedOracle, RateTurnsNegative)
{
    const DampedJcParams p{5.0, 1.0};
    EXPECT_EQ(oracle_gamma_damped(p, 0.0), 0.0);
    bool negative = false;
    for (int i = 1; i < 200; ++i) {
        const double t = 0.02 * i;
        if (!damped_singular_times(p).near(t, 1e-3) && oracle_gamma_damped(p, t) < 0.0) negative = true;
    }
    EXPECT_TRUE(negative);
    // the rounded zero is within an ulp of the pole
    EXPECT_GT(std::abs(oracle_gamma_damped(p, *damped_singular_times(p).first)), 1e10);
}

TEST(DampedOracle, NcpExamples)
{
    const DampedJcParams p{5.0, 1.0};
    EXPECT_EQ(oracle_ncp_damped(p, 0.7, 0.7), 0.0);
    EXPECT_EQ(oracle_ncp_damped({0.3, 1.0}, 0.5, 3.0), 0.0);
    // t1 just below the first zero, t2 at the next extremum of |c|
    const double ts = *damped_singular_times(p).first;
    EXPECT_GT(oracle_ncp_damped(p, ts - 1e-7, ts + 0.5 * pi / 3), 1.5);
    EXPECT_GT(oracle_ncp_damped(p, ts, ts + 0.5), pi / 2 - 1e-10);
}

TEST(SpinOracle, Examples)
{
    const SpinBathParams p{1, 1.0};
    EXPECT_NEAR(oracle_k_spinbath(p, pi / 3, 5 * pi / 12), std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(oracle_ncp_spinbath(p, pi / 3, 5 * pi / 12), std::atan((std::sqrt(3.0) - 1.0) / 2.0), 1e-12);
    EXPECT_NEAR(oracle_ncp_spinbath(p, pi / 3, 5 * pi / 12), 0.3509, 1e-4);
    EXPECT_GT(oracle_ncp_spinbath(p, pi / 4 - 1e-9, pi / 2), 1.57);
    for (double t2 : {0.1, 0.7, 2.0, 5.0}) EXPECT_EQ(oracle_ncp_spinbath(p, 0.0, t2), 0.0);

    const auto st = spinbath_singular_times(p);
    EXPECT_NEAR(*st.first, pi / 4, 1e-15);
    EXPECT_NEAR(*st.first + st.period, 3 * pi / 4, 1e-15);
    EXPECT_NEAR(spinbath_period({4, 1.0}), pi, 1e-14);
}

TEST(DetunedOracle, ZeroDetuningIsDamped)
{
    for (double r : {0.3, 5.0}) {
        const DampedJcParams d{r, 1.0};
        const DetunedJcParams q{r, 1.0, 0.0};
        const auto sampled = solve_c_detuned(q, 6.0);
        EXPECT_NEAR(std::abs(sampled.c.front() - 1.0), 0.0, 1e-15);
        EXPECT_NEAR(std::abs(sampled.cdot.front()), 0.0, 1e-15);
        const auto a = damped_jc(d), b = detuned_jc(q);
        for (double t : {0.2, 0.9, 1.7, 3.3, 5.5}) {
            EXPECT_NEAR(std::abs(sampled.at(t) - oracle_c_damped(d, t)), 0.0, 1e-8);
            if (a.singular_times().near(t, 1e-2)) continue;
            EXPECT_LE(qmat::max_abs_diff(generator_superoperator(a, t), generator_superoperator(b, t)), 1e-8);
        }
    }
}

TEST(DetunedOracle, ClosedFormMatchesOde)
{
    const DetunedJcParams q{0.3, 1.0, 10.0};
    const auto sampled = solve_c_detuned(q, 20.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < sampled.t.size(); ++i) {
        worst = std::max(worst, std::abs(sampled.c[i] - detuned_amplitude(q, sampled.t[i])));
    }
    EXPECT_LE(worst, 1e-8);
    // small revivals: |c| is not monotone
    bool rises = false;
    for (std::size_t i = 1; i < sampled.t.size(); ++i) {
        if (std::abs(sampled.c[i]) > std::abs(sampled.c[i - 1]) + 1e-12) rises = true;
    }
    EXPECT_TRUE(rises);
}

TEST(BuiltinModel, ByName)
{
    const auto m = builtin_model("damped_jc", {{"gamma0", 5.0}, {"lambda", 1.0}});
    EXPECT_EQ(m.descriptor().family, "damped_jc");
    EXPECT_FALSE(m.singular_times().empty());
    EXPECT_TRUE(builtin_model("damped_jc", {{"gamma0", 0.3}}).singular_times().empty());
    EXPECT_THROW(builtin_model("nope", {}), InvalidParams);
    EXPECT_THROW(builtin_model("spin_bath", {{"n_spins", 0.0}}), InvalidParams);
    EXPECT_THROW(builtin_model("spin_bath", {{"n_spins", 1.5}}), InvalidParams);
    EXPECT_THROW(builtin_model("damped_jc", {{"gamma0", 1.0}, {"lambda", -1.0}}), InvalidParams);
}

// ---- propagation ----

TEST(Propagate, EmptyIntervalIsIdentity)
{
    const auto model = damped_jc({5.0, 1.0});
    const auto p = propagate(model, 0.8, 0.8);
    EXPECT_EQ(p.matrix, ComplexMatrix::identity(4));
    const auto choi = choi_of_interval(model, 0.8, 0.8);
    EXPECT_LE(qmat::max_abs_diff(choi.matrix, maximally_entangled(2)), 1e-15);
}

TEST(Propagate, DampedExcitedPopulation)
{
    testgen::Gen gen(3);
    for (double r : {0.1, 0.3, 0.45}) {
        const DampedJcParams p{r, 1.0};
        const auto model = damped_jc(p);
        for (int trial = 0; trial < 5; ++trial) {
            const double t1 = gen.uniform(0.0, 5.0), t2 = t1 + gen.uniform(0.0, 5.0);
            const double ratio = std::norm(oracle_c_damped(p, t2) / oracle_c_damped(p, t1));
            // vec index of |1><1| is 1 + 2*1
            EXPECT_NEAR(propagate(model, t1, t2).matrix(3, 3).real(), ratio, 1e-10);
        }
    }
}

TEST(Propagate, SpinCoherenceRatio)
{
    const auto model = spin_bath({1, 1.0});
    for (auto [t1, t2] : {std::pair{0.1, 0.5}, {0.2, 2.0}, {1.0, 1.2}, {pi / 3, 5 * pi / 12}}) {
        const auto phi = propagate(model, t1, t2).matrix;
        const double k = std::cos(2 * t2) / std::cos(2 * t1);
        EXPECT_NEAR(std::abs(phi(1, 1) - k), 0.0, 1e-9 * std::max(1.0, std::abs(k)));
        EXPECT_NEAR(std::abs(phi(2, 2) - k), 0.0, 1e-9 * std::max(1.0, std::abs(k)));
    }
}

TEST(Propagate, ChoiMatchesSpinOracle)
{
    for (int n : {1, 3}) {
        const SpinBathParams p{n, 1.0};
        const auto model = spin_bath(p);
        for (auto [t1, t2] : {std::pair{0.05, 0.9}, {0.3, 2.2}, {1.3, 1.9}}) {
            const auto choi = choi_of_interval(model, t1, t2);
            const auto oracle = oracle_choi_spinbath(p, t1, t2);
            EXPECT_LE(qmat::max_abs_diff(choi.matrix, oracle), 1e-8) << "N=" << n << " t1=" << t1;
        }
    }
}

TEST(Propagate, RayMatchesSinglePropagations)
{
    const auto model = damped_jc({5.0, 1.0});
    const std::vector<double> t2{0.5, 1.0, 1.5, 2.5, 3.0};
    const auto ray = propagate_ray(model, 0.3, t2);
    ASSERT_EQ(ray.maps.size(), t2.size());
    for (std::size_t j = 0; j < t2.size(); ++j) {
        ASSERT_TRUE(ray.maps[j]);
        EXPECT_LE(qmat::max_abs_diff(*ray.maps[j], propagate(model, 0.3, t2[j]).matrix), 1e-9);
    }
}

TEST(Propagate, Errors)
{
    const auto model = spin_bath({1, 1.0});
    EXPECT_THROW(propagate(model, 0.5, 0.2), InvalidParams);
    EXPECT_THROW(propagate(model, pi / 4, 1.0), SingularTime);
    EXPECT_THROW(propagate(model, 0.1, pi / 4 + 1e-5), SingularTime);
}

TEST(Propagate, CustomPoleWithoutContinuationUnderflows)
{
    const TimeLocalModel model(2, {}, {{"z", z(), tabulated({0.0, 2.0}, {1.0, -1.0})}}, {{1.0}, {}, 0.0}, "1",
                               {"custom", {}, {}});
    EXPECT_NO_THROW(propagate(model, 0.0, 0.9));
    EXPECT_THROW(propagate(model, 0.5, 1.5), StepSizeUnderflow);
}

// ---- invariants over random models ----

TEST(Invariants, CompositionTraceAndPartialTrace)
{
    testgen::Gen gen(4);
    for (int trial = 0; trial < 6; ++trial) {
        for (const auto& model : random_models(gen)) {
            const double scale = time_scale(model);
            double t[3];
            for (auto& ti : t) ti = away_from_poles(gen, model, 0.0, 2.0 * scale);
            std::sort(std::begin(t), std::end(t));
            const auto a = propagate(model, t[0], t[1]).matrix;
            const auto b = propagate(model, t[1], t[2]).matrix;
            const auto full = propagate(model, t[0], t[2]).matrix;
            EXPECT_LE(qmat::max_abs_diff(b * a, full), 1e-7 * std::max(1.0, full.max_abs()));

            const auto choi = choi_of_interval(model, t[0], t[2]);
            EXPECT_LE(qmat::hermiticity_deviation(choi.matrix), 1e-9 * std::max(1.0, choi.matrix.max_abs()));
            EXPECT_NEAR(std::abs(choi.matrix.trace() - 1.0), 0.0, 1e-9);
            const auto reduced = qmat::partial_trace(choi.matrix, 2, 2, qmat::Subsystem::B);
            EXPECT_LE(qmat::max_abs_diff(reduced, 0.5 * ComplexMatrix::identity(2)), 1e-8);

            // maps from the initial time are completely positive
            const auto from_zero = choi_of_interval(model, 0.0, t[2]);
            EXPECT_GE(qmat::min_eigenvalue(from_zero.matrix), -1e-7);
        }
    }
}

TEST(Invariants, AncillaMatchesReshuffle)
{
    testgen::Gen gen(5);
    for (int trial = 0; trial < 4; ++trial) {
        for (const auto& model : random_models(gen)) {
            const double scale = time_scale(model);
            const double t1 = away_from_poles(gen, model, 0.0, scale);
            const double t2 = away_from_poles(gen, model, t1, t1 + scale);
            const auto direct = choi_of_interval(model, t1, t2);
            const auto ancilla = choi_via_ancilla(model, t1, t2);
            EXPECT_LE(qmat::max_abs_diff(direct.matrix, ancilla.matrix), 1e-8 * std::max(1.0, direct.matrix.max_abs()));
        }
    }
    EXPECT_EQ(extend_with_ancilla(damped_jc({1.0, 1.0})).dim(), 4u);
}

// ---- JSON model files ----

TEST(ModelIo, BuiltinForm)
{
    const auto j = nlohmann::json::parse(R"({"model": "damped_jc", "params": {"gamma0": 5.0, "lambda": 1.0}})");
    const auto m = model_from_json(j);
    EXPECT_LE(qmat::max_abs_diff(generator_superoperator(m, 0.4), generator_superoperator(damped_jc({5.0, 1.0}), 0.4)),
              0.0);
    EXPECT_EQ(descriptor_to_json(m.descriptor())["params"]["gamma0"], 5.0);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"params": {}})")), ConfigError);
    EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"model": "spin_bath", "params": {"n_spins": "x"}})")),
                 ConfigError);
}

TEST(ModelIo, CustomForm)
{
    const auto j = nlohmann::json::parse(R"({
        "model": "custom", "dim": 2, "time_unit": "ns",
        "hamiltonian": [{"op": [[1, 0], [0, -1]], "coefficient": 0.5}],
        "channels": [{"label": "deph", "jump": [[1, 0], [0, -1]], "rate": [[0, 1.0], [2, 3.0]]}],
        "singular_times": []
    })");
    const auto m = model_from_json(j);
    EXPECT_EQ(m.dim(), 2u);
    EXPECT_EQ(m.time_unit(), "ns");
    EXPECT_EQ(m.channels()[0].label, "deph");
    EXPECT_DOUBLE_EQ(m.channels()[0].rate(1.0), 2.0);
    EXPECT_DOUBLE_EQ(m.channels()[0].rate(5.0), 3.0);
    EXPECT_DOUBLE_EQ(m.channels()[0].rate(-1.0), 1.0);
    // coherence decays as exp(-2 * integral of the rate); phase from H
    const double integral = 1.0 + 0.5 * 1.0 * 1.0; // rate 1 + t over [0, 1]
    const auto phi = propagate(m, 0.0, 1.0).matrix;
    EXPECT_NEAR(std::abs(phi(2, 2)), std::exp(-2.0 * integral), 1e-10);

    const auto complex_entry = nlohmann::json::parse(R"([[0, [0, -1]], [[0, 1], 0]])");
    EXPECT_LE(qmat::max_abs_diff(matrix_from_json(complex_entry), qmat::pauli::y()), 0.0);
    EXPECT_THROW(matrix_from_json(nlohmann::json::parse("[[1, 0], [0]]")), ConfigError);
    EXPECT_THROW(tabulated({0.0, 0.0}, {1.0, 2.0}), InvalidParams);
    EXPECT_THROW(load_model("/nonexistent/model.json"), ConfigError);
}
