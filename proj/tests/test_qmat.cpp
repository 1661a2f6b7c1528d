// test_qmat.cpp - matrix primitives

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "nonmark/errors.hpp"
#include "nonmark/qmat.hpp"
#include "support/generators.hpp"

using namespace nonmark;
using namespace nonmark::qmat;

namespace {

// Choi matrix of a dephasing map with coherence factor k.
ComplexMatrix dephasing_choi(double k)
{
    ComplexMatrix m(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    m(0, 3) = m(3, 0) = 0.5 * k;
    return m;
}

ComplexMatrix bell_projector()
{
    ComplexMatrix m(4, 4);
    for (std::size_t a : {0u, 3u})
        for (std::size_t b : {0u, 3u}) m(a, b) = 0.5;
    return m;
}

} // namespace

TEST(HermitianEig, IdentityAndPauliZ)
{
    const auto id = hermitian_eigenvalues(ComplexMatrix::identity(2));
    EXPECT_DOUBLE_EQ(id[0], 1.0);
    EXPECT_DOUBLE_EQ(id[1], 1.0);
    const auto z = hermitian_eigenvalues(pauli::z());
    EXPECT_DOUBLE_EQ(z[0], -1.0);
    EXPECT_DOUBLE_EQ(z[1], 1.0);
}

TEST(HermitianEig, DephasingChoiWithK2)
{
    // block {{0.5, 1}, {1, 0.5}}: characteristic polynomial (0.5 - x)^2 - 1 = 0
    const double lo = 0.5 - 1.0, hi = 0.5 + 1.0;
    const auto ev = hermitian_eigenvalues(dephasing_choi(2.0));
    ASSERT_EQ(ev.size(), 4u);
    EXPECT_NEAR(ev[0], lo, 1e-14);
    EXPECT_NEAR(ev[1], 0.0, 1e-14);
    EXPECT_NEAR(ev[2], 0.0, 1e-14);
    EXPECT_NEAR(ev[3], hi, 1e-14);
}

TEST(HermitianEig, Reconstructs)
{
    testgen::Gen gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = static_cast<std::size_t>(gen.integer(1, 8));
        const auto m = gen.hermitian(d);
        const auto s = hermitian_eig(m);
        ComplexMatrix lam(d, d);
        for (std::size_t i = 0; i < d; ++i) lam(i, i) = s.eigenvalues[i];
        const auto back = s.eigenvectors * lam * s.eigenvectors.adjoint();
        EXPECT_LE(max_abs_diff(back, m), 1e-10 * m.max_abs());
        EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    }
}

TEST(HermitianEig, TraceAndOrthonormality)
{
    testgen::Gen gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = static_cast<std::size_t>(gen.integer(1, 8));
        const auto m = gen.hermitian(d);
        const auto s = hermitian_eig(m);
        double sum = 0.0;
        for (double e : s.eigenvalues) sum += e;
        EXPECT_NEAR(sum, m.trace().real(), 1e-10);
        const auto gram = s.eigenvectors.adjoint() * s.eigenvectors;
        EXPECT_LE(max_abs_diff(gram, ComplexMatrix::identity(d)), 1e-10);
    }
}

TEST(HermitianEig, Deterministic)
{
    testgen::Gen gen(13);
    const auto m = gen.hermitian(4);
    const auto a = hermitian_eig(m);
    const auto b = hermitian_eig(m);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
    EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(HermitianEig, Errors)
{
    EXPECT_THROW(hermitian_eig(ComplexMatrix(2, 3)), NotSquare);
    EXPECT_THROW(hermitian_eig(pauli::minus()), NotHermitian);
    try {
        hermitian_eig(pauli::minus());
    } catch (const NotHermitian& e) {
        EXPECT_NEAR(e.deviation, 1.0, 1e-15);
    }
    // drift below the tolerance is symmetrized away
    auto z = pauli::z();
    z(0, 1) = 1e-12;
    EXPECT_NO_THROW(hermitian_eig(z));
}

TEST(Kron, Examples)
{
    const auto zi = kron(pauli::z(), ComplexMatrix::identity(2));
    ComplexMatrix expected(4, 4);
    expected(0, 0) = expected(1, 1) = 1.0;
    expected(2, 2) = expected(3, 3) = -1.0;
    EXPECT_EQ(zi, expected);

    testgen::Gen gen(21);
    const auto m = gen.matrix(3, 2);
    EXPECT_EQ(kron(ComplexMatrix::identity(1), m), m);

    const auto k = kron(ket_bra(2, 0, 1), ket_bra(2, 0, 1));
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(k(r, c), (r == 0 && c == 3) ? cplx{1.0} : cplx{});
}

TEST(Kron, Associative)
{
    testgen::Gen gen(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = gen.matrix(static_cast<std::size_t>(gen.integer(1, 3)), static_cast<std::size_t>(gen.integer(1, 3)));
        const auto b = gen.matrix(static_cast<std::size_t>(gen.integer(1, 3)), static_cast<std::size_t>(gen.integer(1, 3)));
        const auto c = gen.matrix(static_cast<std::size_t>(gen.integer(1, 3)), static_cast<std::size_t>(gen.integer(1, 3)));
        const auto left = kron(kron(a, b), c);
        const auto right = kron(a, kron(b, c));
        ASSERT_EQ(left.rows(), right.rows());
        // each entry is a product of three factors in both groupings
        EXPECT_LE(max_abs_diff(left, right), 1e-14 * std::max(1.0, left.max_abs()));
    }
}

TEST(PartialTrace, Examples)
{
    const auto half = 0.5 * ComplexMatrix::identity(2);
    EXPECT_LE(max_abs_diff(partial_trace(bell_projector(), 2, 2, Subsystem::A), half), 1e-15);
    EXPECT_LE(max_abs_diff(partial_trace(bell_projector(), 2, 2, Subsystem::B), half), 1e-15);
    EXPECT_LE(max_abs_diff(partial_trace(dephasing_choi(0.3), 2, 2, Subsystem::A), half), 1e-15);

    testgen::Gen gen(31);
    const auto ra = gen.density(2), rb = gen.density(3);
    EXPECT_LE(max_abs_diff(partial_trace(kron(ra, rb), 2, 3, Subsystem::A), ra), 1e-14);
    EXPECT_LE(max_abs_diff(partial_trace(kron(ra, rb), 2, 3, Subsystem::B), rb), 1e-14);
}

TEST(PartialTrace, OfKronIsScaledFactor)
{
    testgen::Gen gen(32);
    for (int trial = 0; trial < 50; ++trial) {
        const auto da = static_cast<std::size_t>(gen.integer(1, 4));
        const auto db = static_cast<std::size_t>(gen.integer(1, 4));
        const auto a = gen.matrix(da, da), b = gen.matrix(db, db);
        EXPECT_LE(max_abs_diff(partial_trace(kron(a, b), da, db, Subsystem::A), b.trace() * a), 1e-12);
    }
}

TEST(PartialTrace, PreservesTrace)
{
    testgen::Gen gen(33);
    const auto m = gen.matrix(6, 6);
    EXPECT_NEAR(std::abs(partial_trace(m, 2, 3, Subsystem::A).trace() - m.trace()), 0.0, 1e-13);
    EXPECT_THROW(partial_trace(m, 2, 2, Subsystem::A), DimensionMismatch);
}

TEST(MinEigenvalue, Examples)
{
    EXPECT_NEAR(min_eigenvalue(bell_projector()), 0.0, 1e-15);
    EXPECT_NEAR(min_eigenvalue(pauli::x()), -1.0, 1e-15);
    EXPECT_NEAR(min_eigenvalue(dephasing_choi(2.0)), -0.5, 1e-14);
    EXPECT_THROW(min_eigenvalue(pauli::plus()), NotHermitian);
}

TEST(TraceNorm, PauliAndDensity)
{
    EXPECT_NEAR(trace_norm(pauli::x()), 2.0, 1e-14);
    testgen::Gen gen(41);
    EXPECT_NEAR(trace_norm(gen.density(3)), 1.0, 1e-13);
}

TEST(Vec, ColumnStacking)
{
    ComplexMatrix m{{1.0, 2.0}, {3.0, 4.0}};
    const auto v = vec(m);
    ASSERT_EQ(v.size(), 4u);
    EXPECT_EQ(v[1], cplx{3.0}); // (1, 0)
    EXPECT_EQ(v[2], cplx{2.0}); // (0, 1)
    EXPECT_EQ(unvec(v, 2), m);
}

TEST(ComplexMatrix, ShapeChecks)
{
    EXPECT_THROW(ComplexMatrix(2, 2, std::vector<cplx>(3)), DimensionMismatch);
    EXPECT_THROW(ComplexMatrix(2, 2) * ComplexMatrix(3, 3), DimensionMismatch);
    EXPECT_THROW(ComplexMatrix(2, 2) + ComplexMatrix(2, 3), DimensionMismatch);
    EXPECT_THROW(ComplexMatrix(2, 3).trace(), NotSquare);
}
