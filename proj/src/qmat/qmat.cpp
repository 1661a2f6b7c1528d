// qmat.cpp - dense complex matrix primitives; eigensolves delegate to Eigen's self-adjoint solver

#include "nonmark/qmat.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "nonmark/errors.hpp"

namespace nonmark::qmat {

namespace {

using EigenMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch(std::string(what) + ": shapes " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
    }
}

// Validates, symmetrizes and copies into an Eigen matrix.
EigenMatrix prepare_hermitian(const ComplexMatrix& m, double tol, double& deviation)
{
    if (!m.is_square()) {
        throw NotSquare("hermitian_eig: " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    deviation = hermiticity_deviation(m);
    if (!(deviation <= tol * std::max(1.0, m.max_abs()))) {
        throw NotHermitian(deviation);
    }
    const auto n = static_cast<Eigen::Index>(m.rows());
    EigenMatrix out(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto ur = static_cast<std::size_t>(r);
            const auto uc = static_cast<std::size_t>(c);
            out(r, c) = 0.5 * (m(ur, uc) + std::conj(m(uc, ur)));
        }
    }
    return out;
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, cplx{0.0, 0.0})
{
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries))
{
    if (entries_.size() != rows_ * cols_) {
        throw DimensionMismatch("ComplexMatrix: entry count does not match shape");
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw DimensionMismatch("ComplexMatrix: ragged initializer");
        }
        entries_.insert(entries_.end(), row.begin(), row.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n)
{
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

ComplexMatrix ComplexMatrix::adjoint() const
{
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
}

ComplexMatrix ComplexMatrix::transpose() const
{
    ComplexMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

ComplexMatrix ComplexMatrix::conj() const
{
    ComplexMatrix out = *this;
    for (auto& z : out.entries_) z = std::conj(z);
    return out;
}

cplx ComplexMatrix::trace() const
{
    if (!is_square()) throw NotSquare("trace of non-square matrix");
    cplx tr = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) tr += (*this)(i, i);
    return tr;
}

double ComplexMatrix::max_abs() const noexcept
{
    double best = 0.0;
    for (const auto& z : entries_) best = std::max(best, std::abs(z));
    return best;
}

bool ComplexMatrix::all_finite() const noexcept
{
    return std::all_of(entries_.begin(), entries_.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs)
{
    require_same_shape(*this, rhs, "operator+");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += rhs.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs)
{
    require_same_shape(*this, rhs, "operator-");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] -= rhs.entries_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) noexcept
{
    for (auto& z : entries_) z *= s;
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b)
{
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matrix product: inner dimensions differ");
    }
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const cplx ark = a(r, k);
            if (ark == cplx{}) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
        }
    }
    return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b)
{
    require_same_shape(a, b, "max_abs_diff");
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a.data()[i] - b.data()[i]));
    return best;
}

double hermiticity_deviation(const ComplexMatrix& m)
{
    if (!m.is_square()) throw NotSquare("hermiticity_deviation");
    double best = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = r; c < m.cols(); ++c) best = std::max(best, std::abs(m(r, c) - std::conj(m(c, r))));
    return best;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m)
{
    return 0.5 * (m + m.adjoint());
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            const cplx s = a(ar, ac);
            if (s == cplx{}) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
        }
    return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep)
{
    if (!m.is_square() || m.rows() != dim_a * dim_b) {
        throw DimensionMismatch("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected " + std::to_string(dim_a * dim_b));
    }
    if (keep == Subsystem::A) {
        ComplexMatrix out(dim_a, dim_a);
        for (std::size_t i = 0; i < dim_a; ++i)
            for (std::size_t j = 0; j < dim_a; ++j)
                for (std::size_t k = 0; k < dim_b; ++k) out(i, j) += m(i * dim_b + k, j * dim_b + k);
        return out;
    }
    ComplexMatrix out(dim_b, dim_b);
    for (std::size_t i = 0; i < dim_b; ++i)
        for (std::size_t j = 0; j < dim_b; ++j)
            for (std::size_t k = 0; k < dim_a; ++k) out(i, j) += m(k * dim_b + i, k * dim_b + j);
    return out;
}

HermitianSpectrum hermitian_eig(const ComplexMatrix& m, double hermiticity_tol)
{
    HermitianSpectrum out;
    const EigenMatrix h = prepare_hermitian(m, hermiticity_tol, out.hermiticity_deviation);
    Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(h, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw Error("hermitian_eig: eigensolver did not converge");
    }
    const auto n = m.rows();
    out.eigenvalues.resize(n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.eigenvalues[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        for (std::size_t r = 0; r < n; ++r) {
            out.eigenvectors(r, i) = solver.eigenvectors()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i));
        }
    }
    return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m, double hermiticity_tol)
{
    double deviation = 0.0;
    const EigenMatrix h = prepare_hermitian(m, hermiticity_tol, deviation);
    Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw Error("hermitian_eigenvalues: eigensolver did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double min_eigenvalue(const ComplexMatrix& m, double hermiticity_tol)
{
    const auto ev = hermitian_eigenvalues(m, hermiticity_tol);
    return ev.empty() ? 0.0 : ev.front();
}

double trace_norm(const ComplexMatrix& m, double hermiticity_tol)
{
    double sum = 0.0;
    for (double e : hermitian_eigenvalues(m, hermiticity_tol)) sum += std::abs(e);
    return sum;
}

std::vector<cplx> vec(const ComplexMatrix& m)
{
    std::vector<cplx> out(m.size());
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) out[i + m.rows() * j] = m(i, j);
    return out;
}

ComplexMatrix unvec(std::span<const cplx> v, std::size_t d)
{
    if (v.size() != d * d) throw DimensionMismatch("unvec: length is not d^2");
    ComplexMatrix out(d, d);
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < d; ++i) out(i, j) = v[i + d * j];
    return out;
}

ComplexMatrix ket_bra(std::size_t dim, std::size_t i, std::size_t j)
{
    if (i >= dim || j >= dim) throw DimensionMismatch("ket_bra: index out of range");
    ComplexMatrix out(dim, dim);
    out(i, j) = 1.0;
    return out;
}

namespace pauli {

ComplexMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix y() { return {{0.0, cplx{0.0, -1.0}}, {cplx{0.0, 1.0}, 0.0}}; }
ComplexMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
ComplexMatrix plus() { return {{0.0, 0.0}, {1.0, 0.0}}; }
ComplexMatrix minus() { return {{0.0, 1.0}, {0.0, 0.0}}; }

} // namespace pauli

} // namespace nonmark::qmat
