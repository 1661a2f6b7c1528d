// qmat.hpp - dense complex matrices sized for small Hilbert spaces (d <= 4, d^2 <= 16)

#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace nonmark::qmat {

using cplx = std::complex<double>;

inline constexpr double kDefaultHermiticityTol = 1e-9;

/// Row-major dense complex matrix with value semantics.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return entries_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) noexcept { return entries_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return entries_[r * cols_ + c]; }

    std::span<cplx> data() noexcept { return entries_; }
    std::span<const cplx> data() const noexcept { return entries_; }

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    ComplexMatrix conj() const;
    cplx trace() const;
    double max_abs() const noexcept;
    bool all_finite() const noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(cplx s) noexcept;

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> entries_;
};

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double hermiticity_deviation(const ComplexMatrix& m);
ComplexMatrix hermitian_part(const ComplexMatrix& m);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

enum class Subsystem { A, B };

/// Reduced matrix of the kept factor of a (dim_a * dim_b)-dimensional operator.
ComplexMatrix partial_trace(const ComplexMatrix& m, std::size_t dim_a, std::size_t dim_b, Subsystem keep);

struct HermitianSpectrum {
    std::vector<double> eigenvalues; // ascending
    ComplexMatrix eigenvectors;      // columns, orthonormal
    double hermiticity_deviation = 0.0;
};

// The Hermiticity check is relative: ‖m − m†‖_max <= tol * max(1, ‖m‖_max).
// Input is symmetrized to (m + m†)/2 before diagonalization.
HermitianSpectrum hermitian_eig(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);
double min_eigenvalue(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);
double trace_norm(const ComplexMatrix& m, double hermiticity_tol = kDefaultHermiticityTol);

/// Column-stacking vectorization, vec(rho)[i + d*j] = rho(i, j).
std::vector<cplx> vec(const ComplexMatrix& m);
ComplexMatrix unvec(std::span<const cplx> v, std::size_t d);

ComplexMatrix ket_bra(std::size_t dim, std::size_t i, std::size_t j);

namespace pauli {
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
ComplexMatrix plus();  // sigma_+ = |1><0|, raises ground |0> to excited |1>
ComplexMatrix minus(); // sigma_- = |0><1|
} // namespace pauli

} // namespace nonmark::qmat
