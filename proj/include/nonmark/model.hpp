// model.hpp - time-local master equations with sign-unrestricted rates

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nonmark/qmat.hpp"

namespace nonmark::dynamics {

using qmat::ComplexMatrix;
using qmat::cplx;

inline constexpr double kDefaultGuard = 1e-4;

/// Real-valued function of time, optionally with an analytic continuation to
/// complex time. Continuations let the propagator step around rate poles.
struct ScalarFunction {
    std::function<double(double)> on_real_axis;
    std::function<cplx(cplx)> continuation;

    double operator()(double t) const { return on_real_axis(t); }
    bool continuable() const noexcept { return static_cast<bool>(continuation); }

    static ScalarFunction constant(double value);
};

/// H(t) = sum_k coefficient_k(t) * op_k
struct HamiltonianTerm {
    ComplexMatrix op;
    ScalarFunction coefficient;
};

/// gamma(t) * (V rho V^dag - 1/2 {V^dag V, rho}); V is time-independent.
struct Channel {
    std::string label;
    ComplexMatrix jump;
    ScalarFunction rate;
};

/// Known times where some rate diverges: an explicit list plus an optional
/// arithmetic family first + n * period (n >= 0).
struct SingularTimes {
    std::vector<double> listed;
    std::optional<double> first;
    double period = 0.0;

    bool empty() const noexcept { return listed.empty() && !first; }
    std::vector<double> in_range(double lo, double hi) const;
    /// Singular time within `guard` of t, if any (closest one).
    std::optional<double> near(double t, double guard) const;
    /// Distance from ts to the closest other singular time (infinity if none).
    double isolation(double ts) const;
};

struct DampedJcParams {
    double gamma0 = 0.0;
    double lambda = 1.0;
    double ratio() const noexcept { return gamma0 / lambda; }
};

struct DetunedJcParams {
    double gamma0 = 0.0;
    double lambda = 1.0;
    double delta = 0.0;
};

struct SpinBathParams {
    int n_spins = 1;
    double coupling = 1.0;
};

using BuiltinParams = std::variant<std::monostate, DampedJcParams, DetunedJcParams, SpinBathParams>;

struct ModelDescriptor {
    std::string family; // damped_jc | detuned_jc | spin_bath | custom
    std::map<std::string, double> params;
    BuiltinParams builtin;
};

class TimeLocalModel {
public:
    TimeLocalModel(std::size_t dim, std::vector<HamiltonianTerm> hamiltonian, std::vector<Channel> channels,
                   SingularTimes singular_times, std::string time_unit, ModelDescriptor descriptor);

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<HamiltonianTerm>& hamiltonian_terms() const noexcept { return hamiltonian_; }
    const std::vector<Channel>& channels() const noexcept { return channels_; }
    const SingularTimes& singular_times() const noexcept { return singular_; }
    const std::string& time_unit() const noexcept { return time_unit_; }
    const ModelDescriptor& descriptor() const noexcept { return descriptor_; }

    ComplexMatrix hamiltonian(double t) const;

    /// True when every coefficient can be evaluated off the real axis.
    bool continuable() const noexcept;

    /// d^2 x d^2 superoperator pieces, one per Hamiltonian term then one per
    /// channel, so that L(t) = sum_k coefficient_k(t) * pieces()[k].
    const std::vector<ComplexMatrix>& pieces() const noexcept { return pieces_; }
    std::vector<double> coefficients(double t) const;
    std::vector<cplx> coefficients(cplx t) const;
    /// Allocation-free forms for integrator inner loops; out.size() == pieces().size().
    void coefficients(double t, std::span<cplx> out) const;
    void coefficients(cplx t, std::span<cplx> out) const;

    /// For a start time on a singular point t_s: does Ncp(t_s -> t2) diverge?
    /// Empty for models without an analytic verdict.
    std::function<bool(double ts, double t2)> limit_diverges;

private:
    std::size_t dim_;
    std::vector<HamiltonianTerm> hamiltonian_;
    std::vector<Channel> channels_;
    SingularTimes singular_;
    std::string time_unit_;
    ModelDescriptor descriptor_;
    std::vector<ComplexMatrix> pieces_;
};

/// L(t) rho in matrix form. Throws SingularTime inside a guard interval.
ComplexMatrix apply_generator(const TimeLocalModel& model, double t, const ComplexMatrix& rho,
                              double guard = kDefaultGuard);

/// Matrix of L(t) on column-stacked density matrices.
ComplexMatrix generator_superoperator(const TimeLocalModel& model, double t, double guard = kDefaultGuard);

/// The same master equation acting on system (x) ancilla, ops O -> O (x) I_d.
TimeLocalModel extend_with_ancilla(const TimeLocalModel& model);

} // namespace nonmark::dynamics
