// propagator.hpp - two-time propagators Λ(t2,t1) and their Choi states

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nonmark/integrator.hpp"
#include "nonmark/model.hpp"

namespace nonmark::dynamics {

struct PropagationOptions {
    ode::Tolerances tol;
    double guard = kDefaultGuard; // half-width around each singular time
};

/// d^2 x d^2 matrix acting on column-stacked density matrices.
struct PropagatorMatrix {
    std::size_t dim = 0;
    double t1 = 0.0;
    double t2 = 0.0;
    ComplexMatrix matrix;
    ode::Stats stats;
};

/// Normalized Choi state (Λ (x) I)|phi><phi|, system factor first.
struct ChoiMatrix {
    std::size_t dim = 0;
    double t1 = 0.0;
    double t2 = 0.0;
    ComplexMatrix matrix;
};

/// Integrates dPhi/dt = L(t) Phi from Phi(t1) = I.
///
/// Singular times strictly between t1 and t2 are passed on a half-circle of
/// radius `guard` in the upper half plane, which needs the model's analytic
/// continuation; without one this throws StepSizeUnderflow. Endpoints inside
/// a guard interval throw SingularTime.
PropagatorMatrix propagate(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts = {});

/// Row-major d^2 x d^2 propagator handed to a sink together with its sample index.
using MapSink = std::function<void(std::size_t index, std::span<const cplx> phi)>;

/// One integration from t1 emitting Λ(t2_j, t1) for ascending samples t2_j >= t1.
/// Samples inside a guard interval are not emitted. Without an analytic
/// continuation, samples before the first pole are emitted and then
/// StepSizeUnderflow is thrown.
ode::Stats propagate_with(const TimeLocalModel& model, double t1, std::span<const double> t2,
                          const PropagationOptions& opts, const MapSink& sink);

struct Ray {
    std::vector<std::optional<ComplexMatrix>> maps; // empty where t2 falls inside a guard
    ode::Stats stats;
};

/// Λ(t2_j, t1) for ascending t2 samples (all >= t1) from one integration.
Ray propagate_ray(const TimeLocalModel& model, double t1, std::span<const double> t2, const PropagationOptions& opts = {});

ComplexMatrix reshuffle(const ComplexMatrix& superop, std::size_t d);
ChoiMatrix choi_from_propagator(const PropagatorMatrix& p);
ChoiMatrix choi_of_interval(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts = {});

/// |phi><phi| with |phi> = sum_i |i>|i> / sqrt(d).
ComplexMatrix maximally_entangled(std::size_t d);

/// Evolves a density matrix with the generator in matrix form (no
/// superoperator), along the same path as propagate.
ComplexMatrix evolve_state(const TimeLocalModel& model, const ComplexMatrix& rho, double t1, double t2,
                           const PropagationOptions& opts = {});

/// Choi state obtained by evolving system (x) ancilla from |phi><phi|.
ChoiMatrix choi_via_ancilla(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts = {});

} // namespace nonmark::dynamics
