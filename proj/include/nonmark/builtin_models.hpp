// builtin_models.hpp - damped and detuned Jaynes-Cummings, N-spin dephasing bath, closed-form oracles

#pragma once

#include <string>
#include <vector>

#include "nonmark/integrator.hpp"
#include "nonmark/model.hpp"

namespace nonmark::dynamics {

// ---- damped Jaynes-Cummings (Lorentzian reservoir, on resonance) ----

/// c(t) with c(0) = 1; the R = 1/2 point is handled by the d -> 0 limit.
cplx oracle_c_damped(const DampedJcParams& p, cplx t);
double oracle_c_damped(const DampedJcParams& p, double t);
cplx oracle_cdot_damped(const DampedJcParams& p, cplx t);

/// gamma(t) = -2 Re[c'/c]. Throws PoleAt on a zero of c.
double oracle_gamma_damped(const DampedJcParams& p, double t);

/// arctan((|c2|^2/|c1|^2 - 1)/2) when the ratio exceeds one, else 0.
/// Throws SingularPoint when c(t1) = 0 but c(t2) != 0.
double oracle_ncp_damped(const DampedJcParams& p, double t1, double t2);

/// Zeros of c for R > 1/2: first zero and spacing 2 pi / |d|.
SingularTimes damped_singular_times(const DampedJcParams& p);

// ---- detuned Jaynes-Cummings ----

/// Closed-form amplitude of the exponential-kernel equation
/// c' = -g, g' = kappa0 c - (lambda - i Delta) g with kappa0 = gamma0 lambda / 2.
cplx detuned_amplitude(const DetunedJcParams& p, double t);
cplx detuned_amplitude_rate(const DetunedJcParams& p, double t);

/// c(t) sampled on a uniform grid by integrating the local ODE pair.
struct SampledAmplitude {
    std::vector<double> t;
    std::vector<cplx> c;
    std::vector<cplx> cdot;

    /// Cubic Hermite interpolation between samples.
    cplx at(double time) const;
};

SampledAmplitude solve_c_detuned(const DetunedJcParams& p, double t_max, const ode::Tolerances& tol = {},
                                 std::size_t n_samples = 2001);

// ---- N-spin dephasing bath ----

double oracle_k_spinbath(const SpinBathParams& p, double t1, double t2);
double oracle_ncp_spinbath(const SpinBathParams& p, double t1, double t2);
/// (1/2)(|00><00| + |11><11| + k |00><11| + k |11><00|)
ComplexMatrix oracle_choi_spinbath(const SpinBathParams& p, double t1, double t2);
double spinbath_period(const SpinBathParams& p);
SingularTimes spinbath_singular_times(const SpinBathParams& p);

// ---- construction ----

TimeLocalModel damped_jc(const DampedJcParams& p);
TimeLocalModel detuned_jc(const DetunedJcParams& p);
TimeLocalModel spin_bath(const SpinBathParams& p);

/// By family name with parameters gamma0, lambda, delta, n_spins, coupling
/// (missing ones take defaults). Throws InvalidParams.
TimeLocalModel builtin_model(const std::string& name, const std::map<std::string, double>& params);
TimeLocalModel builtin_model(const BuiltinParams& params);

} // namespace nonmark::dynamics
