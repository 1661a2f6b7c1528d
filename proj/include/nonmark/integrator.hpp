// integrator.hpp - adaptive Dormand-Prince 8(5,3) integrator for complex linear-ODE states

#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nonmark::ode {

using cplx = std::complex<double>;

/// Per-component error scale is atol + rtol * max(|y_old|, |y_new|).
///
/// The default absolute tolerance is tiny on purpose: propagator entries can
/// pass close to zero near a singular rate and regrow afterwards, so they
/// need relative accuracy at every magnitude.
struct Tolerances {
    double rtol = 1e-14;
    double atol = 1e-30;
    std::size_t max_steps = 2'000'000;
};

struct Stats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double max_error_estimate = 0.0; // largest accepted scaled error norm (<= 1)

    Stats& operator+=(const Stats& o)
    {
        steps += o.steps;
        rejected += o.rejected;
        rhs_evals += o.rhs_evals;
        max_error_estimate = std::max(max_error_estimate, o.max_error_estimate);
        return *this;
    }
};

using Rhs = std::function<void(double s, std::span<const cplx> y, std::span<cplx> dyds)>;
using SampleSink = std::function<void(std::size_t index, std::span<const cplx> y)>;

class Dop853 {
public:
    explicit Dop853(std::size_t n);

    std::size_t dimension() const noexcept { return n_; }

    /// Advances y from s0 to s1 (s1 >= s0). For each sample point (ascending,
    /// inside [s0, s1]) the dense-output state is passed to `sink` with the
    /// sample's index. Throws StepSizeUnderflow or ToleranceNotMet.
    Stats integrate(const Rhs& f, double s0, double s1, std::span<cplx> y, const Tolerances& tol,
                    std::span<const double> samples = {}, const SampleSink& sink = {});

private:
    double initial_step(const Rhs& f, double s0, double span, std::span<const cplx> y, const Tolerances& tol);
    void prepare_dense(const Rhs& f, double s, double h);
    void interpolate(double theta, std::span<cplx> out) const;

    std::size_t n_;
    std::vector<cplx> y0_, y1_, yw_, f0_, f1_;
    std::vector<std::vector<cplx>> k_; // stage slopes k_[1] .. k_[16]
    std::vector<std::vector<cplx>> cont_;
    std::size_t rhs_evals_ = 0;
};

} // namespace nonmark::ode
