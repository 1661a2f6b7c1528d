// builtin_models.cpp - the three reference models and their closed forms

#include "nonmark/builtin_models.hpp"

#include <cmath>
#include <numbers>

#include "nonmark/errors.hpp"

namespace nonmark::dynamics {

namespace {

// sinh(x)/x, with the series near the origin so that the d -> 0 limit is smooth.
cplx sinhc(cplx x)
{
    if (std::abs(x) < 1e-3) {
        const cplx x2 = x * x;
        return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sinh(x) / x;
}

// Amplitude obeying c'' + a c' + kappa0 c = 0, c(0) = 1, c'(0) = 0. Both
// Jaynes-Cummings variants are of this form (a = lambda - i Delta).
struct Modal {
    Modal(cplx a_, double kappa0_) : a(a_), kappa0(kappa0_), dd(std::sqrt(a_ * a_ - 4.0 * kappa0_)) {}

    cplx a;
    double kappa0;
    cplx dd; // discriminant root; c is even in it, so the branch does not matter

    cplx disc() const { return dd; }

    cplx c(cplx t) const
    {
        const cplx x = disc() * t / 2.0;
        return std::exp(-a * t / 2.0) * (std::cosh(x) + (a * t / 2.0) * sinhc(x));
    }

    cplx cdot(cplx t) const
    {
        const cplx x = disc() * t / 2.0;
        return -2.0 * kappa0 * std::exp(-a * t / 2.0) * (t / 2.0) * sinhc(x);
    }

    // c'/c without the common exponential, so long times do not underflow.
    cplx log_rate(cplx t) const
    {
        const cplx dd = disc();
        const cplx x = dd * t / 2.0;
        if (std::abs(x.real()) > 20.0) {
            const cplx th = std::tanh(x);
            return -2.0 * kappa0 * th / (dd + a * th);
        }
        const cplx s = (t / 2.0) * sinhc(x);
        return -2.0 * kappa0 * s / (std::cosh(x) + a * s);
    }
};

Modal modal(const DampedJcParams& p) { return {cplx{p.lambda, 0.0}, 0.5 * p.gamma0 * p.lambda}; }
Modal modal(const DetunedJcParams& p) { return {cplx{p.lambda, -p.delta}, 0.5 * p.gamma0 * p.lambda}; }

void validate(const DampedJcParams& p)
{
    if (!(p.gamma0 > 0.0) || !std::isfinite(p.gamma0)) throw InvalidParams("gamma0 must be positive");
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) throw InvalidParams("lambda must be positive");
}

void validate(const DetunedJcParams& p)
{
    validate(DampedJcParams{p.gamma0, p.lambda});
    if (!std::isfinite(p.delta)) throw InvalidParams("delta must be finite");
}

void validate(const SpinBathParams& p)
{
    if (p.n_spins < 1) throw InvalidParams("n_spins must be at least 1");
    if (!(p.coupling > 0.0) || !std::isfinite(p.coupling)) throw InvalidParams("coupling must be positive");
}

ComplexMatrix excited_projector() { return qmat::ket_bra(2, 1, 1); }

double spin_phase_rate(const SpinBathParams& p) { return 2.0 * p.coupling / std::sqrt(static_cast<double>(p.n_spins)); }

} // namespace

cplx oracle_c_damped(const DampedJcParams& p, cplx t) { return modal(p).c(t); }

double oracle_c_damped(const DampedJcParams& p, double t) { return modal(p).c(cplx{t, 0.0}).real(); }

cplx oracle_cdot_damped(const DampedJcParams& p, cplx t) { return modal(p).cdot(t); }

double oracle_gamma_damped(const DampedJcParams& p, double t)
{
    const Modal m = modal(p);
    const double g = -2.0 * m.log_rate(cplx{t, 0.0}).real();
    if (!std::isfinite(g) || m.c(cplx{t, 0.0}) == cplx{}) throw PoleAt(t);
    return g;
}

double oracle_ncp_damped(const DampedJcParams& p, double t1, double t2)
{
    const double c1 = std::norm(oracle_c_damped(p, cplx{t1, 0.0}));
    const double c2 = std::norm(oracle_c_damped(p, cplx{t2, 0.0}));
    if (c1 == 0.0) {
        if (c2 == 0.0) return 0.0;
        throw SingularPoint(t1);
    }
    const double ratio = c2 / c1;
    if (!std::isfinite(ratio)) throw SingularPoint(t1);
    return ratio > 1.0 ? std::atan(0.5 * (ratio - 1.0)) : 0.0;
}

SingularTimes damped_singular_times(const DampedJcParams& p)
{
    SingularTimes out;
    const double disc = p.lambda * p.lambda - 2.0 * p.gamma0 * p.lambda;
    if (disc >= 0.0) return out;
    const double w = std::sqrt(-disc);
    out.first = 2.0 * (std::numbers::pi - std::atan(w / p.lambda)) / w;
    out.period = 2.0 * std::numbers::pi / w;
    return out;
}

cplx detuned_amplitude(const DetunedJcParams& p, double t) { return modal(p).c(cplx{t, 0.0}); }

cplx detuned_amplitude_rate(const DetunedJcParams& p, double t) { return modal(p).cdot(cplx{t, 0.0}); }

cplx SampledAmplitude::at(double time) const
{
    if (t.size() < 2 || time < t.front() || time > t.back()) {
        throw InvalidParams("SampledAmplitude::at: time outside sampled range");
    }
    const double h = t[1] - t[0];
    auto i = static_cast<std::size_t>((time - t.front()) / h);
    if (i >= t.size() - 1) i = t.size() - 2;
    const double s = (time - t[i]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * c[i] + h10 * h * cdot[i] + h01 * c[i + 1] + h11 * h * cdot[i + 1];
}

SampledAmplitude solve_c_detuned(const DetunedJcParams& p, double t_max, const ode::Tolerances& tol,
                                 std::size_t n_samples)
{
    validate(p);
    if (!(t_max > 0.0)) throw InvalidParams("solve_c_detuned: t_max must be positive");
    if (n_samples < 2) throw InvalidParams("solve_c_detuned: need at least two samples");

    const Modal m = modal(p);
    SampledAmplitude out;
    out.t.resize(n_samples);
    out.c.resize(n_samples);
    out.cdot.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        out.t[i] = t_max * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    }

    // y = (c, g) with g = -c'
    const ode::Rhs rhs = [&m](double, std::span<const cplx> y, std::span<cplx> dy) {
        dy[0] = -y[1];
        dy[1] = m.kappa0 * y[0] - m.a * y[1];
    };
    std::vector<cplx> y{1.0, 0.0};
    ode::Dop853 solver(2);
    solver.integrate(rhs, 0.0, t_max, y, tol, out.t, [&out](std::size_t i, std::span<const cplx> yi) {
        out.c[i] = yi[0];
        out.cdot[i] = -yi[1];
    });
    return out;
}

double oracle_k_spinbath(const SpinBathParams& p, double t1, double t2)
{
    const double w = spin_phase_rate(p);
    const double n = static_cast<double>(p.n_spins);
    const double den = std::pow(std::cos(w * t1), n);
    if (den == 0.0) throw SingularPoint(t1);
    return std::pow(std::cos(w * t2), n) / den;
}

double oracle_ncp_spinbath(const SpinBathParams& p, double t1, double t2)
{
    const double k = std::abs(oracle_k_spinbath(p, t1, t2));
    if (!std::isfinite(k)) throw SingularPoint(t1);
    return k > 1.0 ? std::atan(0.5 * (k - 1.0)) : 0.0;
}

ComplexMatrix oracle_choi_spinbath(const SpinBathParams& p, double t1, double t2)
{
    const double k = oracle_k_spinbath(p, t1, t2);
    if (!std::isfinite(k)) throw SingularPoint(t1);
    ComplexMatrix m(4, 4);
    m(0, 0) = m(3, 3) = 0.5;
    m(0, 3) = m(3, 0) = 0.5 * k;
    return m;
}

double spinbath_period(const SpinBathParams& p) { return std::numbers::pi / spin_phase_rate(p); }

SingularTimes spinbath_singular_times(const SpinBathParams& p)
{
    SingularTimes out;
    out.period = spinbath_period(p);
    out.first = 0.5 * out.period;
    return out;
}

TimeLocalModel damped_jc(const DampedJcParams& p)
{
    validate(p);
    const Modal m = modal(p);
    ScalarFunction rate{[m](double t) { return -2.0 * m.log_rate(cplx{t, 0.0}).real(); },
                        [m](cplx t) { return -2.0 * m.log_rate(t); }};
    ModelDescriptor desc{"damped_jc", {{"gamma0", p.gamma0}, {"lambda", p.lambda}, {"R", p.ratio()}}, p};
    TimeLocalModel model(2, {}, {{"sigma_minus", qmat::pauli::minus(), std::move(rate)}}, damped_singular_times(p),
                         "1/lambda", std::move(desc));
    model.limit_diverges = [p](double, double t2) {
        return std::abs(oracle_c_damped(p, t2)) > 1e-12 * std::exp(-0.5 * p.lambda * t2);
    };
    return model;
}

TimeLocalModel detuned_jc(const DetunedJcParams& p)
{
    validate(p);
    const Modal m = modal(p);
    // rho_10 -> c(t) rho_10 requires gamma = -2 Re(c'/c) and an energy shift
    // -Im(c'/c) on the excited level.
    ScalarFunction rate{[m](double t) { return -2.0 * m.log_rate(cplx{t, 0.0}).real(); }, {}};
    ScalarFunction shift{[m](double t) { return -m.log_rate(cplx{t, 0.0}).imag(); }, {}};
    ModelDescriptor desc{"detuned_jc", {{"gamma0", p.gamma0}, {"lambda", p.lambda}, {"delta", p.delta}}, p};
    return TimeLocalModel(2, {{excited_projector(), std::move(shift)}},
                          {{"sigma_minus", qmat::pauli::minus(), std::move(rate)}}, SingularTimes{}, "1/lambda",
                          std::move(desc));
}

TimeLocalModel spin_bath(const SpinBathParams& p)
{
    validate(p);
    const double w = spin_phase_rate(p);
    const double amp = p.coupling * std::sqrt(static_cast<double>(p.n_spins));
    ScalarFunction rate{[w, amp](double t) { return amp * std::tan(w * t); },
                        [w, amp](cplx t) { return amp * std::tan(w * t); }};
    ModelDescriptor desc{"spin_bath", {{"n_spins", static_cast<double>(p.n_spins)}, {"coupling", p.coupling}}, p};
    TimeLocalModel model(2, {}, {{"sigma_z", qmat::pauli::z(), std::move(rate)}}, spinbath_singular_times(p), "1/A",
                         std::move(desc));
    model.limit_diverges = [w](double, double t2) { return std::abs(std::cos(w * t2)) > 1e-12; };
    return model;
}

TimeLocalModel builtin_model(const BuiltinParams& params)
{
    struct Visitor {
        TimeLocalModel operator()(std::monostate) const { throw InvalidParams("not a built-in model"); }
        TimeLocalModel operator()(const DampedJcParams& p) const { return damped_jc(p); }
        TimeLocalModel operator()(const DetunedJcParams& p) const { return detuned_jc(p); }
        TimeLocalModel operator()(const SpinBathParams& p) const { return spin_bath(p); }
    };
    return std::visit(Visitor{}, params);
}

TimeLocalModel builtin_model(const std::string& name, const std::map<std::string, double>& params)
{
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : params) {
            bool known = false;
            for (const char* k : keys) known = known || key == k;
            if (!known) throw InvalidParams(name + ": unknown parameter '" + key + "'");
            if (!std::isfinite(value)) throw InvalidParams(name + ": parameter '" + key + "' is not finite");
        }
    };
    auto get = [&](const char* key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    // gamma0 may be given directly or through R = gamma0 / lambda.
    auto coupling_strength = [&](double lambda) {
        if (params.count("gamma0") && params.count("R")) throw InvalidParams(name + ": give gamma0 or R, not both");
        if (params.count("R")) return params.at("R") * lambda;
        if (!params.count("gamma0")) throw InvalidParams(name + ": missing parameter 'gamma0' (or 'R')");
        return params.at("gamma0");
    };

    if (name == "damped_jc") {
        allow({"gamma0", "lambda", "R"});
        const double lambda = get("lambda", 1.0);
        return damped_jc({coupling_strength(lambda), lambda});
    }
    if (name == "detuned_jc") {
        allow({"gamma0", "lambda", "R", "delta"});
        const double lambda = get("lambda", 1.0);
        return detuned_jc({coupling_strength(lambda), lambda, get("delta", 0.0)});
    }
    if (name == "spin_bath") {
        allow({"n_spins", "coupling"});
        const double n = get("n_spins", 1.0);
        if (n != std::floor(n) || n < 1.0 || n > 1e6) throw InvalidParams("spin_bath: n_spins must be a positive integer");
        return spin_bath({static_cast<int>(n), get("coupling", 1.0)});
    }
    throw InvalidParams("unknown model '" + name + "'");
}

} // namespace nonmark::dynamics
