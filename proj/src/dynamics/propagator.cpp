// propagator.cpp - ODE integration along the real axis with detours around rate poles

#include "nonmark/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nonmark/errors.hpp"

namespace nonmark::dynamics {

namespace {

constexpr cplx kI{0.0, 1.0};

// Pieces of the integration path. Real legs run along the axis (backward legs
// from a down to b); arcs pass a singular time ts on a half circle of the given
// radius. Scratch legs work on a copy of the state and only emit samples.
struct Leg {
    enum Kind { forward, backward, arc } kind = forward;
    double a = 0.0;
    double b = 0.0;
    double ts = 0.0;
    bool scratch = false;
};

// Half-circle radius around ts: a quarter of the distance to the next pole,
// never below the guard. Rates evaluated at |t - ts| = r carry a relative
// error of about ulp(ts) / r, so wide arcs keep pole crossings accurate.
double arc_radius(const SingularTimes& st, double ts, double guard)
{
    return std::max(guard, 0.25 * st.isolation(ts));
}

std::vector<Leg> build_path(const TimeLocalModel& model, double t1, double t_end, double guard)
{
    std::vector<Leg> path;
    const auto& st = model.singular_times();
    double cur = t1;
    for (double ts : st.in_range(t1, t_end + guard)) {
        if (ts - guard >= t_end) break;
        if (ts + guard >= t_end) { // remaining samples all sit before or inside this guard
            if (ts - guard > cur) path.push_back({Leg::forward, cur, ts - guard});
            return path;
        }
        if (!model.continuable()) {
            throw StepSizeUnderflow(ts, "rate pole at t=" + std::to_string(ts) +
                                            " and the model has no analytic continuation to step around it");
        }
        const double r = std::max(guard, std::min({arc_radius(st, ts, guard), ts - cur, t_end - ts}));
        // snap to the path ends so no leg of rounding-error length remains
        auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); };
        const double left = close(ts - r, cur) ? cur : ts - r;
        const double right = close(ts + r, t_end) ? t_end : ts + r;
        if (left > cur) path.push_back({Leg::forward, cur, left});
        if (r > guard) path.push_back({Leg::forward, left, ts - guard, 0.0, true});
        path.push_back({Leg::arc, left, right, ts});
        if (r > guard) path.push_back({Leg::backward, right, ts + guard, 0.0, true});
        cur = right;
    }
    if (t_end > cur) path.push_back({Leg::forward, cur, t_end});
    return path;
}

// apply(coefficients, y, dy) computes dy = sum_k coef_k * (piece_k action on y).
using Apply = std::function<void(std::span<const cplx>, std::span<const cplx>, std::span<cplx>)>;

struct SampleRef {
    double t;
    std::size_t index;
};

ode::Stats run_path(const TimeLocalModel& model, const std::vector<Leg>& path, std::span<cplx> y,
                    const ode::Tolerances& tol, const std::vector<SampleRef>& samples,
                    const std::function<void(std::size_t, std::span<const cplx>)>& sink, const Apply& apply)
{
    ode::Stats stats;
    ode::Dop853 solver(y.size());
    std::vector<cplx> coef(model.pieces().size());
    std::vector<cplx> scratch(y.size());

    // samples with lo < t <= hi (lo <= t < hi for backward legs), mapped to the leg parameter
    auto collect = [&](const Leg& leg, std::vector<double>& s, std::vector<std::size_t>& idx) {
        s.clear();
        idx.clear();
        if (leg.kind == Leg::forward) {
            for (const auto& smp : samples)
                if (smp.t > leg.a && smp.t <= leg.b) {
                    s.push_back(smp.t);
                    idx.push_back(smp.index);
                }
        } else if (leg.kind == Leg::backward) {
            for (auto it = samples.rbegin(); it != samples.rend(); ++it)
                if (it->t >= leg.b && it->t <= leg.a) {
                    s.push_back(leg.a - it->t);
                    idx.push_back(it->index);
                }
        }
    };

    std::vector<double> times;
    std::vector<std::size_t> idx;
    for (const auto& leg : path) {
        std::span<cplx> state = y;
        if (leg.scratch) {
            std::copy(y.begin(), y.end(), scratch.begin());
            state = scratch;
        }
        collect(leg, times, idx);
        const ode::SampleSink emit = [&](std::size_t i, std::span<const cplx> yy) { sink(idx[i], yy); };

        if (leg.kind == Leg::forward) {
            const ode::Rhs rhs = [&](double t, std::span<const cplx> yy, std::span<cplx> dy) {
                model.coefficients(t, coef);
                apply(coef, yy, dy);
            };
            stats += solver.integrate(rhs, leg.a, leg.b, state, tol, times, emit);
        } else if (leg.kind == Leg::backward) {
            // t(s) = a - s
            const ode::Rhs rhs = [&](double s, std::span<const cplx> yy, std::span<cplx> dy) {
                model.coefficients(leg.a - s, coef);
                for (auto& c : coef) c = -c;
                apply(coef, yy, dy);
            };
            stats += solver.integrate(rhs, 0.0, leg.a - leg.b, state, tol, times, emit);
        } else {
            // t(s) = ts + r e^{-is}, s in [-pi, 0], runs through the upper half plane
            const double r = 0.5 * (leg.b - leg.a);
            const ode::Rhs rhs = [&](double s, std::span<const cplx> yy, std::span<cplx> dy) {
                const cplx rot = std::exp(-kI * s);
                const cplx t = leg.ts + r * rot;
                const cplx dtds = -kI * r * rot;
                model.coefficients(t, coef);
                for (auto& c : coef) c *= dtds;
                apply(coef, yy, dy);
            };
            stats += solver.integrate(rhs, -std::numbers::pi, 0.0, state, tol);
        }
    }
    return stats;
}

Apply superoperator_apply(const TimeLocalModel& model)
{
    const std::size_t n = model.dim() * model.dim();
    return [&model, n, gen = std::vector<cplx>(n * n)](std::span<const cplx> coef, std::span<const cplx> y,
                                                          std::span<cplx> dy) mutable {
        std::fill(gen.begin(), gen.end(), cplx{});
        for (std::size_t k = 0; k < coef.size(); ++k) {
            if (coef[k] == cplx{}) continue;
            const auto piece = model.pieces()[k].data();
            for (std::size_t e = 0; e < gen.size(); ++e) gen[e] += coef[k] * piece[e];
        }
        // dPhi = L Phi, both row-major n x n
        const std::size_t cols = y.size() / n;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                cplx acc{};
                for (std::size_t m = 0; m < n; ++m) acc += gen[r * n + m] * y[m * cols + c];
                dy[r * cols + c] = acc;
            }
        }
    };
}

Apply matrix_form_apply(const TimeLocalModel& model)
{
    struct Cache {
        std::vector<ComplexMatrix> h;
        std::vector<ComplexMatrix> v, vd, vdv;
    };
    Cache cache;
    for (const auto& term : model.hamiltonian_terms()) cache.h.push_back(term.op);
    for (const auto& ch : model.channels()) {
        cache.v.push_back(ch.jump);
        cache.vd.push_back(ch.jump.adjoint());
        cache.vdv.push_back(ch.jump.adjoint() * ch.jump);
    }
    const std::size_t d = model.dim();
    return [cache = std::move(cache), d](std::span<const cplx> coef, std::span<const cplx> y, std::span<cplx> dy) {
        const ComplexMatrix rho(d, d, std::vector<cplx>(y.begin(), y.end()));
        ComplexMatrix out(d, d);
        std::size_t k = 0;
        for (const auto& h : cache.h) {
            out += (-kI * coef[k++]) * (h * rho - rho * h);
        }
        for (std::size_t a = 0; a < cache.v.size(); ++a) {
            const auto& vdv = cache.vdv[a];
            out += coef[k++] * (cache.v[a] * rho * cache.vd[a] - 0.5 * (vdv * rho + rho * vdv));
        }
        std::copy(out.data().begin(), out.data().end(), dy.begin());
    };
}

void check_endpoints(const TimeLocalModel& model, double t1, double t2, double guard)
{
    if (!(t1 >= 0.0) || !(t2 >= t1) || !std::isfinite(t2)) {
        throw InvalidParams("propagation needs 0 <= t1 <= t2 (got t1=" + std::to_string(t1) +
                            ", t2=" + std::to_string(t2) + ")");
    }
    if (auto ts = model.singular_times().near(t1, guard)) throw SingularTime(t1, *ts, guard);
    if (auto ts = model.singular_times().near(t2, guard)) throw SingularTime(t2, *ts, guard);
}

} // namespace

PropagatorMatrix propagate(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts)
{
    check_endpoints(model, t1, t2, opts.guard);
    const std::size_t n = model.dim() * model.dim();
    PropagatorMatrix out{model.dim(), t1, t2, ComplexMatrix::identity(n), {}};
    if (t2 == t1) return out;
    const auto path = build_path(model, t1, t2, opts.guard);
    out.stats = run_path(model, path, out.matrix.data(), opts.tol, {}, {}, superoperator_apply(model));
    return out;
}

ode::Stats propagate_with(const TimeLocalModel& model, double t1, std::span<const double> t2,
                          const PropagationOptions& opts, const MapSink& sink)
{
    if (!(t1 >= 0.0)) throw InvalidParams("propagation needs t1 >= 0");
    if (auto ts = model.singular_times().near(t1, opts.guard)) throw SingularTime(t1, *ts, opts.guard);
    if (!std::is_sorted(t2.begin(), t2.end()) || (!t2.empty() && t2.front() < t1)) {
        throw InvalidParams("t2 samples must be ascending and >= t1");
    }

    const std::size_t n = model.dim() * model.dim();
    auto y = ComplexMatrix::identity(n);
    std::vector<SampleRef> samples;
    for (std::size_t j = 0; j < t2.size(); ++j) {
        if (t2[j] == t1) {
            sink(j, y.data());
        } else if (!model.singular_times().near(t2[j], opts.guard)) {
            samples.push_back({t2[j], j});
        }
    }
    if (samples.empty()) return {};
    if (!model.continuable()) {
        // emit what lies before the first pole that would need a detour, then fail
        for (double ts : model.singular_times().in_range(t1, samples.back().t)) {
            if (ts + opts.guard >= samples.back().t) break;
            std::vector<SampleRef> before;
            for (const auto& smp : samples)
                if (smp.t < ts - opts.guard) before.push_back(smp);
            if (!before.empty()) {
                const auto path = build_path(model, t1, before.back().t, opts.guard);
                run_path(model, path, y.data(), opts.tol, before, sink, superoperator_apply(model));
            }
            build_path(model, t1, samples.back().t, opts.guard); // throws StepSizeUnderflow
        }
    }
    const auto path = build_path(model, t1, samples.back().t, opts.guard);
    return run_path(model, path, y.data(), opts.tol, samples, sink, superoperator_apply(model));
}

Ray propagate_ray(const TimeLocalModel& model, double t1, std::span<const double> t2, const PropagationOptions& opts)
{
    const std::size_t n = model.dim() * model.dim();
    Ray ray;
    ray.maps.resize(t2.size());
    ray.stats = propagate_with(model, t1, t2, opts, [&](std::size_t j, std::span<const cplx> phi) {
        ray.maps[j] = ComplexMatrix(n, n, std::vector<cplx>(phi.begin(), phi.end()));
    });
    return ray;
}

ComplexMatrix reshuffle(const ComplexMatrix& superop, std::size_t d)
{
    if (superop.rows() != d * d || superop.cols() != d * d) throw DimensionMismatch("reshuffle: expected d^2 x d^2");
    ComplexMatrix out(d * d, d * d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) out(a * d + i, b * d + j) = superop(a + d * b, i + d * j);
    return out;
}

ChoiMatrix choi_from_propagator(const PropagatorMatrix& p)
{
    return {p.dim, p.t1, p.t2, (1.0 / static_cast<double>(p.dim)) * reshuffle(p.matrix, p.dim)};
}

ChoiMatrix choi_of_interval(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts)
{
    return choi_from_propagator(propagate(model, t1, t2, opts));
}

ComplexMatrix maximally_entangled(std::size_t d)
{
    ComplexMatrix out(d * d, d * d);
    const double w = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i * d + i, j * d + j) = w;
    return out;
}

ComplexMatrix evolve_state(const TimeLocalModel& model, const ComplexMatrix& rho, double t1, double t2,
                           const PropagationOptions& opts)
{
    if (rho.rows() != model.dim() || rho.cols() != model.dim()) {
        throw DimensionMismatch("evolve_state: rho does not match model dimension");
    }
    check_endpoints(model, t1, t2, opts.guard);
    ComplexMatrix out = rho;
    if (t2 == t1) return out;
    const auto path = build_path(model, t1, t2, opts.guard);
    run_path(model, path, out.data(), opts.tol, {}, {}, matrix_form_apply(model));
    return out;
}

ChoiMatrix choi_via_ancilla(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts)
{
    const auto extended = extend_with_ancilla(model);
    return {model.dim(), t1, t2, evolve_state(extended, maximally_entangled(model.dim()), t1, t2, opts)};
}

} // namespace nonmark::dynamics
