// model.cpp - generator assembly in matrix and Liouville-space form

#include "nonmark/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nonmark/errors.hpp"

namespace nonmark::dynamics {

namespace {

constexpr cplx kI{0.0, 1.0};

// -i (I (x) H - H^T (x) I)
ComplexMatrix commutator_piece(const ComplexMatrix& h)
{
    const auto id = ComplexMatrix::identity(h.rows());
    return cplx{0.0, -1.0} * (qmat::kron(id, h) - qmat::kron(h.transpose(), id));
}

// conj(V) (x) V - 1/2 I (x) V^dag V - 1/2 (V^dag V)^T (x) I
ComplexMatrix dissipator_piece(const ComplexMatrix& v)
{
    const auto id = ComplexMatrix::identity(v.rows());
    const auto vdv = v.adjoint() * v;
    return qmat::kron(v.conj(), v) - 0.5 * qmat::kron(id, vdv) - 0.5 * qmat::kron(vdv.transpose(), id);
}

void check_operator(const ComplexMatrix& op, std::size_t dim, const std::string& what)
{
    if (op.rows() != dim || op.cols() != dim) {
        throw DimensionMismatch(what + " is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                                ", model dimension is " + std::to_string(dim));
    }
    if (!op.all_finite()) throw InvalidParams(what + " has non-finite entries");
}

void check_guard(const TimeLocalModel& model, double t, double guard)
{
    if (auto ts = model.singular_times().near(t, guard)) throw SingularTime(t, *ts, guard);
}

} // namespace

ScalarFunction ScalarFunction::constant(double value)
{
    return {[value](double) { return value; }, [value](cplx) { return cplx{value, 0.0}; }};
}

std::vector<double> SingularTimes::in_range(double lo, double hi) const
{
    std::vector<double> out;
    for (double t : listed)
        if (t >= lo && t <= hi) out.push_back(t);
    if (first && period > 0.0) {
        double n0 = std::max(0.0, std::ceil((lo - *first) / period));
        for (double n = n0;; n += 1.0) {
            const double t = *first + n * period;
            if (t > hi) break;
            if (t >= lo) out.push_back(t);
        }
    } else if (first && *first >= lo && *first <= hi) {
        out.push_back(*first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> SingularTimes::near(double t, double guard) const
{
    std::optional<double> best;
    for (double ts : in_range(t - guard, t + guard)) {
        if (!best || std::abs(ts - t) < std::abs(*best - t)) best = ts;
    }
    return best;
}

double SingularTimes::isolation(double ts) const
{
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](double t) {
        if (t != ts) best = std::min(best, std::abs(t - ts));
    };
    for (double t : listed) consider(t);
    if (first && period > 0.0) {
        const double n = std::max(0.0, std::round((ts - *first) / period));
        for (double k : {n - 1.0, n, n + 1.0})
            if (k >= 0.0) consider(*first + k * period);
    } else if (first) {
        consider(*first);
    }
    return best;
}

TimeLocalModel::TimeLocalModel(std::size_t dim, std::vector<HamiltonianTerm> hamiltonian,
                               std::vector<Channel> channels, SingularTimes singular_times, std::string time_unit,
                               ModelDescriptor descriptor)
    : dim_(dim), hamiltonian_(std::move(hamiltonian)), channels_(std::move(channels)),
      singular_(std::move(singular_times)), time_unit_(std::move(time_unit)), descriptor_(std::move(descriptor))
{
    if (dim_ < 2) throw InvalidParams("model dimension must be at least 2");
    for (std::size_t k = 0; k < hamiltonian_.size(); ++k) {
        const auto& term = hamiltonian_[k];
        check_operator(term.op, dim_, "Hamiltonian term " + std::to_string(k));
        if (qmat::hermiticity_deviation(term.op) > 1e-12) {
            throw NotHermitian(qmat::hermiticity_deviation(term.op));
        }
        if (!term.coefficient.on_real_axis) throw InvalidParams("Hamiltonian term without coefficient");
        pieces_.push_back(commutator_piece(term.op));
    }
    for (const auto& ch : channels_) {
        check_operator(ch.jump, dim_, "jump operator '" + ch.label + "'");
        if (!ch.rate.on_real_axis) throw InvalidParams("channel '" + ch.label + "' has no rate");
        pieces_.push_back(dissipator_piece(ch.jump));
    }
}

ComplexMatrix TimeLocalModel::hamiltonian(double t) const
{
    ComplexMatrix h(dim_, dim_);
    for (const auto& term : hamiltonian_) h += term.coefficient(t) * term.op;
    return h;
}

bool TimeLocalModel::continuable() const noexcept
{
    return std::all_of(hamiltonian_.begin(), hamiltonian_.end(),
                       [](const auto& h) { return h.coefficient.continuable(); }) &&
           std::all_of(channels_.begin(), channels_.end(), [](const auto& c) { return c.rate.continuable(); });
}

std::vector<double> TimeLocalModel::coefficients(double t) const
{
    std::vector<double> out;
    out.reserve(pieces_.size());
    for (const auto& term : hamiltonian_) out.push_back(term.coefficient(t));
    for (const auto& ch : channels_) out.push_back(ch.rate(t));
    return out;
}

std::vector<cplx> TimeLocalModel::coefficients(cplx t) const
{
    std::vector<cplx> out;
    out.reserve(pieces_.size());
    for (const auto& term : hamiltonian_) out.push_back(term.coefficient.continuation(t));
    for (const auto& ch : channels_) out.push_back(ch.rate.continuation(t));
    return out;
}

void TimeLocalModel::coefficients(double t, std::span<cplx> out) const
{
    std::size_t k = 0;
    for (const auto& term : hamiltonian_) out[k++] = term.coefficient(t);
    for (const auto& ch : channels_) out[k++] = ch.rate(t);
}

void TimeLocalModel::coefficients(cplx t, std::span<cplx> out) const
{
    std::size_t k = 0;
    for (const auto& term : hamiltonian_) out[k++] = term.coefficient.continuation(t);
    for (const auto& ch : channels_) out[k++] = ch.rate.continuation(t);
}

ComplexMatrix apply_generator(const TimeLocalModel& model, double t, const ComplexMatrix& rho, double guard)
{
    const auto d = model.dim();
    if (rho.rows() != d || rho.cols() != d) throw DimensionMismatch("apply_generator: rho has wrong shape");
    check_guard(model, t, guard);

    const auto h = model.hamiltonian(t);
    ComplexMatrix out = -kI * (h * rho - rho * h);
    for (const auto& ch : model.channels()) {
        const double g = ch.rate(t);
        if (g == 0.0) continue;
        const auto& v = ch.jump;
        const auto vd = v.adjoint();
        const auto vdv = vd * v;
        out += g * (v * rho * vd - 0.5 * (vdv * rho + rho * vdv));
    }
    return out;
}

ComplexMatrix generator_superoperator(const TimeLocalModel& model, double t, double guard)
{
    check_guard(model, t, guard);
    const auto n = model.dim() * model.dim();
    ComplexMatrix out(n, n);
    const auto coef = model.coefficients(t);
    for (std::size_t k = 0; k < coef.size(); ++k) {
        if (coef[k] != 0.0) out += coef[k] * model.pieces()[k];
    }
    return out;
}

TimeLocalModel extend_with_ancilla(const TimeLocalModel& model)
{
    const auto id = ComplexMatrix::identity(model.dim());
    std::vector<HamiltonianTerm> h;
    for (const auto& term : model.hamiltonian_terms()) h.push_back({qmat::kron(term.op, id), term.coefficient});
    std::vector<Channel> ch;
    for (const auto& c : model.channels()) ch.push_back({c.label, qmat::kron(c.jump, id), c.rate});
    auto desc = model.descriptor();
    desc.family += "+ancilla";
    desc.builtin = std::monostate{};
    TimeLocalModel out(model.dim() * model.dim(), std::move(h), std::move(ch), model.singular_times(),
                       model.time_unit(), std::move(desc));
    out.limit_diverges = model.limit_diverges;
    return out;
}

} // namespace nonmark::dynamics
