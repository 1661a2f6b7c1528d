// witness.cpp - trace distance of two evolving states

#include <cmath>

#include "nonmark/errors.hpp"
#include "nonmark/measure.hpp"

namespace nonmark::measure {

namespace {
constexpr double kSlopeTol = 1e-12;
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m))
{
    if (!m_.is_square()) throw NotSquare("DensityMatrix: matrix is not square");
    if (m_.rows() < 1) throw DimensionMismatch("DensityMatrix: empty matrix");
    const double dev = qmat::hermiticity_deviation(m_);
    if (dev > 1e-12) throw NotHermitian(dev);
    if (std::abs(m_.trace() - 1.0) > 1e-12) throw InvalidParams("DensityMatrix: trace differs from 1");
}

DensityMatrix DensityMatrix::pure(const std::vector<qmat::cplx>& psi)
{
    double norm = 0.0;
    for (const auto& a : psi) norm += std::norm(a);
    if (!(norm > 0.0)) throw InvalidParams("DensityMatrix::pure: zero vector");
    const std::size_t d = psi.size();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = psi[i] * std::conj(psi[j]) / norm;
    return DensityMatrix(std::move(m));
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b)
{
    if (a.dim() != b.dim()) throw DimensionMismatch("trace_distance: dimensions differ");
    return 0.5 * qmat::trace_norm(a.matrix() - b.matrix());
}

std::vector<WitnessSample> blp_witness(const TimeLocalModel& model, const DensityMatrix& rho1,
                                       const DensityMatrix& rho2, const std::vector<double>& t_grid,
                                       const PropagationOptions& opts)
{
    const std::size_t d = model.dim();
    if (rho1.dim() != d || rho2.dim() != d) throw DimensionMismatch("blp_witness: state and model dimensions differ");
    if (t_grid.empty()) return {};

    const auto ray = dynamics::propagate_ray(model, t_grid.front(), t_grid, opts);
    const auto v1 = qmat::vec(rho1.matrix());
    const auto v2 = qmat::vec(rho2.matrix());
    const std::size_t n = d * d;

    std::vector<WitnessSample> out;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (!ray.maps[k]) continue;
        const auto& phi = *ray.maps[k];
        std::vector<qmat::cplx> diff(n);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) diff[r] += phi(r, c) * (v1[c] - v2[c]);
        auto delta = qmat::unvec(diff, d);
        delta = qmat::hermitian_part(delta);
        out.push_back({t_grid[k], 0.5 * qmat::trace_norm(delta), 0});
    }
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
        const double step = out[k + 1].distance - out[k].distance;
        out[k].slope_sign = step > kSlopeTol ? 1 : (step < -kSlopeTol ? -1 : 0);
    }
    return out;
}

std::vector<std::pair<double, double>> increase_intervals(const std::vector<WitnessSample>& samples)
{
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        if (samples[k].slope_sign <= 0) continue;
        if (!out.empty() && out.back().second == samples[k].t) {
            out.back().second = samples[k + 1].t;
        } else {
            out.emplace_back(samples[k].t, samples[k + 1].t);
        }
    }
    return out;
}

std::pair<DensityMatrix, DensityMatrix> default_witness_pair(const TimeLocalModel& model)
{
    const std::size_t d = model.dim();
    if (model.descriptor().family == "spin_bath") {
        const double s = 1.0 / std::sqrt(2.0);
        return {DensityMatrix::pure({s, s}), DensityMatrix::pure({s, -s})};
    }
    return {DensityMatrix(qmat::ket_bra(d, 0, 0)), DensityMatrix(qmat::ket_bra(d, 1, 1))};
}

} // namespace nonmark::measure
