// ncp.cpp - negativity of Choi spectra

#include <cmath>
#include <numbers>

#include "nonmark/errors.hpp"
#include "nonmark/measure.hpp"

namespace nonmark::measure {

double ncp(const ComplexMatrix& choi_matrix, double neg_threshold)
{
    if (!(neg_threshold >= 0.0)) throw InvalidParams("neg_threshold must be non-negative");
    double negative = 0.0;
    for (double e : qmat::hermitian_eigenvalues(choi_matrix)) {
        if (e < -neg_threshold) negative -= e;
    }
    return negative > 0.0 ? std::atan(negative) : 0.0;
}

double ncp(const ChoiMatrix& choi, double neg_threshold) { return ncp(choi.matrix, neg_threshold); }

const char* to_string(CellFlag f)
{
    switch (f) {
    case CellFlag::ok: return "ok";
    case CellFlag::singular_limit: return "singular_limit";
    case CellFlag::skipped_guard: return "skipped_guard";
    case CellFlag::failed: return "failed";
    }
    return "?";
}

NcpValue ncp_interval(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts,
                      double neg_threshold)
{
    if (t2 == t1) return {0.0, CellFlag::ok};
    const auto& st = model.singular_times();
    if (st.near(t2, opts.guard)) return {0.0, CellFlag::skipped_guard};
    if (auto ts = st.near(t1, opts.guard)) {
        if (model.limit_diverges && model.limit_diverges(*ts, t2)) {
            return {std::numbers::pi / 2, CellFlag::singular_limit};
        }
        return {0.0, CellFlag::skipped_guard};
    }
    return {ncp(dynamics::choi_of_interval(model, t1, t2, opts), neg_threshold), CellFlag::ok};
}

std::vector<double> linspace(double lo, double hi, std::size_t n)
{
    if (n < 2) throw InvalidParams("linspace needs at least two points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.back() = hi;
    return out;
}

std::vector<double> cell_centres(double lo, double hi, std::size_t n)
{
    if (n < 1) throw InvalidParams("cell_centres needs at least one cell");
    std::vector<double> out(n);
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lo + (static_cast<double>(i) + 0.5) * h;
    return out;
}

} // namespace nonmark::measure
