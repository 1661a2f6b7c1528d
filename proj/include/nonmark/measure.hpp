// measure.hpp - Ncp of intermediate maps, grids over (t1, dt), the averaged measure NM

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nonmark/model.hpp"
#include "nonmark/propagator.hpp"

namespace nonmark::measure {

using dynamics::ChoiMatrix;
using dynamics::PropagationOptions;
using dynamics::TimeLocalModel;
using qmat::ComplexMatrix;

inline constexpr double kDefaultNegThreshold = 1e-10;

/// arctan of minus the sum of eigenvalues below -neg_threshold.
double ncp(const ChoiMatrix& choi, double neg_threshold = kDefaultNegThreshold);
double ncp(const ComplexMatrix& choi_matrix, double neg_threshold = kDefaultNegThreshold);

enum class CellFlag : std::uint8_t { ok, singular_limit, skipped_guard, failed };
const char* to_string(CellFlag f);

struct NcpValue {
    double value = 0.0;
    CellFlag flag = CellFlag::ok;
};

/// Ncp of Λ(t2, t1). A start time inside a singular guard yields pi/2
/// (singular_limit) when the model's limit oracle says the ratio diverges,
/// otherwise skipped_guard; an end time inside a guard is skipped_guard.
NcpValue ncp_interval(const TimeLocalModel& model, double t1, double t2, const PropagationOptions& opts = {},
                      double neg_threshold = kDefaultNegThreshold);

std::vector<double> linspace(double lo, double hi, std::size_t n);
/// Centres of n equal cells covering [lo, hi].
std::vector<double> cell_centres(double lo, double hi, std::size_t n);

struct GridOptions {
    PropagationOptions prop;
    double neg_threshold = kDefaultNegThreshold;
    int jobs = 0; // 0: OpenMP default
};

struct NcpGrid {
    dynamics::ModelDescriptor model;
    std::vector<double> t1_axis;
    std::vector<double> dt_axis;
    std::vector<double> values; // t1-major: values[i * dt_axis.size() + j]
    std::vector<CellFlag> flags;
    double neg_threshold = kDefaultNegThreshold;
    ode::Stats stats;

    double value(std::size_t i, std::size_t j) const { return values[i * dt_axis.size() + j]; }
    CellFlag flag(std::size_t i, std::size_t j) const { return flags[i * dt_axis.size() + j]; }
    std::size_t count(CellFlag f) const;
};

/// OpenMP kernel. Splits the time axis at checkpoints away from singular
/// times and composes Λ(t2, t1) from per-row maps up to the first checkpoint
/// and shared segment propagations; results do not depend on the thread count.
NcpGrid ncp_grid(const TimeLocalModel& model, const std::vector<double>& t1_axis, const std::vector<double>& dt_axis,
                 const GridOptions& opts = {});

/// Reference: one direct integration per t1 row, on the calling thread.
NcpGrid ncp_grid_serial(const TimeLocalModel& model, const std::vector<double>& t1_axis,
                        const std::vector<double>& dt_axis, const GridOptions& opts = {});

enum class RegionKind { periodic, bounded, truncated, custom, empty };
const char* to_string(RegionKind k);

struct RepresentativeRegion {
    double t1_lo = 0.0;
    double t1_hi = 0.0;
    double dt_lo = 0.0;
    double dt_hi = 0.0;
    RegionKind kind = RegionKind::custom;
    std::string rationale;
};

/// Built-in models only. Throws NotApplicable for Markovian parameters and
/// custom models.
RepresentativeRegion representative_region(const TimeLocalModel& model, const GridOptions& opts = {});

struct EstimateOptions {
    GridOptions grid;
    std::size_t resolution = 400; // cells per axis on the first grid
    bool refine = true;
    int max_refinements = 4;
    double rel_change = 0.005;
};

struct NmEstimate {
    double nm = 0.0;
    double support_fraction = 0.0;
    std::size_t n_cells_total = 0;    // cells carrying a value (ok or singular_limit)
    std::size_t n_cells_positive = 0;
    double max_ncp = 0.0;
    RepresentativeRegion region;
    std::vector<double> convergence;       // nm per grid
    std::vector<std::size_t> resolutions;  // cells per axis per grid
    bool converged = false;
    ode::Stats stats;  // summed over all grids
    NcpGrid grid;      // the last grid
};

/// Equal-weight mean over strictly positive cells; recomputable from the grid.
NmEstimate nm_from_grid(const NcpGrid& grid);

/// Midpoint grids over the region, doubled until the relative change drops
/// below rel_change. Throws RegionTooCoarse when no cell is positive although
/// some rate turns negative inside the region.
NmEstimate nm_estimate(const TimeLocalModel& model, const RepresentativeRegion& region,
                       const EstimateOptions& opts = {});

/// Cross-check estimator from uniformly drawn (t1, dt) pairs.
NmEstimate nm_random_estimate(const TimeLocalModel& model, const RepresentativeRegion& region, std::size_t n_samples,
                              std::uint64_t seed, const GridOptions& opts = {});

struct SweepPoint {
    double param = 0.0;
    std::optional<NmEstimate> estimate;
    std::string error;
};

struct SweepResult {
    std::string family;
    std::string param_name;
    std::vector<SweepPoint> points;
    bool nondecreasing = true;          // over points that succeeded
    std::optional<double> argmax;       // param of the largest nm
    std::optional<double> first_positive;
};

/// Independent estimate per value of `param_name`, other parameters from `base`.
/// Failures are recorded per point.
SweepResult nm_sweep(const std::string& family, const std::string& param_name, const std::vector<double>& values,
                     const std::map<std::string, double>& base, const EstimateOptions& opts = {});

// ---- trace-distance witness ----

class DensityMatrix {
public:
    /// Hermitian and unit trace within 1e-12; positivity is not required.
    explicit DensityMatrix(ComplexMatrix m);
    const ComplexMatrix& matrix() const noexcept { return m_; }
    std::size_t dim() const noexcept { return m_.rows(); }

    static DensityMatrix pure(const std::vector<qmat::cplx>& psi);

private:
    ComplexMatrix m_;
};

double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

struct WitnessSample {
    double t = 0.0;
    double distance = 0.0;
    int slope_sign = 0; // sign of D(t_next) - D(t), 0 on the last sample or within 1e-12
};

/// D(t) for two initial states at t_grid.front(), evolved along t_grid.
/// Times inside a singular guard are left out.
std::vector<WitnessSample> blp_witness(const TimeLocalModel& model, const DensityMatrix& rho1,
                                       const DensityMatrix& rho2, const std::vector<double>& t_grid,
                                       const PropagationOptions& opts = {});

/// Maximal [t_a, t_b] runs over which the sampled distance increases.
std::vector<std::pair<double, double>> increase_intervals(const std::vector<WitnessSample>& samples);

/// Ground/excited for amplitude damping, |+>/|-> for dephasing.
std::pair<DensityMatrix, DensityMatrix> default_witness_pair(const TimeLocalModel& model);

} // namespace nonmark::measure
