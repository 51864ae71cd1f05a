// bootstrap.hpp
// Vanilla i.i.d. bootstrap for the risk estimators.
//
// Each estimator is evaluated on B resamples drawn with replacement from the
// loss sample. The reported point estimate is the mean of the B resample
// values, the standard error is their sample standard deviation, and the
// confidence interval is read from their percentiles. No bias correction is
// applied.
//
// Note on "coefficient of variation": here it is point / standard error, a
// signal-to-noise ratio. This is the reciprocal of the textbook CV.
//
// Determinism: resample b of grid cell (sample, measure, parameter) draws
// from a counter stream keyed on (master_seed, sample, measure, parameter, b).
// Resample values land in a pre-indexed buffer, so results are bit-identical
// for any worker count and any scheduling order.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "futrisk/measures.hpp"
#include "futrisk/random.hpp"

namespace futrisk {

enum class MeasureKind : std::uint8_t { VaR = 0, ES = 1, SRM = 2 };

std::string_view to_string(MeasureKind kind) noexcept;

/// A risk measure bound to its conditioning parameter.
struct Estimator {
    MeasureKind kind = MeasureKind::VaR;
    /// Confidence level for VaR/ES, risk aversion for SRM.
    double parameter = 0.95;

    static Estimator var(double alpha) { return {MeasureKind::VaR, alpha}; }
    static Estimator es(double alpha) { return {MeasureKind::ES, alpha}; }
    static Estimator srm(double k) { return {MeasureKind::SRM, k}; }

    /// Evaluate on an ascending-sorted sample. Throws on an invalid parameter.
    double operator()(std::span<const double> sorted, QuantileMethod method) const;
};

struct BootstrapConfig {
    std::size_t resamples = 5000;
    std::uint64_t master_seed = 0;
    double ci_coverage = 0.90;
    QuantileMethod quantile_method = QuantileMethod::OrderStatistic;
    /// 0 selects std::thread::hardware_concurrency().
    std::size_t workers = 0;

    void validate() const;
};

struct Interval {
    double lower = 0.0;
    double upper = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

struct BootstrapResult {
    double point_estimate = 0.0;
    double std_error = 0.0;
    /// point / std_error; absent when the standard error or the point is zero.
    std::optional<double> coeff_variation;
    /// Percentile bounds divided by the point estimate, ordered lower <= upper.
    /// Absent only when the point is zero while the spread is not.
    std::optional<Interval> ci_standardized;
    /// Percentile bounds in loss units.
    Interval ci_raw;
    double plug_in_estimate = 0.0;
    std::size_t resamples = 0;

    friend bool operator==(const BootstrapResult&, const BootstrapResult&) = default;
};

/// Coordinates of one grid cell; they key the cell's random streams.
struct CellKey {
    std::size_t sample_index = 0;
    MeasureKind measure = MeasureKind::VaR;
    std::size_t parameter_index = 0;
};

std::uint64_t resample_stream_key(std::uint64_t master_seed, const CellKey& cell, std::size_t resample_index) noexcept;

/// Draw n losses uniformly with replacement; the result is sorted ascending.
LossSample resample(const LossSample& sample, CounterStream& stream);

/// Sorted resample written into `out` (size n). `counts` is scratch of size n.
void resample_sorted(std::span<const double> sorted, CounterStream& stream, std::span<double> out,
                     std::vector<std::uint32_t>& counts);

double coefficient_of_variation(double point, double std_error);
Interval standardize_interval(double point, Interval raw);

/// Reduce B resample estimates to the reported statistics.
BootstrapResult summarize(std::span<const double> estimates, double plug_in, const BootstrapConfig& config);

BootstrapResult bootstrap_estimate(const LossSample& sample, const Estimator& estimator,
                                   const BootstrapConfig& config);
/// As above with explicit cell coordinates, matching the cell's result in run_grid().
BootstrapResult bootstrap_estimate(const LossSample& sample, const Estimator& estimator,
                                   const BootstrapConfig& config, const CellKey& cell);

struct MeasureSelection {
    bool var = true;
    bool es = true;
    bool srm = true;

    bool includes(MeasureKind kind) const noexcept;
    bool any() const noexcept { return var || es || srm; }
};

struct GridCell {
    CellKey key;
    double parameter = 0.0;
    std::optional<BootstrapResult> result;
    /// Set when the cell failed; other cells are unaffected.
    std::string error;

    bool ok() const noexcept { return result.has_value(); }
};

/// Results for every (sample x measure x parameter) cell.
class GridResult {
public:
    GridResult(std::size_t samples, std::vector<double> alphas, std::vector<double> ks, MeasureSelection measures);

    const GridCell* find(std::size_t sample, MeasureKind measure, std::size_t parameter_index) const;
    const GridCell& at(std::size_t sample, MeasureKind measure, std::size_t parameter_index) const;

    std::span<const GridCell> cells() const noexcept { return cells_; }
    std::span<GridCell> cells() noexcept { return cells_; }

    std::size_t sample_count() const noexcept { return samples_; }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    const std::vector<double>& ks() const noexcept { return ks_; }
    const std::vector<double>& parameters(MeasureKind kind) const noexcept;
    const MeasureSelection& measures() const noexcept { return measures_; }
    std::size_t failed_count() const noexcept;

private:
    std::size_t samples_;
    std::vector<double> alphas_;
    std::vector<double> ks_;
    MeasureSelection measures_;
    std::vector<GridCell> cells_;
};

/// Bootstrap every cell. Cells fail independently (e.g. an invalid
/// parameter); failures are recorded in the cell, never thrown.
GridResult run_grid(std::span<const LossSample> samples, std::span<const double> alphas, std::span<const double> ks,
                    const BootstrapConfig& config, MeasureSelection measures = {});

} // namespace futrisk
