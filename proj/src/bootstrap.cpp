#include "futrisk/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace futrisk {

namespace {

using Evaluator = std::function<double(std::span<const double>)>;

// Binds an estimator to a sample size, precomputing spectral weights once.
Evaluator prepare(const Estimator& estimator, std::size_t n, QuantileMethod method)
{
    switch (estimator.kind) {
    case MeasureKind::VaR: {
        const ConfidenceLevel alpha(estimator.parameter);
        return [alpha, method](std::span<const double> s) { return value_at_risk(s, alpha, method); };
    }
    case MeasureKind::ES: {
        const ConfidenceLevel alpha(estimator.parameter);
        return [alpha](std::span<const double> s) { return expected_shortfall(s, alpha); };
    }
    case MeasureKind::SRM: {
        const RiskAversion k(estimator.parameter);
        if (k.value() < kMinRiskAversion)
            throw std::invalid_argument(fmt::format(
                "risk aversion {} is below {}; the k -> 0 limit of the spectral measure is the sample mean",
                k.value(), kMinRiskAversion));
        auto weights = std::make_shared<const SpectralWeights>(spectral_weights(n, k));
        return [weights](std::span<const double> s) { return spectral_risk(s, *weights); };
    }
    }
    throw std::invalid_argument("unknown measure kind");
}

struct CellTask {
    const LossSample* sample = nullptr;
    Estimator estimator;
    CellKey key;
    Evaluator evaluate;
    double plug_in = 0.0;
    std::vector<double> estimates;
    std::string error;
};

constexpr std::size_t kChunk = 32;

std::size_t resolve_workers(std::size_t requested)
{
    if (requested != 0)
        return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs every resample of every prepared task. Tasks with a non-empty error
// are skipped.
void execute(std::vector<CellTask>& tasks, const BootstrapConfig& config)
{
    const std::size_t B = config.resamples;
    const std::size_t chunks_per_cell = (B + kChunk - 1) / kChunk;

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (tasks[i].error.empty()) {
            tasks[i].estimates.assign(B, 0.0);
            live.push_back(i);
        }
    }
    const std::size_t units = live.size() * chunks_per_cell;
    if (units == 0)
        return;

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;

    auto worker = [&] {
        std::vector<double> buffer;
        std::vector<std::uint32_t> counts;
        for (std::size_t u = next.fetch_add(1); u < units; u = next.fetch_add(1)) {
            CellTask& task = tasks[live[u / chunks_per_cell]];
            const std::size_t begin = (u % chunks_per_cell) * kChunk;
            const std::size_t end = std::min(B, begin + kChunk);
            const auto sorted = task.sample->losses();
            buffer.resize(sorted.size());
            try {
                for (std::size_t b = begin; b < end; ++b) {
                    CounterStream stream(resample_stream_key(config.master_seed, task.key, b));
                    resample_sorted(sorted, stream, buffer, counts);
                    task.estimates[b] = task.evaluate(buffer);
                }
            } catch (const std::exception& e) {
                const std::lock_guard lock(error_mutex);
                if (task.error.empty())
                    task.error = e.what();
            }
        }
    };

    const std::size_t workers = std::min(resolve_workers(config.workers), units);
    if (workers == 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back(worker);
}

CellTask make_task(const LossSample& sample, const Estimator& estimator, const CellKey& key,
                   const BootstrapConfig& config)
{
    CellTask task;
    task.sample = &sample;
    task.estimator = estimator;
    task.key = key;
    try {
        task.evaluate = prepare(estimator, sample.size(), config.quantile_method);
        task.plug_in = task.evaluate(sample.losses());
    } catch (const std::exception& e) {
        task.error = e.what();
    }
    return task;
}

} // namespace

std::string_view to_string(MeasureKind kind) noexcept
{
    switch (kind) {
    case MeasureKind::VaR:
        return "VaR";
    case MeasureKind::ES:
        return "ES";
    case MeasureKind::SRM:
        return "SRM";
    }
    return "?";
}

double Estimator::operator()(std::span<const double> sorted, QuantileMethod method) const
{
    return prepare(*this, sorted.size(), method)(sorted);
}

void BootstrapConfig::validate() const
{
    std::vector<std::string> problems;
    if (resamples < 2)
        problems.push_back(fmt::format("resamples must be at least 2, got {}", resamples));
    if (!(ci_coverage > 0.0 && ci_coverage < 1.0))
        problems.push_back(fmt::format("confidence-interval coverage must lie in (0, 1), got {}", ci_coverage));
    if (!problems.empty())
        throw std::invalid_argument(fmt::format("{}", fmt::join(problems, "; ")));
}

std::uint64_t resample_stream_key(std::uint64_t master_seed, const CellKey& cell, std::size_t resample_index) noexcept
{
    return derive_key(master_seed, {cell.sample_index, static_cast<std::uint64_t>(cell.measure),
                                    cell.parameter_index, resample_index});
}

void resample_sorted(std::span<const double> sorted, CounterStream& stream, std::span<double> out,
                     std::vector<std::uint32_t>& counts)
{
    const std::size_t n = sorted.size();
    if (n == 0)
        throw std::invalid_argument("cannot resample an empty sample");
    if (out.size() != n)
        throw std::invalid_argument("resample buffer size mismatch");
    counts.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j)
        ++counts[stream.below(n)];
    // Expanding multiplicities over an already sorted source yields a sorted draw.
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t c = counts[i]; c > 0; --c)
            out[pos++] = sorted[i];
    }
}

LossSample resample(const LossSample& sample, CounterStream& stream)
{
    std::vector<double> out(sample.size());
    std::vector<std::uint32_t> counts;
    resample_sorted(sample.losses(), stream, out, counts);
    return LossSample(std::move(out), sample.position(), sample.source_label());
}

double coefficient_of_variation(double point, double std_error)
{
    if (!(std_error > 0.0))
        throw std::domain_error("coefficient of variation undefined for a zero standard error");
    return point / std_error;
}

Interval standardize_interval(double point, Interval raw)
{
    if (point == 0.0)
        throw std::domain_error("cannot standardize an interval by a zero point estimate");
    const double a = raw.lower / point;
    const double b = raw.upper / point;
    return {std::min(a, b), std::max(a, b)};
}

BootstrapResult summarize(std::span<const double> estimates, double plug_in, const BootstrapConfig& config)
{
    config.validate();
    if (estimates.size() < 2)
        throw std::invalid_argument("at least 2 resample estimates are required");

    std::vector<double> sorted(estimates.begin(), estimates.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();
    const auto B = static_cast<double>(sorted.size());

    BootstrapResult r;
    r.plug_in_estimate = plug_in;
    r.resamples = sorted.size();

    if (lo == hi) {
        r.point_estimate = lo;
        r.std_error = 0.0;
        r.ci_raw = {lo, lo};
        r.ci_standardized = Interval{1.0, 1.0};
        return r;
    }

    r.point_estimate = std::clamp(compensated_sum(sorted) / B, lo, hi);
    std::vector<double> sq(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double d = sorted[i] - r.point_estimate;
        sq[i] = d * d;
    }
    r.std_error = std::sqrt(compensated_sum(sq) / (B - 1.0));

    const double tail = (1.0 - config.ci_coverage) / 2.0;
    r.ci_raw = {sorted_quantile(sorted, tail, config.quantile_method),
                sorted_quantile(sorted, 1.0 - tail, config.quantile_method)};
    if (r.point_estimate != 0.0) {
        r.ci_standardized = standardize_interval(r.point_estimate, r.ci_raw);
        if (r.std_error > 0.0)
            r.coeff_variation = coefficient_of_variation(r.point_estimate, r.std_error);
    }
    return r;
}

BootstrapResult bootstrap_estimate(const LossSample& sample, const Estimator& estimator,
                                   const BootstrapConfig& config, const CellKey& cell)
{
    config.validate();
    std::vector<CellTask> tasks;
    tasks.push_back(make_task(sample, estimator, cell, config));
    if (!tasks.front().error.empty())
        throw std::invalid_argument(tasks.front().error);
    execute(tasks, config);
    if (!tasks.front().error.empty())
        throw std::runtime_error(tasks.front().error);
    return summarize(tasks.front().estimates, tasks.front().plug_in, config);
}

BootstrapResult bootstrap_estimate(const LossSample& sample, const Estimator& estimator,
                                   const BootstrapConfig& config)
{
    return bootstrap_estimate(sample, estimator, config, CellKey{0, estimator.kind, 0});
}

bool MeasureSelection::includes(MeasureKind kind) const noexcept
{
    switch (kind) {
    case MeasureKind::VaR:
        return var;
    case MeasureKind::ES:
        return es;
    case MeasureKind::SRM:
        return srm;
    }
    return false;
}

GridResult::GridResult(std::size_t samples, std::vector<double> alphas, std::vector<double> ks,
                       MeasureSelection measures)
    : samples_(samples), alphas_(std::move(alphas)), ks_(std::move(ks)), measures_(measures)
{
    for (std::size_t s = 0; s < samples_; ++s) {
        for (MeasureKind kind : {MeasureKind::VaR, MeasureKind::ES, MeasureKind::SRM}) {
            if (!measures_.includes(kind))
                continue;
            const auto& params = parameters(kind);
            for (std::size_t p = 0; p < params.size(); ++p)
                cells_.push_back(GridCell{CellKey{s, kind, p}, params[p], std::nullopt, {}});
        }
    }
}

const std::vector<double>& GridResult::parameters(MeasureKind kind) const noexcept
{
    return kind == MeasureKind::SRM ? ks_ : alphas_;
}

const GridCell* GridResult::find(std::size_t sample, MeasureKind measure, std::size_t parameter_index) const
{
    for (const auto& cell : cells_) {
        if (cell.key.sample_index == sample && cell.key.measure == measure &&
            cell.key.parameter_index == parameter_index)
            return &cell;
    }
    return nullptr;
}

const GridCell& GridResult::at(std::size_t sample, MeasureKind measure, std::size_t parameter_index) const
{
    const GridCell* cell = find(sample, measure, parameter_index);
    if (!cell)
        throw std::out_of_range(fmt::format("no grid cell ({}, {}, {})", sample, to_string(measure), parameter_index));
    return *cell;
}

std::size_t GridResult::failed_count() const noexcept
{
    return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](const GridCell& c) { return !c.ok(); }));
}

GridResult run_grid(std::span<const LossSample> samples, std::span<const double> alphas, std::span<const double> ks,
                    const BootstrapConfig& config, MeasureSelection measures)
{
    config.validate();
    if (samples.empty())
        throw std::invalid_argument("run_grid needs at least one sample");
    if (!measures.any())
        throw std::invalid_argument("run_grid needs at least one measure");
    if ((measures.var || measures.es) && alphas.empty())
        throw std::invalid_argument("VaR/ES requested without confidence levels");
    if (measures.srm && ks.empty())
        throw std::invalid_argument("SRM requested without risk-aversion coefficients");

    GridResult grid(samples.size(), {alphas.begin(), alphas.end()}, {ks.begin(), ks.end()}, measures);

    std::vector<CellTask> tasks;
    tasks.reserve(grid.cells().size());
    for (const auto& cell : grid.cells()) {
        const Estimator estimator{cell.key.measure, cell.parameter};
        tasks.push_back(make_task(samples[cell.key.sample_index], estimator, cell.key, config));
    }

    execute(tasks, config);

    auto cells = grid.cells();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!tasks[i].error.empty()) {
            cells[i].error = tasks[i].error;
            continue;
        }
        try {
            cells[i].result = summarize(tasks[i].estimates, tasks[i].plug_in, config);
        } catch (const std::exception& e) {
            cells[i].error = e.what();
        }
    }
    return grid;
}

} // namespace futrisk
