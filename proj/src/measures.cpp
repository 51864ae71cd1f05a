#include "futrisk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace futrisk {

namespace {

// Snap x to the nearest integer when the gap is within accumulated rounding
// of the product that produced it.
double snap(double x, std::size_t n) noexcept
{
    const double nearest = std::round(x);
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, static_cast<double>(n));
    return std::abs(x - nearest) <= slack ? nearest : x;
}

void require_sorted_nonempty(std::span<const double> sorted)
{
    if (sorted.empty())
        throw std::invalid_argument("loss sample is empty");
}

} // namespace

std::string_view to_string(Position position) noexcept
{
    return position == Position::Long ? "long" : "short";
}

std::string_view to_string(QuantileMethod method) noexcept
{
    return method == QuantileMethod::OrderStatistic ? "order" : "interp";
}

ConfidenceLevel::ConfidenceLevel(double alpha) : alpha_(alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument(fmt::format("confidence level must lie in (0, 1), got {}", alpha));
}

RiskAversion::RiskAversion(double k) : k_(k)
{
    if (!(k > 0.0) || !std::isfinite(k))
        throw std::invalid_argument(fmt::format("risk aversion must be positive and finite, got {}", k));
}

LossSample::LossSample(std::vector<double> losses, Position position, std::string source_label)
    : losses_(std::move(losses)), position_(position), label_(std::move(source_label))
{
    if (losses_.empty())
        throw std::invalid_argument("loss sample is empty");
    for (double v : losses_) {
        if (!std::isfinite(v))
            throw std::invalid_argument("loss sample contains a non-finite value");
    }
    std::stable_sort(losses_.begin(), losses_.end());
}

double LossSample::mean() const noexcept
{
    return compensated_sum(losses_) / static_cast<double>(losses_.size());
}

LossSample to_losses(std::span<const double> returns, Position position, std::string source_label)
{
    if (returns.empty())
        throw std::invalid_argument("cannot build losses from an empty return series");
    std::vector<double> losses(returns.begin(), returns.end());
    if (position == Position::Long) {
        for (double& v : losses)
            v = -v;
    }
    return LossSample(std::move(losses), position, std::move(source_label));
}

LossSample to_losses(const ReturnSeries& series, Position position)
{
    const auto values = series.values();
    return to_losses(values, position, series.contract_label);
}

std::size_t quantile_rank(double alpha, std::size_t n) noexcept
{
    const double r = std::ceil(snap(alpha * static_cast<double>(n), n));
    return std::clamp<std::size_t>(r < 1.0 ? 1 : static_cast<std::size_t>(r), 1, n);
}

std::size_t tail_count(double alpha, std::size_t n) noexcept
{
    const double m = std::ceil(snap((1.0 - alpha) * static_cast<double>(n), n));
    return std::clamp<std::size_t>(m < 1.0 ? 1 : static_cast<std::size_t>(m), 1, n);
}

double sorted_quantile(std::span<const double> sorted, double alpha, QuantileMethod method)
{
    require_sorted_nonempty(sorted);
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument(fmt::format("quantile level must lie in [0, 1], got {}", alpha));
    const std::size_t n = sorted.size();

    if (method == QuantileMethod::OrderStatistic)
        return sorted[quantile_rank(alpha, n) - 1];

    const double h = snap(alpha * static_cast<double>(n - 1), n);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n)
        return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double empirical_quantile(const LossSample& sample, ConfidenceLevel alpha, QuantileMethod method)
{
    return sorted_quantile(sample.losses(), alpha.value(), method);
}

double value_at_risk(std::span<const double> sorted, ConfidenceLevel alpha, QuantileMethod method)
{
    return sorted_quantile(sorted, alpha.value(), method);
}

double value_at_risk(const LossSample& sample, ConfidenceLevel alpha, QuantileMethod method)
{
    return value_at_risk(sample.losses(), alpha, method);
}

double expected_shortfall(std::span<const double> sorted, ConfidenceLevel alpha)
{
    require_sorted_nonempty(sorted);
    const std::size_t m = tail_count(alpha.value(), sorted.size());
    const auto tail = sorted.last(m);
    // Tail mean of an ascending run never falls below its first element.
    return std::max(tail.front(), compensated_sum(tail) / static_cast<double>(m));
}

double expected_shortfall(const LossSample& sample, ConfidenceLevel alpha)
{
    return expected_shortfall(sample.losses(), alpha);
}

double WeightingFunction::grid_mass(std::size_t i, std::size_t n) const
{
    const auto nd = static_cast<double>(n);
    return mass(static_cast<double>(i - 1) / nd, static_cast<double>(i) / nd);
}

double ExponentialWeighting::density(double p) const
{
    return k_ * std::exp(-k_ * (1.0 - p)) / -std::expm1(-k_);
}

double ExponentialWeighting::mass(double lo, double hi) const
{
    if (hi <= lo)
        return 0.0;
    return std::exp(-k_ * (1.0 - hi)) * -std::expm1(-k_ * (hi - lo)) / -std::expm1(-k_);
}

double ExponentialWeighting::grid_mass(std::size_t i, std::size_t n) const
{
    // e^{-k(n-i)/n} (1 - e^{-k/n}) / (1 - e^{-k}); the integer gap n - i keeps
    // the exponent exact for large n.
    const auto nd = static_cast<double>(n);
    const double head = std::exp(-k_ * static_cast<double>(n - i) / nd);
    return head * (std::expm1(-k_ / nd) / std::expm1(-k_));
}

std::string ExponentialWeighting::name() const
{
    return fmt::format("exponential(k={})", k_);
}

double exponential_weight(double p, RiskAversion k)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(fmt::format("cumulative probability must lie in [0, 1], got {}", p));
    return ExponentialWeighting(k).density(p);
}

SpectralWeights::SpectralWeights(std::vector<double> weights, std::optional<double> k)
    : weights_(std::move(weights)), k_(k)
{
}

SpectralWeights discretize(const WeightingFunction& phi, std::size_t n)
{
    if (n == 0)
        throw std::invalid_argument("spectral weights need n >= 1");
    std::vector<double> w(n);
    for (std::size_t i = 1; i <= n; ++i)
        w[i - 1] = phi.grid_mass(i, n);
    return SpectralWeights(std::move(w));
}

SpectralWeights spectral_weights(std::size_t n, RiskAversion k)
{
    if (n == 0)
        throw std::invalid_argument("spectral weights need n >= 1");
    const ExponentialWeighting phi(k);
    std::vector<double> w(n);
    for (std::size_t i = 1; i <= n; ++i)
        w[i - 1] = phi.grid_mass(i, n);
    return SpectralWeights(std::move(w), k.value());
}

double spectral_risk(std::span<const double> sorted, const SpectralWeights& weights)
{
    require_sorted_nonempty(sorted);
    if (weights.size() != sorted.size())
        throw std::invalid_argument(
            fmt::format("weight count {} does not match sample size {}", weights.size(), sorted.size()));
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double term = weights[i] * sorted[i];
        const double t = sum + term;
        carry += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
        sum = t;
    }
    return std::clamp(sum + carry, sorted.front(), sorted.back());
}

double spectral_risk(std::span<const double> sorted, RiskAversion k)
{
    if (k.value() < kMinRiskAversion)
        throw std::invalid_argument(fmt::format(
            "risk aversion {} is below {}; the k -> 0 limit of the spectral measure is the sample mean",
            k.value(), kMinRiskAversion));
    return spectral_risk(sorted, spectral_weights(sorted.size(), k));
}

double spectral_risk(const LossSample& sample, RiskAversion k)
{
    return spectral_risk(sample.losses(), k);
}

WeightingReport validate_weighting(const SpectralWeights& weights)
{
    WeightingReport report;
    const auto w = weights.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (report.non_negative.passed && !(w[i] >= 0.0)) {
            report.non_negative.passed = false;
            report.non_negative.first_violation = i + 1;
        }
        if (report.nondecreasing.passed && i > 0 && w[i] < w[i - 1]) {
            report.nondecreasing.passed = false;
            report.nondecreasing.first_violation = i + 1;
        }
    }
    report.sum = compensated_sum(w);
    report.unit_sum.passed = !w.empty() && std::abs(report.sum - 1.0) <= kUnitSumTolerance;
    return report;
}

double compensated_sum(std::span<const double> values) noexcept
{
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

} // namespace futrisk
