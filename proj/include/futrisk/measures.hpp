// measures.hpp
// Non-parametric risk estimators over a sorted loss sample: empirical
// quantile (VaR), expected shortfall, and spectral risk measures built from
// a risk-aversion weighting function.
//
// Losses follow the usual sign convention: positive values are actual
// losses, negative values are profits. A long position loses when the
// return is negative, so its losses are the negated returns; a short
// position's losses are the returns themselves.

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "futrisk/ingest.hpp"

namespace futrisk {

enum class Position { Long, Short };

std::string_view to_string(Position position) noexcept;

/// How an empirical quantile is read off the order statistics.
enum class QuantileMethod {
    OrderStatistic,     ///< L_(ceil(alpha * n)), 1-indexed.
    LinearInterpolation ///< Interpolate at rank 1 + alpha * (n - 1).
};

std::string_view to_string(QuantileMethod method) noexcept;

/// Confidence level alpha, strictly inside (0, 1).
class ConfidenceLevel {
public:
    explicit ConfidenceLevel(double alpha);
    double value() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Coefficient of absolute risk aversion k > 0.
class RiskAversion {
public:
    explicit RiskAversion(double k);
    double value() const noexcept { return k_; }

private:
    double k_;
};

/// Losses for one position side, kept sorted ascending.
class LossSample {
public:
    /// Sorts the input. Throws std::invalid_argument if empty or non-finite.
    LossSample(std::vector<double> losses, Position position, std::string source_label = {});

    std::span<const double> losses() const noexcept { return losses_; }
    std::size_t size() const noexcept { return losses_.size(); }
    Position position() const noexcept { return position_; }
    const std::string& source_label() const noexcept { return label_; }

    double operator[](std::size_t i) const noexcept { return losses_[i]; }
    double min() const noexcept { return losses_.front(); }
    double max() const noexcept { return losses_.back(); }
    double mean() const noexcept;

private:
    std::vector<double> losses_;
    Position position_;
    std::string label_;
};

LossSample to_losses(const ReturnSeries& series, Position position);
LossSample to_losses(std::span<const double> returns, Position position, std::string source_label = {});

// Rank helpers shared by the quantile and tail estimators. alpha * n is
// snapped to the nearest integer when within rounding distance of it, so
// e.g. 0.95 * 100 is treated as exactly 95.

/// 1-indexed rank ceil(alpha * n), clamped to [1, n].
std::size_t quantile_rank(double alpha, std::size_t n) noexcept;
/// Tail count ceil((1 - alpha) * n), clamped to [1, n].
std::size_t tail_count(double alpha, std::size_t n) noexcept;

/// Quantile of an ascending-sorted, nonempty span. alpha must lie in [0, 1].
double sorted_quantile(std::span<const double> sorted, double alpha, QuantileMethod method);

double empirical_quantile(const LossSample& sample, ConfidenceLevel alpha,
                          QuantileMethod method = QuantileMethod::OrderStatistic);

/// Value-at-Risk: the alpha-quantile of the loss distribution.
double value_at_risk(const LossSample& sample, ConfidenceLevel alpha,
                     QuantileMethod method = QuantileMethod::OrderStatistic);
double value_at_risk(std::span<const double> sorted, ConfidenceLevel alpha,
                     QuantileMethod method = QuantileMethod::OrderStatistic);

/// Expected shortfall: mean of the worst m = ceil((1 - alpha) n) losses.
double expected_shortfall(const LossSample& sample, ConfidenceLevel alpha);
double expected_shortfall(std::span<const double> sorted, ConfidenceLevel alpha);

/// A risk-aversion function phi on [0, 1] together with its integral over
/// sub-intervals. New spectral families (power, HARA, ...) plug in here.
class WeightingFunction {
public:
    virtual ~WeightingFunction() = default;

    virtual double density(double p) const = 0;
    /// Integral of phi over [lo, hi].
    virtual double mass(double lo, double hi) const = 0;
    /// Integral of phi over [(i - 1) / n, i / n] for 1 <= i <= n.
    virtual double grid_mass(std::size_t i, std::size_t n) const;
    virtual std::string name() const = 0;
};

/// phi(p) = k e^{-k(1-p)} / (1 - e^{-k}).
class ExponentialWeighting final : public WeightingFunction {
public:
    explicit ExponentialWeighting(RiskAversion k) : k_(k.value()) {}

    double density(double p) const override;
    double mass(double lo, double hi) const override;
    double grid_mass(std::size_t i, std::size_t n) const override;
    std::string name() const override;

    double k() const noexcept { return k_; }

private:
    double k_;
};

double exponential_weight(double p, RiskAversion k);

/// Per-order-statistic weights: entry i (0-based) multiplies L_(i+1).
class SpectralWeights {
public:
    /// Hand-built weights, not checked; see validate_weighting().
    explicit SpectralWeights(std::vector<double> weights, std::optional<double> k = std::nullopt);

    std::span<const double> weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return weights_.size(); }
    std::optional<double> k() const noexcept { return k_; }
    double operator[](std::size_t i) const noexcept { return weights_[i]; }

private:
    std::vector<double> weights_;
    std::optional<double> k_;
};

/// w_i = integral of phi over [(i-1)/n, i/n].
SpectralWeights discretize(const WeightingFunction& phi, std::size_t n);

/// Exact interval integrals of the exponential risk-aversion function.
SpectralWeights spectral_weights(std::size_t n, RiskAversion k);

/// Smallest k accepted by spectral_risk(); below it use the sample mean.
inline constexpr double kMinRiskAversion = 1e-8;

/// sum_i w_i L_(i) with exponential weights.
double spectral_risk(const LossSample& sample, RiskAversion k);
double spectral_risk(std::span<const double> sorted, RiskAversion k);
/// Weighted sum with precomputed weights; sizes must match.
double spectral_risk(std::span<const double> sorted, const SpectralWeights& weights);

struct ConditionCheck {
    bool passed = true;
    /// 1-based index of the first offending weight, where one exists.
    std::optional<std::size_t> first_violation;
};

struct WeightingReport {
    ConditionCheck non_negative;
    ConditionCheck unit_sum;
    ConditionCheck nondecreasing;
    double sum = 0.0;

    bool all_passed() const noexcept { return non_negative.passed && unit_sum.passed && nondecreasing.passed; }
};

inline constexpr double kUnitSumTolerance = 1e-9;

/// Checks the three coherence conditions on discretized weights.
WeightingReport validate_weighting(const SpectralWeights& weights);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values) noexcept;

} // namespace futrisk
