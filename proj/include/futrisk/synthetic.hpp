// synthetic.hpp
// Synthetic return generators and closed-form / numerical oracles used to
// validate the empirical estimators when real futures data is unavailable.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

#include "futrisk/ingest.hpp"
#include "futrisk/measures.hpp"

namespace futrisk {

struct NormalParams {
    double mu = 0.0;
    double sigma = 1.0;
};

/// Student-t with `dof` degrees of freedom, multiplied by `scale`.
struct StudentTParams {
    double dof = 4.0;
    double scale = 1.0;
};

/// Two-component normal mixture: with probability `weight` draw from
/// N(mu1, sigma1), otherwise from N(mu2, sigma2). A small, shifted,
/// wide second component produces skewed fat tails.
struct SkewedMixParams {
    double weight = 0.9;
    double mu1 = 0.0;
    double sigma1 = 1.0;
    double mu2 = -1.0;
    double sigma2 = 3.0;
};

using Distribution = std::variant<NormalParams, StudentTParams, SkewedMixParams>;

struct SyntheticSpec {
    Distribution distribution = NormalParams{};
    std::size_t n = 0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument listing every bad parameter.
    void validate() const;
};

std::string describe(const Distribution& distribution);

/// n i.i.d. draws dated on consecutive calendar days from 1991-01-02.
ReturnSeries generate(const SyntheticSpec& spec, const std::string& label = "synthetic");

/// Standard normal quantile (Wichura's AS241 rational approximation, ~1e-16 relative).
double normal_quantile(double p);
double normal_pdf(double z) noexcept;
double normal_cdf(double z) noexcept;

/// VaR of N(mu, sigma) losses: mu + sigma z_alpha.
double normal_var_oracle(double mu, double sigma, double alpha);
/// ES of N(mu, sigma) losses: mu + sigma pdf(z_alpha) / (1 - alpha).
double normal_es_oracle(double mu, double sigma, double alpha);

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t panels = 0;
};

/// Integral of q(p) phi_k(p) over (0, 1) by composite 10-point Gauss-Legendre
/// on the logit scale, doubling the panel count until two successive
/// estimates agree to 1e-9 relative. The range is truncated below where
/// phi(p) < 1e-16 phi(1) and to p in [1e-15, 1 - 1e-15].
/// Throws QuadratureError when refinement stalls.
QuadratureResult srm_quadrature(const std::function<double(double)>& quantile_fn, RiskAversion k,
                                std::size_t panels = 128);

double srm_quadrature_oracle(const std::function<double(double)>& quantile_fn, RiskAversion k,
                             std::size_t panels = 128);

} // namespace futrisk
