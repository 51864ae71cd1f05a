#include "futrisk/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "futrisk/random.hpp"

namespace futrisk {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Nodes and weights of 10-point Gauss-Legendre on [-1, 1] (positive half).
constexpr std::array<double, 5> kGlNodes{0.1488743389816312108848260, 0.4333953941292471907992659,
                                         0.6794095682990244062343274, 0.8650633666889845107320967,
                                         0.9739065285171717200779640};
constexpr std::array<double, 5> kGlWeights{0.2955242247147528701738930, 0.2692667193099963550912269,
                                           0.2190863625159820439955349, 0.1494513491505805931457763,
                                           0.0666713443086881375935688};

struct PanelSums {
    double value = 0.0;
    double magnitude = 0.0;
};

template <class F>
PanelSums composite_gauss_legendre(F&& f, double a, double b, std::size_t panels)
{
    PanelSums out;
    double carry = 0.0;
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t j = 0; j < panels; ++j) {
        const double mid = a + (static_cast<double>(j) + 0.5) * h;
        const double half = 0.5 * h;
        double s = 0.0;
        double m = 0.0;
        for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
            const double lo = f(mid - half * kGlNodes[i]);
            const double hi = f(mid + half * kGlNodes[i]);
            s += kGlWeights[i] * (lo + hi);
            m += kGlWeights[i] * (std::abs(lo) + std::abs(hi));
        }
        const double term = half * s;
        const double t = out.value + term;
        carry += std::abs(out.value) >= std::abs(term) ? (out.value - t) + term : (term - t) + out.value;
        out.value = t;
        out.magnitude += half * m;
    }
    out.value += carry;
    return out;
}

constexpr double kUnderflowRatio = 1e-16;
constexpr double kEdgeProbability = 1e-15;
constexpr double kRelativeTolerance = 1e-9;
constexpr int kMaxRefinements = 14;

} // namespace

void SyntheticSpec::validate() const
{
    std::vector<std::string> problems;
    if (n < 1)
        problems.push_back("n must be at least 1");
    std::visit(Overloaded{
                   [&](const NormalParams& p) {
                       if (!std::isfinite(p.mu))
                           problems.push_back("normal mu must be finite");
                       if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
                           problems.push_back(fmt::format("normal sigma must be positive, got {}", p.sigma));
                   },
                   [&](const StudentTParams& p) {
                       if (!(p.dof > 2.0) || !std::isfinite(p.dof))
                           problems.push_back(fmt::format("student-t dof must exceed 2, got {}", p.dof));
                       if (!(p.scale > 0.0) || !std::isfinite(p.scale))
                           problems.push_back(fmt::format("student-t scale must be positive, got {}", p.scale));
                   },
                   [&](const SkewedMixParams& p) {
                       if (!(p.weight >= 0.0 && p.weight <= 1.0))
                           problems.push_back(fmt::format("mixture weight must lie in [0, 1], got {}", p.weight));
                       if (!std::isfinite(p.mu1) || !std::isfinite(p.mu2))
                           problems.push_back("mixture means must be finite");
                       if (!(p.sigma1 > 0.0) || !(p.sigma2 > 0.0) || !std::isfinite(p.sigma1) ||
                           !std::isfinite(p.sigma2))
                           problems.push_back("mixture sigmas must be positive");
                   },
               },
               distribution);
    if (!problems.empty())
        throw std::invalid_argument(fmt::format("invalid synthetic spec: {}", fmt::join(problems, "; ")));
}

std::string describe(const Distribution& distribution)
{
    return std::visit(Overloaded{
                          [](const NormalParams& p) { return fmt::format("normal(mu={}, sigma={})", p.mu, p.sigma); },
                          [](const StudentTParams& p) {
                              return fmt::format("student-t(dof={}, scale={})", p.dof, p.scale);
                          },
                          [](const SkewedMixParams& p) {
                              return fmt::format("mix(weight={}, mu1={}, sigma1={}, mu2={}, sigma2={})", p.weight,
                                                 p.mu1, p.sigma1, p.mu2, p.sigma2);
                          },
                      },
                      distribution);
}

ReturnSeries generate(const SyntheticSpec& spec, const std::string& label)
{
    spec.validate();
    CounterStream stream(derive_key(spec.seed, {}));

    std::vector<double> values(spec.n);
    std::visit(Overloaded{
                   [&](const NormalParams& p) {
                       std::normal_distribution<double> dist(p.mu, p.sigma);
                       for (double& v : values)
                           v = dist(stream);
                   },
                   [&](const StudentTParams& p) {
                       std::student_t_distribution<double> dist(p.dof);
                       for (double& v : values)
                           v = p.scale * dist(stream);
                   },
                   [&](const SkewedMixParams& p) {
                       std::normal_distribution<double> first(p.mu1, p.sigma1);
                       std::normal_distribution<double> second(p.mu2, p.sigma2);
                       for (double& v : values)
                           v = stream.uniform() < p.weight ? first(stream) : second(stream);
                   },
               },
               spec.distribution);

    ReturnSeries series{label, {}};
    series.observations.reserve(spec.n);
    const std::chrono::sys_days start{std::chrono::year{1991} / std::chrono::January / 2};
    for (std::size_t i = 0; i < spec.n; ++i)
        series.observations.push_back({Date{start + std::chrono::days{static_cast<long>(i)}}, values[i]});
    return series;
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0)
            return -std::numeric_limits<double>::infinity();
        if (p == 1.0)
            return std::numeric_limits<double>::infinity();
        throw std::invalid_argument(fmt::format("normal quantile needs p in [0, 1], got {}", p));
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                     1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
                  4.6303378461565452959) * r + 1.42343711074968357734) /
                (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r + 0.0151986665636164571966) *
                         r + 0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) *
                      r + 2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                      0.0012426609473880784386) * r + 0.026532189526576123093) * r + 0.29656057182850489123) * r +
                   1.7848265399172913358) * r + 5.4637849111641143699) * r + 6.6579046435011037772) /
                (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) *
                         r + 7.868691311456132591e-4) * r + 0.0148753612908506148525) * r +
                      0.13692988092273580531) * r + 0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

double normal_pdf(double z) noexcept
{
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) noexcept
{
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_var_oracle(double mu, double sigma, double alpha)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument(fmt::format("sigma must be positive, got {}", sigma));
    return mu + sigma * normal_quantile(ConfidenceLevel(alpha).value());
}

double normal_es_oracle(double mu, double sigma, double alpha)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument(fmt::format("sigma must be positive, got {}", sigma));
    const double z = normal_quantile(ConfidenceLevel(alpha).value());
    return mu + sigma * normal_pdf(z) / (1.0 - alpha);
}

QuadratureResult srm_quadrature(const std::function<double(double)>& quantile_fn, RiskAversion k,
                                std::size_t panels)
{
    if (panels < 100)
        throw std::invalid_argument(fmt::format("quadrature needs at least 100 panels, got {}", panels));
    const ExponentialWeighting phi(k);
    const double kv = k.value();

    // phi(p) / phi(1) = e^{-k (1 - p)} drops below kUnderflowRatio for 1 - p > cut.
    const double cut = -std::log(kUnderflowRatio) / kv;
    const double p_lo = std::max(kEdgeProbability, 1.0 - cut);
    const double p_hi = 1.0 - kEdgeProbability;
    const double x_lo = std::log(p_lo / (1.0 - p_lo));
    const double x_hi = std::log(p_hi / (1.0 - p_hi));

    bool bad_value = false;
    auto integrand = [&](double x) {
        // p and 1 - p from the logistic map without cancellation.
        const double e = std::exp(-std::abs(x));
        const double small = e / (1.0 + e);
        const double p = x >= 0.0 ? 1.0 - small : small;
        const double jacobian = small * (1.0 - small);
        const double q = quantile_fn(p);
        if (!std::isfinite(q))
            bad_value = true;
        return q * phi.density(p) * jacobian;
    };

    PanelSums previous = composite_gauss_legendre(integrand, x_lo, x_hi, panels);
    for (int level = 0; level < kMaxRefinements; ++level) {
        panels *= 2;
        const PanelSums current = composite_gauss_legendre(integrand, x_lo, x_hi, panels);
        if (bad_value)
            throw QuadratureError("quantile function returned a non-finite value inside (0, 1)");
        const double error = std::abs(current.value - previous.value);
        if (error <= kRelativeTolerance * std::max(current.magnitude, std::numeric_limits<double>::min()))
            return {current.value, error, panels};
        previous = current;
    }
    throw QuadratureError(fmt::format("quadrature did not converge after {} refinements (last estimate {})",
                                      kMaxRefinements, previous.value));
}

double srm_quadrature_oracle(const std::function<double(double)>& quantile_fn, RiskAversion k, std::size_t panels)
{
    return srm_quadrature(quantile_fn, k, panels).value;
}

} // namespace futrisk
