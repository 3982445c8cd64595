#pragma once

#include <array>
#include <cmath>

#include "rainfreq/errors.hpp"
#include "rainfreq/math.hpp"

namespace rainfreq {

/// GEV parameter triple. Units are inches throughout the project.
struct GevParams {
    double mu = 0.0;    ///< location
    double sigma = 1.0; ///< scale, > 0
    double xi = 0.0;    ///< shape

    bool valid() const {
        return std::isfinite(mu) && std::isfinite(sigma) && std::isfinite(xi) && sigma > 0.0;
    }

    /// Support predicate: 1 + xi (y - mu) / sigma > 0 (all y when xi = 0).
    bool in_support(double y) const {
        return 1.0 + xi * (y - mu) / sigma > 0.0;
    }
};

/// Return period in years with its non-exceedance probability.
struct ReturnPeriod {
    double years;

    explicit ReturnPeriod(double t) : years(t) {
        if (!(t > 1.0) || !std::isfinite(t)) throw input_error("return period must exceed 1 year");
    }
    double probability() const { return 1.0 - 1.0 / years; }
};

// Below this |xi| the (1+xi z)^(-1/xi) form loses digits to cancellation;
// the Gumbel branch keeps continuity error under 1e-5.
inline constexpr double kGumbelSwitch = 1e-6;

namespace detail {
inline void check_gev_inputs(double y, const GevParams& p) {
    if (!std::isfinite(y)) throw input_error("gev: non-finite observation");
    if (!p.valid()) throw input_error("gev: invalid parameters (need finite values, sigma > 0)");
}
} // namespace detail

inline double gev_logpdf(double y, const GevParams& p) {
    detail::check_gev_inputs(y, p);
    const double z = (y - p.mu) / p.sigma;
    if (std::fabs(p.xi) < kGumbelSwitch) {
        return -std::log(p.sigma) - z - std::exp(-z);
    }
    const double t = 1.0 + p.xi * z;
    if (t <= 0.0) return -kInf;
    const double log_t = std::log(t);
    const double inv_xi = 1.0 / p.xi;
    return -std::log(p.sigma) - (inv_xi + 1.0) * log_t - std::exp(-inv_xi * log_t);
}

inline double gev_cdf(double y, const GevParams& p) {
    detail::check_gev_inputs(y, p);
    const double z = (y - p.mu) / p.sigma;
    if (std::fabs(p.xi) < kGumbelSwitch) {
        return std::exp(-std::exp(-z));
    }
    const double t = 1.0 + p.xi * z;
    if (t <= 0.0) return p.xi > 0.0 ? 0.0 : 1.0;
    return std::exp(-std::pow(t, -1.0 / p.xi));
}

inline double gev_quantile(double prob, const GevParams& p) {
    if (!(prob > 0.0 && prob < 1.0)) throw input_error("gev_quantile: p must lie in (0,1)");
    if (!p.valid()) throw input_error("gev: invalid parameters (need finite values, sigma > 0)");
    const double w = -std::log(prob); // exp(-w) = prob
    if (std::fabs(p.xi) < kGumbelSwitch) {
        return p.mu - p.sigma * std::log(w);
    }
    return p.mu + p.sigma * (std::pow(w, -p.xi) - 1.0) / p.xi;
}

inline double return_level(const ReturnPeriod& period, const GevParams& p) {
    return gev_quantile(period.probability(), p);
}

/// d logpdf / d(mu, sigma, xi) at a point strictly inside the support.
/// The xi component on the Gumbel branch is the analytic series limit.
inline std::array<double, 3> gev_logpdf_grad(double y, const GevParams& p) {
    detail::check_gev_inputs(y, p);
    const double z = (y - p.mu) / p.sigma;
    const double s = p.sigma;

    if (std::fabs(p.xi) < kGumbelSwitch) {
        const double e = std::exp(-z);
        const double d_mu = (1.0 - e) / s;
        const double d_sigma = (-1.0 + z - z * e) / s;
        const double d_xi = 0.5 * z * z * (1.0 - e) - z;
        return {d_mu, d_sigma, d_xi};
    }

    const double t = 1.0 + p.xi * z;
    if (t <= 0.0) throw numerical_error("gev_logpdf_grad: point on or outside support boundary");
    const double log_t = std::log(t);
    const double inv_xi = 1.0 / p.xi;
    const double u = std::exp(-inv_xi * log_t); // t^(-1/xi)
    const double u1 = u / t;                    // t^(-1/xi - 1)

    const double d_mu = ((1.0 + p.xi) / t - u1) / s;
    const double d_sigma = (-1.0 + (1.0 + p.xi) * z / t - z * u1) / s;
    const double d_xi = (1.0 - u) * log_t / (p.xi * p.xi) - (1.0 + inv_xi) * z / t + z * u1 * inv_xi;
    return {d_mu, d_sigma, d_xi};
}

} // namespace rainfreq
