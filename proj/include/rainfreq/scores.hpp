#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/gev.hpp"
#include "rainfreq/math.hpp"
#include "rainfreq/rng.hpp"

namespace rainfreq {

/// One station-year's posterior predictive: a GEV parameter triple per
/// retained MCMC draw.
struct PredictiveEnsemble {
    std::vector<GevParams> draws;

    void validate() const {
        if (draws.empty()) throw input_error("PredictiveEnsemble: empty");
        for (const auto& d : draws)
            if (!d.valid()) throw input_error("PredictiveEnsemble: invalid draw");
    }
};

/// Negative log of the posterior predictive density, via log-sum-exp over
/// the draw mixture. +inf when y lies outside the support of every draw.
inline double log_score(double y, const PredictiveEnsemble& ens) {
    ens.validate();
    std::vector<double> lp;
    lp.reserve(ens.draws.size());
    for (const auto& d : ens.draws) lp.push_back(gev_logpdf(y, d));
    const double lse = logsumexp(lp);
    if (lse == -kInf) return kInf;
    return -(lse - std::log(static_cast<double>(lp.size())));
}

/// Pinball loss rho_p(u): p*u for u > 0, (p-1)*u otherwise.
inline double pinball_loss(double u, double p) {
    return u > 0.0 ? p * u : (p - 1.0) * u;
}

/// Mean pinball loss of the observation against each draw's p-quantile.
inline double quantile_score(double y, const PredictiveEnsemble& ens, double p) {
    ens.validate();
    if (!(p > 0.0 && p < 1.0)) throw input_error("quantile_score: p must lie in (0,1)");
    double s = 0.0;
    for (const auto& d : ens.draws) s += pinball_loss(y - gev_quantile(p, d), p);
    return s / static_cast<double>(ens.draws.size());
}

struct CrpsEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo CRPS in the energy form E|X - y| - 1/2 E|X - X'| for any
/// sampler of the predictive distribution. The per-pair terms give the
/// estimator's standard error directly.
inline CrpsEstimate crps_mc(double y, const std::function<double(Rng&)>& draw_predictive,
                            int mc_draws, Rng& rng) {
    if (mc_draws < 2) throw input_error("crps: need at least 2 Monte-Carlo draws");
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < mc_draws; ++i) {
        const double x = draw_predictive(rng);
        const double x2 = draw_predictive(rng);
        const double term = std::fabs(x - y) - 0.5 * std::fabs(x - x2);
        sum += term;
        sum_sq += term * term;
    }
    const double n = static_cast<double>(mc_draws);
    CrpsEstimate out;
    out.value = sum / n;
    const double var = (sum_sq - sum * sum / n) / (n - 1.0);
    out.std_error = std::sqrt(std::max(var, 0.0) / n);
    return out;
}

/// CRPS of the GEV mixture: draw a member uniformly, then inverse-transform.
inline CrpsEstimate crps(double y, const PredictiveEnsemble& ens, int mc_draws = 4000,
                         std::uint64_t seed = 0) {
    ens.validate();
    Rng rng(seed, /*stream=*/0x43525053u);
    auto draw = [&ens](Rng& r) {
        const GevParams& d = ens.draws[r.index(ens.draws.size())];
        return gev_quantile(r.uniform(), d);
    };
    return crps_mc(y, draw, mc_draws, rng);
}

struct PitHistogram {
    std::vector<int> counts;    ///< 10 equal bins over [0, 1]
    std::vector<double> values; ///< one PIT value per observation
    double max_abs_deviation = 0.0; ///< max |count - N/10|

    int n_observations() const {
        int n = 0;
        for (int c : counts) n += c;
        return n;
    }
};

/// PIT value per observation = mean posterior CDF at the observation,
/// binned into 10 equal bins. Near-uniform counts indicate calibration.
inline PitHistogram pit_histogram(const std::vector<double>& observations,
                                  const std::vector<PredictiveEnsemble>& ensembles) {
    if (observations.size() != ensembles.size())
        throw input_error("pit_histogram: observation/ensemble count mismatch");
    PitHistogram h;
    h.counts.assign(10, 0);
    for (std::size_t i = 0; i < observations.size(); ++i) {
        ensembles[i].validate();
        double acc = 0.0;
        for (const auto& d : ensembles[i].draws) acc += gev_cdf(observations[i], d);
        const double pit = acc / static_cast<double>(ensembles[i].draws.size());
        h.values.push_back(pit);
        int bin = static_cast<int>(pit * 10.0);
        bin = std::min(std::max(bin, 0), 9);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    const double expect = static_cast<double>(observations.size()) / 10.0;
    for (int c : h.counts)
        h.max_abs_deviation = std::max(h.max_abs_deviation, std::fabs(c - expect));
    return h;
}

} // namespace rainfreq
