#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/gev.hpp"
#include "rainfreq/gp.hpp"
#include "rainfreq/models.hpp"
#include "rainfreq/rng.hpp"
#include "rainfreq/sampler.hpp"
#include "rainfreq/scores.hpp"

namespace rainfreq {

/// Chain-major flatten of the post-warmup draws, optionally thinned by a
/// deterministic stride down to at most max_draws.
inline std::vector<Eigen::VectorXd> flatten_draws(const PosteriorSamples& samples,
                                                  std::size_t max_draws = 0) {
    std::vector<Eigen::VectorXd> all;
    all.reserve(samples.total_draws());
    for (const auto& c : samples.chains())
        for (const auto& d : c.draws) all.push_back(d);
    if (max_draws == 0 || all.size() <= max_draws) return all;
    std::vector<Eigen::VectorXd> out;
    out.reserve(max_draws);
    const double stride = static_cast<double>(all.size()) / static_cast<double>(max_draws);
    for (std::size_t i = 0; i < max_draws; ++i)
        out.push_back(all[static_cast<std::size_t>(i * stride)]);
    return out;
}

/// Predictive ensemble at a training station for one year.
inline PredictiveEnsemble station_ensemble(const ModelSpec& spec,
                                           const std::vector<Eigen::VectorXd>& draws,
                                           std::size_t station, int year) {
    PredictiveEnsemble ens;
    ens.draws.reserve(draws.size());
    for (const auto& t : draws) ens.draws.push_back(spec.assemble_gev_params(t, station, year));
    return ens;
}

/// Latent-field values carried to target sites, one row block per draw.
/// For the SVC family the four rows are mu0, log_sigma0, beta_mu,
/// beta_sigma; the pooled family uses two rows (mu, log_sigma) and zero
/// coefficient rows are implied.
struct ConditionedFieldDraws {
    std::vector<Eigen::MatrixXd> fields; ///< per draw: n_fields x n_targets
    std::vector<double> xi;              ///< decoded shape per draw
};

/// Condition every spatial field of a fitted pooled/SVC model to target
/// sites, sampling the Gaussian conditional jointly across targets per
/// draw. Held-out prediction must see only training-site field values.
inline ConditionedFieldDraws condition_fields(const ModelSpec& spec,
                                              const std::vector<Eigen::VectorXd>& draws,
                                              const SiteSet& targets, Rng& rng) {
    const ModelFamily fam = spec.family();
    if (fam == ModelFamily::NonpooledNonstationary)
        throw input_error("condition_fields: the nonpooled family has no spatial layer");
    const int n_fields = fam == ModelFamily::PooledStationary ? 2 : 4;
    const auto n = static_cast<Eigen::Index>(spec.n_stations());
    const auto m = static_cast<Eigen::Index>(targets.size());

    ConditionedFieldDraws out;
    out.fields.reserve(draws.size());
    out.xi.reserve(draws.size());
    for (const auto& theta : draws) {
        Eigen::MatrixXd f(n_fields, m);
        for (int k = 0; k < n_fields; ++k) {
            const KernelConfig cfg = spec.kernel_config(theta, k);
            const Eigen::VectorXd observed = theta.segment(static_cast<Eigen::Index>(k) * n, n);
            const GpConditional cond = gp_condition(observed, spec.data().sites(), targets, cfg);
            // sample the conditional via its Cholesky factor; the tiny ridge
            // covers the near-zero variances that arise at training sites
            Eigen::LLT<Eigen::MatrixXd> llt(
                cond.cov + 1e-12 * cfg.alpha * cfg.alpha *
                               Eigen::MatrixXd::Identity(m, m));
            Eigen::VectorXd z(m);
            for (Eigen::Index i = 0; i < m; ++i) z[i] = rng.normal();
            if (llt.info() == Eigen::Success)
                f.row(k) = (cond.mean + llt.matrixL() * z).transpose();
            else
                f.row(k) = cond.mean.transpose(); // degenerate: fall back to the mean
        }
        out.fields.push_back(std::move(f));
        out.xi.push_back(std::exp(theta[static_cast<Eigen::Index>(spec.xi_offset())]));
    }
    return out;
}

/// Decode GEV parameters at a conditioned target for covariate value x.
inline GevParams conditioned_params(const ConditionedFieldDraws& cd, std::size_t draw,
                                    std::size_t target, double x, ModelFamily fam) {
    const auto& f = cd.fields[draw];
    const auto j = static_cast<Eigen::Index>(target);
    GevParams p;
    if (fam == ModelFamily::PooledStationary) {
        p.mu = f(0, j);
        p.sigma = std::exp(f(1, j));
    } else {
        p.mu = f(0, j) + f(2, j) * x;
        p.sigma = std::exp(f(1, j) + f(3, j) * x);
    }
    p.xi = cd.xi[draw];
    return p;
}

inline PredictiveEnsemble conditioned_ensemble(const ConditionedFieldDraws& cd,
                                               std::size_t target, double x, ModelFamily fam) {
    PredictiveEnsemble ens;
    ens.draws.reserve(cd.fields.size());
    for (std::size_t d = 0; d < cd.fields.size(); ++d)
        ens.draws.push_back(conditioned_params(cd, d, target, x, fam));
    return ens;
}

/// Per-location, per-year, per-return-period posterior summary.
struct ReturnLevelEstimate {
    std::string location_id;
    double lon = 0.0, lat = 0.0;
    int year = 0;
    double return_period = 0.0;
    double mean = 0.0;
    double lower = 0.0; ///< 2.5% posterior quantile
    double upper = 0.0; ///< 97.5% posterior quantile
};

inline double empirical_quantile(std::vector<double> v, double p) {
    if (v.empty()) throw input_error("empirical_quantile: empty sample");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    const double w = h - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[lo + 1] * w;
}

/// Summarize per-draw return levels into mean and a central 95% interval.
inline ReturnLevelEstimate summarize_levels(std::vector<double> levels) {
    if (levels.empty()) throw input_error("summarize_levels: no draws");
    ReturnLevelEstimate e;
    double s = 0.0;
    for (double v : levels) s += v;
    e.mean = s / static_cast<double>(levels.size());
    e.lower = empirical_quantile(levels, 0.025);
    e.upper = empirical_quantile(std::move(levels), 0.975);
    return e;
}

/// Return levels per draw for an ensemble of parameter draws.
inline std::vector<double> ensemble_return_levels(const PredictiveEnsemble& ens, double t_years) {
    const ReturnPeriod period(t_years);
    std::vector<double> out;
    out.reserve(ens.draws.size());
    for (const auto& p : ens.draws) out.push_back(return_level(period, p));
    return out;
}

} // namespace rainfreq
