#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "rainfreq/data.hpp"
#include "rainfreq/errors.hpp"
#include "rainfreq/gev.hpp"
#include "rainfreq/gp.hpp"
#include "rainfreq/log_density.hpp"
#include "rainfreq/math.hpp"
#include "rainfreq/rng.hpp"

namespace rainfreq {

enum class ModelFamily {
    PooledStationary,          ///< GEV(mu(s), sigma(s), xi), mu and log sigma fields GP-pooled
    NonpooledNonstationary,    ///< per-station regression on x(t), no spatial layer
    SpatiallyVaryingCovariates ///< intercept and coefficient fields GP-pooled, shared xi
};

inline const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::PooledStationary: return "pooled";
        case ModelFamily::NonpooledNonstationary: return "nonpooled";
        case ModelFamily::SpatiallyVaryingCovariates: return "svc";
    }
    return "?";
}

inline ModelFamily family_from_name(const std::string& s) {
    if (s == "pooled") return ModelFamily::PooledStationary;
    if (s == "nonpooled") return ModelFamily::NonpooledNonstationary;
    if (s == "svc") return ModelFamily::SpatiallyVaryingCovariates;
    throw input_error("unknown model family '" + s + "' (expected pooled|nonpooled|svc)");
}

struct PriorConfig {
    double location_intercept_mean = 5.0; ///< Normal(5, 5) on the location intercept
    double location_intercept_sd = 5.0;
    double log_scale_sd = 1.0;    ///< Normal(0, 1) on log scale intercepts
    double beta_sd = 1.0;         ///< Normal(0, 1) on regression coefficients
    double xi_sd = 0.5;           ///< Normal(0, 0.5) truncated to (0, inf) on the shape
    double kernel_alpha_shape = 5.0; ///< InverseGamma(5, 5) on kernel variance parameter
    double kernel_alpha_scale = 5.0;
    double kernel_rho_shape = 5.0; ///< Gamma(5, 1) on kernel length
    double kernel_rho_rate = 1.0;
    double jitter_rel = 1e-8; ///< GP nugget as a fraction of alpha^2
};

/// Latent fields that get their own GP and kernel hyperparameter pair.
enum class SvcField : int { Mu0 = 0, LogSigma0 = 1, BetaMu = 2, BetaSigma = 3 };

/// One model family bound to a dataset and priors; owns the unconstrained
/// parameter-vector layout. Immutable after construction, so evaluations may
/// run concurrently.
class ModelSpec {
public:
    ModelSpec(ModelFamily family, Dataset data, PriorConfig prior = {})
        : family_(family), data_(std::move(data)), prior_(prior) {
        n_ = data_.n_stations();
        switch (family_) {
            case ModelFamily::PooledStationary: dim_ = 2 * n_ + 5; break;
            case ModelFamily::NonpooledNonstationary: dim_ = 5 * n_; break;
            case ModelFamily::SpatiallyVaryingCovariates: dim_ = 4 * n_ + 9; break;
        }
        // flatten the ragged records once; the likelihood loop stays cache-friendly
        obs_station_.clear();
        obs_y_.clear();
        obs_x_.clear();
        for (std::size_t s = 0; s < n_; ++s) {
            for (const auto& o : data_.stations()[s].obs) {
                obs_station_.push_back(s);
                obs_y_.push_back(o.depth);
                obs_x_.push_back(data_.x_at(o.year));
            }
        }
    }

    ModelFamily family() const { return family_; }
    const Dataset& data() const { return data_; }
    const PriorConfig& prior() const { return prior_; }
    std::size_t n_stations() const { return n_; }
    std::size_t dim() const { return dim_; }

    // ---- layout ----------------------------------------------------------
    // pooled:     [mu(n), log_sigma(n), log_xi, la_mu, lr_mu, la_ls, lr_ls]
    // nonpooled:  [alpha_mu(n), log_alpha_sigma(n), beta_mu(n), beta_sigma(n), log_xi(n)]
    // svc:        [mu0(n), log_sigma0(n), beta_mu(n), beta_sigma(n), log_xi,
    //              (la, lr) for mu0, log_sigma0, beta_mu, beta_sigma]

    std::size_t field_offset(SvcField f) const { return static_cast<int>(f) * n_; }
    std::size_t xi_offset() const {
        switch (family_) {
            case ModelFamily::PooledStationary: return 2 * n_;
            case ModelFamily::NonpooledNonstationary: return 4 * n_;
            case ModelFamily::SpatiallyVaryingCovariates: return 4 * n_;
        }
        return 0;
    }
    std::size_t kernel_offset(int pair_index) const {
        switch (family_) {
            case ModelFamily::PooledStationary: return 2 * n_ + 1 + 2 * pair_index;
            case ModelFamily::SpatiallyVaryingCovariates: return 4 * n_ + 1 + 2 * pair_index;
            default: throw input_error("kernel_offset: family has no kernel hyperparameters");
        }
    }
    int n_kernel_pairs() const {
        switch (family_) {
            case ModelFamily::PooledStationary: return 2;
            case ModelFamily::NonpooledNonstationary: return 0;
            case ModelFamily::SpatiallyVaryingCovariates: return 4;
        }
        return 0;
    }

    KernelConfig kernel_config(const Eigen::VectorXd& theta, int pair_index) const {
        const std::size_t off = kernel_offset(pair_index);
        KernelConfig cfg;
        cfg.alpha = std::exp(theta[static_cast<Eigen::Index>(off)]);
        cfg.rho = std::exp(theta[static_cast<Eigen::Index>(off + 1)]);
        cfg.jitter = prior_.jitter_rel * cfg.alpha * cfg.alpha;
        return cfg;
    }

    std::vector<std::string> parameter_names() const {
        std::vector<std::string> names(dim_);
        const auto& ids = data_.sites().ids();
        auto sid = [&](std::size_t s) {
            return ids.empty() ? std::to_string(s) : ids[s];
        };
        switch (family_) {
            case ModelFamily::PooledStationary:
                for (std::size_t s = 0; s < n_; ++s) {
                    names[s] = "mu[" + sid(s) + "]";
                    names[n_ + s] = "log_sigma[" + sid(s) + "]";
                }
                names[2 * n_] = "log_xi";
                names[2 * n_ + 1] = "log_alpha_mu";
                names[2 * n_ + 2] = "log_rho_mu";
                names[2 * n_ + 3] = "log_alpha_log_sigma";
                names[2 * n_ + 4] = "log_rho_log_sigma";
                break;
            case ModelFamily::NonpooledNonstationary:
                for (std::size_t s = 0; s < n_; ++s) {
                    names[s] = "alpha_mu[" + sid(s) + "]";
                    names[n_ + s] = "log_alpha_sigma[" + sid(s) + "]";
                    names[2 * n_ + s] = "beta_mu[" + sid(s) + "]";
                    names[3 * n_ + s] = "beta_sigma[" + sid(s) + "]";
                    names[4 * n_ + s] = "log_xi[" + sid(s) + "]";
                }
                break;
            case ModelFamily::SpatiallyVaryingCovariates: {
                for (std::size_t s = 0; s < n_; ++s) {
                    names[s] = "mu0[" + sid(s) + "]";
                    names[n_ + s] = "log_sigma0[" + sid(s) + "]";
                    names[2 * n_ + s] = "beta_mu[" + sid(s) + "]";
                    names[3 * n_ + s] = "beta_sigma[" + sid(s) + "]";
                }
                names[4 * n_] = "log_xi";
                const char* fields[4] = {"mu0", "log_sigma0", "beta_mu", "beta_sigma"};
                for (int k = 0; k < 4; ++k) {
                    names[4 * n_ + 1 + 2 * k] = std::string("log_alpha_") + fields[k];
                    names[4 * n_ + 2 + 2 * k] = std::string("log_rho_") + fields[k];
                }
                break;
            }
        }
        return names;
    }

    /// Decode the GEV parameters for station s in year t.
    GevParams assemble_gev_params(const Eigen::VectorXd& theta, std::size_t s, int year) const {
        check_dim(theta);
        if (s >= n_) throw input_error("assemble_gev_params: station index out of range");
        const double x = data_.x_at(year);
        return assemble_from_x(theta, s, x);
    }

    GevParams assemble_from_x(const Eigen::VectorXd& theta, std::size_t s, double x) const {
        const auto si = static_cast<Eigen::Index>(s);
        const auto n = static_cast<Eigen::Index>(n_);
        GevParams p;
        switch (family_) {
            case ModelFamily::PooledStationary:
                p.mu = theta[si];
                p.sigma = std::exp(theta[n + si]);
                p.xi = std::exp(theta[2 * n]);
                break;
            case ModelFamily::NonpooledNonstationary:
                p.mu = theta[si] + theta[2 * n + si] * x;
                p.sigma = std::exp(theta[n + si] + theta[3 * n + si] * x);
                p.xi = std::exp(theta[4 * n + si]);
                break;
            case ModelFamily::SpatiallyVaryingCovariates:
                p.mu = theta[si] + theta[2 * n + si] * x;
                p.sigma = std::exp(theta[n + si] + theta[3 * n + si] * x);
                p.xi = std::exp(theta[4 * n]);
                break;
        }
        return p;
    }

    double log_likelihood(const Eigen::VectorXd& theta) const {
        check_dim(theta);
        double ll = 0.0;
        for (std::size_t i = 0; i < obs_y_.size(); ++i) {
            const GevParams p = assemble_from_x(theta, obs_station_[i], obs_x_[i]);
            if (!p.valid()) return -kInf;
            const double lp = gev_logpdf(obs_y_[i], p);
            if (lp == -kInf) return -kInf;
            ll += lp;
        }
        return ll;
    }

    double log_prior(const Eigen::VectorXd& theta) const { return prior_impl(theta, nullptr); }

    /// Joint log posterior with its analytic gradient. A -inf value (out of
    /// support, overflowing decode, failed GP Cholesky) carries no gradient.
    LogDensity log_posterior_and_grad(const Eigen::VectorXd& theta) const {
        check_dim(theta);
        LogDensity out;
        out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));

        double ll = 0.0;
        if (!likelihood_impl(theta, &out.grad, ll)) return out;

        Eigen::VectorXd pg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
        const double lp = prior_impl(theta, &pg);
        if (lp == -kInf) return out;

        out.value = ll + lp;
        out.grad += pg;
        out.grad_defined = true;
        return out;
    }

    double log_posterior(const Eigen::VectorXd& theta) const {
        const double ll = log_likelihood(theta);
        if (ll == -kInf) return -kInf;
        const double lp = log_prior(theta);
        if (lp == -kInf) return -kInf;
        return ll + lp;
    }

    /// Prior mean point in the unconstrained space (first MAP start).
    Eigen::VectorXd prior_mean_vector() const {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
        const auto n = static_cast<Eigen::Index>(n_);
        // E[xi] of a half-normal(0, sd)
        const double xi_mean = prior_.xi_sd * std::sqrt(2.0 / 3.14159265358979323846);
        switch (family_) {
            case ModelFamily::NonpooledNonstationary:
                theta.segment(0, n).setConstant(prior_.location_intercept_mean);
                theta.segment(4 * n, n).setConstant(std::log(xi_mean));
                break;
            case ModelFamily::PooledStationary:
            case ModelFamily::SpatiallyVaryingCovariates: {
                theta[static_cast<Eigen::Index>(xi_offset())] = std::log(xi_mean);
                const double alpha_mean =
                    prior_.kernel_alpha_scale / (prior_.kernel_alpha_shape - 1.0);
                const double rho_mean = prior_.kernel_rho_shape / prior_.kernel_rho_rate;
                for (int k = 0; k < n_kernel_pairs(); ++k) {
                    theta[static_cast<Eigen::Index>(kernel_offset(k))] = std::log(alpha_mean);
                    theta[static_cast<Eigen::Index>(kernel_offset(k) + 1)] = std::log(rho_mean);
                }
                break;
            }
        }
        return theta;
    }

    /// Moment-based start: per-station Gumbel moment matching with a small
    /// shape, zero trend coefficients, kernel hyperparameters at their prior
    /// means. Lies inside the support for any data set with spread.
    Eigen::VectorXd data_informed_start() const {
        Eigen::VectorXd theta = prior_mean_vector();
        const auto n = static_cast<Eigen::Index>(n_);
        constexpr double euler_gamma = 0.57721566490153286;
        constexpr double gumbel_sd_factor = 0.77969680123488977; // sqrt(6)/pi
        for (Eigen::Index s = 0; s < n; ++s) {
            const auto& obs = data_.stations()[static_cast<std::size_t>(s)].obs;
            double m = prior_.location_intercept_mean, sd = 1.0;
            if (!obs.empty()) {
                double sum = 0.0;
                for (const auto& o : obs) sum += o.depth;
                m = sum / static_cast<double>(obs.size());
                if (obs.size() > 1) {
                    double ss = 0.0;
                    for (const auto& o : obs) ss += (o.depth - m) * (o.depth - m);
                    sd = std::max(std::sqrt(ss / (static_cast<double>(obs.size()) - 1.0)), 0.05);
                }
            }
            const double sigma0 = gumbel_sd_factor * sd;
            const double mu0 = m - euler_gamma * sigma0;
            theta[s] = mu0;
            theta[n + s] = std::log(sigma0);
            if (family_ == ModelFamily::NonpooledNonstationary) {
                theta[2 * n + s] = 0.0;
                theta[3 * n + s] = 0.0;
                theta[4 * n + s] = std::log(0.1);
            }
        }
        if (family_ != ModelFamily::NonpooledNonstationary)
            theta[static_cast<Eigen::Index>(xi_offset())] = std::log(0.1);
        return theta;
    }

    /// A draw from the prior (unconstrained coordinates), used for MAP
    /// multi-starts.
    Eigen::VectorXd prior_draw(Rng& rng) const {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(dim_));
        const auto n = static_cast<Eigen::Index>(n_);
        auto draw_halfnormal_log = [&]() {
            return std::log(std::fabs(rng.normal(0.0, prior_.xi_sd)) + 1e-8);
        };
        switch (family_) {
            case ModelFamily::NonpooledNonstationary:
                for (Eigen::Index s = 0; s < n; ++s) {
                    theta[s] = rng.normal(prior_.location_intercept_mean,
                                          prior_.location_intercept_sd);
                    theta[n + s] = rng.normal(0.0, prior_.log_scale_sd);
                    theta[2 * n + s] = rng.normal(0.0, prior_.beta_sd);
                    theta[3 * n + s] = rng.normal(0.0, prior_.beta_sd);
                    theta[4 * n + s] = draw_halfnormal_log();
                }
                break;
            case ModelFamily::PooledStationary:
            case ModelFamily::SpatiallyVaryingCovariates: {
                theta[static_cast<Eigen::Index>(xi_offset())] = draw_halfnormal_log();
                const int pairs = n_kernel_pairs();
                for (int k = 0; k < pairs; ++k) {
                    // alpha ~ InvGamma(a, b) as b / Gamma(a, rate 1); rho ~ Gamma(a, rate r)
                    const double g = rng.gamma_int(static_cast<int>(prior_.kernel_alpha_shape));
                    const double alpha = prior_.kernel_alpha_scale / g;
                    const double rho = rng.gamma_int(static_cast<int>(prior_.kernel_rho_shape)) /
                                       prior_.kernel_rho_rate;
                    theta[static_cast<Eigen::Index>(kernel_offset(k))] = std::log(alpha);
                    theta[static_cast<Eigen::Index>(kernel_offset(k) + 1)] = std::log(rho);
                    KernelConfig cfg{alpha, rho, prior_.jitter_rel * alpha * alpha};
                    Eigen::VectorXd z(n);
                    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
                    const Eigen::MatrixXd k_m = covariance_matrix(data_.sites(), cfg);
                    auto [llt, jt] = detail::chol_with_jitter(k_m, cfg);
                    (void)jt;
                    theta.segment(static_cast<Eigen::Index>(k) * n, n) =
                        llt.matrixL() * z;
                }
                break;
            }
        }
        return theta;
    }

private:
    void check_dim(const Eigen::VectorXd& theta) const {
        if (static_cast<std::size_t>(theta.size()) != dim_)
            throw input_error("parameter vector has dimension " + std::to_string(theta.size()) +
                              ", expected " + std::to_string(dim_));
    }

    /// Likelihood plus gradient accumulation. Returns false (leaving -inf
    /// semantics to the caller) when any observation is out of support or a
    /// decode overflows.
    bool likelihood_impl(const Eigen::VectorXd& theta, Eigen::VectorXd* grad, double& ll) const {
        const auto n = static_cast<Eigen::Index>(n_);
        ll = 0.0;
        for (std::size_t i = 0; i < obs_y_.size(); ++i) {
            const auto si = static_cast<Eigen::Index>(obs_station_[i]);
            const double x = obs_x_[i];
            const GevParams p = assemble_from_x(theta, obs_station_[i], x);
            if (!p.valid() || !p.in_support(obs_y_[i])) return false;
            const double lp = gev_logpdf(obs_y_[i], p);
            if (!std::isfinite(lp)) return false;
            ll += lp;
            if (!grad) continue;
            const auto [d_mu, d_sigma, d_xi] = gev_logpdf_grad(obs_y_[i], p);
            switch (family_) {
                case ModelFamily::PooledStationary:
                    (*grad)[si] += d_mu;
                    (*grad)[n + si] += d_sigma * p.sigma;
                    (*grad)[2 * n] += d_xi * p.xi;
                    break;
                case ModelFamily::NonpooledNonstationary:
                    (*grad)[si] += d_mu;
                    (*grad)[n + si] += d_sigma * p.sigma;
                    (*grad)[2 * n + si] += d_mu * x;
                    (*grad)[3 * n + si] += d_sigma * p.sigma * x;
                    (*grad)[4 * n + si] += d_xi * p.xi;
                    break;
                case ModelFamily::SpatiallyVaryingCovariates:
                    (*grad)[si] += d_mu;
                    (*grad)[n + si] += d_sigma * p.sigma;
                    (*grad)[2 * n + si] += d_mu * x;
                    (*grad)[3 * n + si] += d_sigma * p.sigma * x;
                    (*grad)[4 * n] += d_xi * p.xi;
                    break;
            }
        }
        return true;
    }

    /// Log prior including the log-Jacobians of the exp transforms. When
    /// grad is non-null the gradient is accumulated into it.
    double prior_impl(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const {
        check_dim(theta);
        if (!theta.allFinite()) return -kInf;
        const auto n = static_cast<Eigen::Index>(n_);
        double lp = 0.0;

        auto add_xi_prior = [&](std::size_t off) {
            const double log_xi = theta[static_cast<Eigen::Index>(off)];
            const double xi = std::exp(log_xi);
            if (!std::isfinite(xi)) return false;
            // half-normal on xi plus the exp-transform Jacobian
            lp += halfnormal_logpdf(xi, prior_.xi_sd) + log_xi;
            if (grad)
                (*grad)[static_cast<Eigen::Index>(off)] +=
                    -xi * xi / (prior_.xi_sd * prior_.xi_sd) + 1.0;
            return true;
        };

        auto add_kernel_prior = [&](int pair) {
            const auto off = static_cast<Eigen::Index>(kernel_offset(pair));
            const double la = theta[off];
            const double lr = theta[off + 1];
            const double alpha = std::exp(la);
            const double rho = std::exp(lr);
            if (!std::isfinite(alpha) || !std::isfinite(rho)) return false;
            lp += inv_gamma_logpdf(alpha, prior_.kernel_alpha_shape, prior_.kernel_alpha_scale) + la;
            lp += gamma_logpdf(rho, prior_.kernel_rho_shape, prior_.kernel_rho_rate) + lr;
            if (grad) {
                (*grad)[off] += -prior_.kernel_alpha_shape + prior_.kernel_alpha_scale / alpha;
                (*grad)[off + 1] += prior_.kernel_rho_shape - prior_.kernel_rho_rate * rho;
            }
            return true;
        };

        auto add_gp_prior = [&](Eigen::Index field_off, int pair) {
            const KernelConfig cfg = kernel_config(theta, pair);
            if (!cfg.valid()) return false;
            const Eigen::VectorXd field = theta.segment(field_off, n);
            try {
                if (grad) {
                    const GpLogDensity g = gp_logdensity_grad(field, data_.sites(), cfg);
                    lp += g.value;
                    grad->segment(field_off, n) += g.d_field;
                    const auto koff = static_cast<Eigen::Index>(kernel_offset(pair));
                    (*grad)[koff] += g.d_log_alpha;
                    (*grad)[koff + 1] += g.d_log_rho;
                } else {
                    lp += gp_logdensity(field, data_.sites(), cfg);
                }
            } catch (const numerical_error&) {
                return false;
            }
            return true;
        };

        switch (family_) {
            case ModelFamily::NonpooledNonstationary:
                for (Eigen::Index s = 0; s < n; ++s) {
                    lp += normal_logpdf(theta[s], prior_.location_intercept_mean,
                                        prior_.location_intercept_sd);
                    lp += normal_logpdf(theta[n + s], 0.0, prior_.log_scale_sd);
                    lp += normal_logpdf(theta[2 * n + s], 0.0, prior_.beta_sd);
                    lp += normal_logpdf(theta[3 * n + s], 0.0, prior_.beta_sd);
                    if (grad) {
                        (*grad)[s] += normal_logpdf_dx(theta[s], prior_.location_intercept_mean,
                                                       prior_.location_intercept_sd);
                        (*grad)[n + s] += normal_logpdf_dx(theta[n + s], 0.0, prior_.log_scale_sd);
                        (*grad)[2 * n + s] += normal_logpdf_dx(theta[2 * n + s], 0.0, prior_.beta_sd);
                        (*grad)[3 * n + s] += normal_logpdf_dx(theta[3 * n + s], 0.0, prior_.beta_sd);
                    }
                    if (!add_xi_prior(4 * n_ + static_cast<std::size_t>(s))) return -kInf;
                }
                break;
            case ModelFamily::PooledStationary:
                if (!add_gp_prior(0, 0)) return -kInf;
                if (!add_gp_prior(n, 1)) return -kInf;
                if (!add_xi_prior(xi_offset())) return -kInf;
                for (int k = 0; k < 2; ++k)
                    if (!add_kernel_prior(k)) return -kInf;
                break;
            case ModelFamily::SpatiallyVaryingCovariates:
                for (int k = 0; k < 4; ++k)
                    if (!add_gp_prior(static_cast<Eigen::Index>(k) * n, k)) return -kInf;
                if (!add_xi_prior(xi_offset())) return -kInf;
                for (int k = 0; k < 4; ++k)
                    if (!add_kernel_prior(k)) return -kInf;
                break;
        }
        return lp;
    }

    ModelFamily family_;
    Dataset data_;
    PriorConfig prior_;
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<std::size_t> obs_station_;
    std::vector<double> obs_y_;
    std::vector<double> obs_x_;
};

} // namespace rainfreq
