#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/math.hpp"

namespace rainfreq {

struct Site {
    double lon = 0.0; ///< degrees east
    double lat = 0.0; ///< degrees north
};

/// Raw Euclidean distance in degree coordinates. The study regions this
/// targets are small; no great-circle correction is applied.
inline double site_distance(const Site& a, const Site& b) {
    const double dx = a.lon - b.lon;
    const double dy = a.lat - b.lat;
    return std::sqrt(dx * dx + dy * dy);
}

/// Ordered set of gauge/grid locations, optionally tagged with ids.
class SiteSet {
public:
    SiteSet() = default;
    explicit SiteSet(std::vector<Site> sites, std::vector<std::string> ids = {})
        : sites_(std::move(sites)), ids_(std::move(ids)) {
        for (const auto& s : sites_) {
            if (!std::isfinite(s.lon) || !std::isfinite(s.lat))
                throw input_error("SiteSet: non-finite coordinates");
        }
        if (!ids_.empty() && ids_.size() != sites_.size())
            throw input_error("SiteSet: id count does not match site count");
        for (std::size_t i = 0; i < sites_.size(); ++i)
            for (std::size_t j = i + 1; j < sites_.size(); ++j)
                if (site_distance(sites_[i], sites_[j]) <= 0.0)
                    throw input_error("SiteSet: duplicate coordinates at indices " +
                                      std::to_string(i) + " and " + std::to_string(j));
    }

    std::size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    const Site& operator[](std::size_t i) const { return sites_[i]; }
    const std::vector<Site>& sites() const { return sites_; }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::vector<Site> sites_;
    std::vector<std::string> ids_;
};

struct KernelConfig {
    double alpha = 1.0;  ///< kernel variance parameter; K(0) = alpha^2
    double rho = 1.0;    ///< length scale in degrees
    double jitter = 0.0; ///< diagonal nugget added to self-covariances

    bool valid() const {
        return std::isfinite(alpha) && std::isfinite(rho) && std::isfinite(jitter) &&
               alpha > 0.0 && rho > 0.0 && jitter >= 0.0;
    }
};

using LatentField = Eigen::VectorXd;

inline double exp_kernel(const Site& a, const Site& b, const KernelConfig& cfg) {
    if (!cfg.valid()) throw input_error("exp_kernel: invalid kernel configuration");
    return cfg.alpha * cfg.alpha * std::exp(-site_distance(a, b) / cfg.rho);
}

/// Dense covariance of a site set under the exponential kernel.
/// Symmetric by construction; diagonal alpha^2 + jitter.
inline Eigen::MatrixXd covariance_matrix(const SiteSet& sites, const KernelConfig& cfg) {
    if (!cfg.valid()) throw input_error("covariance_matrix: invalid kernel configuration");
    if (sites.empty()) throw input_error("covariance_matrix: empty site set");
    const auto n = static_cast<Eigen::Index>(sites.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = cfg.alpha * cfg.alpha + cfg.jitter;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v = exp_kernel(sites[static_cast<std::size_t>(i)],
                                        sites[static_cast<std::size_t>(j)], cfg);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

inline Eigen::MatrixXd cross_covariance(const SiteSet& a, const SiteSet& b,
                                        const KernelConfig& cfg) {
    Eigen::MatrixXd k(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                exp_kernel(a[i], b[j], cfg);
    return k;
}

namespace detail {

/// Cholesky with jitter escalation: the configured jitter first, then a
/// ladder from 1e-8 alpha^2 stepping x10 up to 1e-4 alpha^2. On total
/// failure reports the estimated minimum eigenvalue.
inline std::pair<Eigen::LLT<Eigen::MatrixXd>, double>
chol_with_jitter(const Eigen::MatrixXd& k, const KernelConfig& cfg) {
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) return {std::move(llt), cfg.jitter};

    const double a2 = cfg.alpha * cfg.alpha;
    for (double extra = 1e-8 * a2; extra <= 1e-4 * a2 * (1.0 + 1e-12); extra *= 10.0) {
        if (extra <= cfg.jitter) continue;
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += extra - cfg.jitter;
        llt.compute(kj);
        if (llt.info() == Eigen::Success) return {std::move(llt), extra};
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    std::ostringstream msg;
    msg << "covariance Cholesky failed after jitter escalation; minimum eigenvalue estimate "
        << (es.info() == Eigen::Success ? es.eigenvalues().minCoeff() : std::nan(""));
    throw numerical_error(msg.str());
}

} // namespace detail

/// Log-density of a zero-mean multivariate normal draw under the
/// exponential-kernel covariance, evaluated via Cholesky.
inline double gp_logdensity(const LatentField& field, const SiteSet& sites,
                            const KernelConfig& cfg) {
    if (static_cast<std::size_t>(field.size()) != sites.size())
        throw input_error("gp_logdensity: field length does not match site count");
    const Eigen::MatrixXd k = covariance_matrix(sites, cfg);
    auto [llt, used_jitter] = detail::chol_with_jitter(k, cfg);
    (void)used_jitter;
    const Eigen::VectorXd alpha = llt.solve(field);
    const double half_logdet = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const auto n = static_cast<double>(field.size());
    return -0.5 * n * kLogTwoPi - half_logdet - 0.5 * field.dot(alpha);
}

/// gp_logdensity value plus gradients with respect to the field values and
/// the log-transformed kernel hyperparameters. Assumes the jitter scales
/// with alpha^2 (the model default), which makes dK/dlog(alpha) = 2K exact.
struct GpLogDensity {
    double value = 0.0;
    Eigen::VectorXd d_field;
    double d_log_alpha = 0.0;
    double d_log_rho = 0.0;
};

inline GpLogDensity gp_logdensity_grad(const LatentField& field, const SiteSet& sites,
                                       const KernelConfig& cfg) {
    if (static_cast<std::size_t>(field.size()) != sites.size())
        throw input_error("gp_logdensity_grad: field length does not match site count");
    const auto n = static_cast<Eigen::Index>(sites.size());
    const Eigen::MatrixXd k = covariance_matrix(sites, cfg);
    auto [llt, used_jitter] = detail::chol_with_jitter(k, cfg);
    (void)used_jitter;

    GpLogDensity out;
    const Eigen::VectorXd a = llt.solve(field);
    const double half_logdet = llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    out.value = -0.5 * static_cast<double>(n) * kLogTwoPi - half_logdet - 0.5 * field.dot(a);
    out.d_field = -a;
    // dK/dlog(alpha) = 2K  =>  0.5 a'(2K)a - 0.5 tr(K^-1 2K) = f'a - n
    out.d_log_alpha = field.dot(a) - static_cast<double>(n);

    // dK/dlog(rho) = alpha^2 exp(-d/rho) d/rho, zero on the diagonal
    Eigen::MatrixXd dk(n, n);
    const double a2 = cfg.alpha * cfg.alpha;
    for (Eigen::Index i = 0; i < n; ++i) {
        dk(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = site_distance(sites[static_cast<std::size_t>(i)],
                                           sites[static_cast<std::size_t>(j)]);
            const double v = a2 * std::exp(-d / cfg.rho) * d / cfg.rho;
            dk(i, j) = v;
            dk(j, i) = v;
        }
    }
    const Eigen::MatrixXd kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    out.d_log_rho = 0.5 * a.dot(dk * a) - 0.5 * kinv.cwiseProduct(dk).sum();
    return out;
}

struct GpConditional {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Standard Gaussian conditioning of the latent field from observed sites A
/// to target sites B: mean = K_BA K_AA^-1 f, cov = K_BB - K_BA K_AA^-1 K_AB.
inline GpConditional gp_condition(const LatentField& observed, const SiteSet& observed_sites,
                                  const SiteSet& targets, const KernelConfig& cfg) {
    if (observed_sites.empty()) throw input_error("gp_condition: no observed sites");
    if (static_cast<std::size_t>(observed.size()) != observed_sites.size())
        throw input_error("gp_condition: field length does not match observed site count");

    const Eigen::MatrixXd k_aa = covariance_matrix(observed_sites, cfg);
    auto [llt, used_jitter] = detail::chol_with_jitter(k_aa, cfg);
    (void)used_jitter;

    const Eigen::MatrixXd k_ba = cross_covariance(targets, observed_sites, cfg);
    const Eigen::MatrixXd k_bb = covariance_matrix(targets, cfg);
    const Eigen::MatrixXd solved = llt.solve(k_ba.transpose()); // K_AA^-1 K_AB

    GpConditional out;
    out.mean = k_ba * llt.solve(observed);
    out.cov = k_bb - k_ba * solved;
    out.cov = 0.5 * (out.cov + out.cov.transpose()).eval(); // exact symmetry
    return out;
}

/// Marginal conditional (mean_i, var_i) per target; avoids the dense K_BB
/// when only per-location summaries are needed (gridded prediction).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd>
gp_condition_marginal(const LatentField& observed, const SiteSet& observed_sites,
                      const SiteSet& targets, const KernelConfig& cfg) {
    if (observed_sites.empty()) throw input_error("gp_condition: no observed sites");
    const Eigen::MatrixXd k_aa = covariance_matrix(observed_sites, cfg);
    auto [llt, used_jitter] = detail::chol_with_jitter(k_aa, cfg);
    (void)used_jitter;
    const Eigen::VectorXd a = llt.solve(observed);

    const auto m = static_cast<Eigen::Index>(targets.size());
    Eigen::VectorXd mean(m), var(m);
    const double self = cfg.alpha * cfg.alpha + cfg.jitter;
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd kba(observed_sites.size());
        for (std::size_t j = 0; j < observed_sites.size(); ++j)
            kba(static_cast<Eigen::Index>(j)) =
                exp_kernel(targets[static_cast<std::size_t>(i)], observed_sites[j], cfg);
        mean(i) = kba.dot(a);
        var(i) = self - kba.dot(llt.solve(kba));
    }
    return {mean, var};
}

} // namespace rainfreq
