#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/math.hpp"
#include "rainfreq/sampler.hpp"

namespace rainfreq {

/// Sentinel returned when between-chain variance exists but within-chain
/// variance is exactly zero (chains stuck at different constants).
inline constexpr double kRhatDisjointSentinel = 1e6;

struct RhatResult {
    double value = 1.0;
    bool zero_variance = false; ///< all chains constant and equal
};

struct EssResult {
    double value = 0.0;
    bool degenerate = false; ///< zero-variance input
};

namespace diag_detail {

/// Split each chain in half, dropping the middle draw of odd-length chains.
inline std::vector<std::vector<double>> split_chains(const PosteriorSamples& samples,
                                                     std::size_t param) {
    std::vector<std::vector<double>> seqs;
    for (const auto& chain : samples.chains()) {
        const std::size_t n = chain.draws.size();
        const std::size_t half = n / 2;
        std::vector<double> a(half), b(half);
        for (std::size_t i = 0; i < half; ++i) {
            a[i] = chain.draws[i][static_cast<Eigen::Index>(param)];
            b[i] = chain.draws[n - half + i][static_cast<Eigen::Index>(param)];
        }
        seqs.push_back(std::move(a));
        seqs.push_back(std::move(b));
    }
    return seqs;
}

/// Pooled average ranks (ties averaged), then the normal-score transform
/// z = Phi^-1((r - 3/8) / (S + 1/4)).
inline void rank_normalize(std::vector<std::vector<double>>& seqs) {
    struct Entry {
        double v;
        std::size_t seq, pos;
    };
    std::vector<Entry> all;
    for (std::size_t s = 0; s < seqs.size(); ++s)
        for (std::size_t i = 0; i < seqs[s].size(); ++i) all.push_back({seqs[s][i], s, i});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.v < b.v; });

    const double total = static_cast<double>(all.size());
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j + 1 < all.size() && all[j + 1].v == all[i].v) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        const double z = inv_normal_cdf((avg_rank - 0.375) / (total + 0.25));
        for (std::size_t k = i; k <= j; ++k) seqs[all[k].seq][all[k].pos] = z;
        i = j + 1;
    }
}

inline double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_var(const std::vector<double>& v, double mean) {
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / (static_cast<double>(v.size()) - 1.0);
}

/// Classic split potential-scale-reduction on already-transformed sequences.
inline double psrf(const std::vector<std::vector<double>>& seqs) {
    const std::size_t m = seqs.size();
    const double n = static_cast<double>(seqs[0].size());
    std::vector<double> means(m), vars(m);
    for (std::size_t j = 0; j < m; ++j) {
        means[j] = mean_of(seqs[j]);
        vars[j] = sample_var(seqs[j], means[j]);
    }
    const double w = mean_of(vars);
    const double grand = mean_of(means);
    double b_over_n = 0.0;
    for (double mj : means) b_over_n += (mj - grand) * (mj - grand);
    b_over_n /= static_cast<double>(m - 1);

    if (w <= 0.0) return b_over_n > 0.0 ? kRhatDisjointSentinel : 1.0;
    const double var_plus = (n - 1.0) / n * w + b_over_n;
    const double r = std::sqrt(var_plus / w);
    return std::isfinite(r) ? std::min(r, kRhatDisjointSentinel) : kRhatDisjointSentinel;
}

} // namespace diag_detail

/// Split-chain rank-normalized R-hat (the standard bulk recipe). Constant
/// equal chains are a defined degenerate case: value 1 with the
/// zero-variance flag raised.
inline RhatResult rhat_full(const PosteriorSamples& samples, std::size_t param) {
    if (samples.n_chains() < 2) throw input_error("rhat: need at least 2 chains");
    for (const auto& c : samples.chains())
        if (c.draws.size() < 4) throw input_error("rhat: need at least 4 draws per chain");

    auto seqs = diag_detail::split_chains(samples, param);
    const double first = seqs[0][0];
    bool all_equal = true;
    for (const auto& s : seqs)
        for (double v : s)
            if (v != first) {
                all_equal = false;
                break;
            }
    if (all_equal) return {1.0, true};

    diag_detail::rank_normalize(seqs);
    return {diag_detail::psrf(seqs), false};
}

inline double rhat(const PosteriorSamples& samples, std::size_t param) {
    return rhat_full(samples, param).value;
}

/// Effective sample size from the multi-chain autocorrelation estimate with
/// Geyer initial-monotone truncation, on split chains.
inline EssResult ess_full(const PosteriorSamples& samples, std::size_t param) {
    if (samples.n_chains() < 2) throw input_error("ess: need at least 2 chains");
    for (const auto& c : samples.chains())
        if (c.draws.size() < 4) throw input_error("ess: need at least 4 draws per chain");

    const auto seqs = diag_detail::split_chains(samples, param);
    const std::size_t m = seqs.size();
    const std::size_t n = seqs[0].size();

    std::vector<double> means(m);
    std::vector<std::vector<double>> acov(m);
    for (std::size_t j = 0; j < m; ++j) {
        means[j] = diag_detail::mean_of(seqs[j]);
        acov[j].assign(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            double s = 0.0;
            for (std::size_t i = 0; i + t < n; ++i)
                s += (seqs[j][i] - means[j]) * (seqs[j][i + t] - means[j]);
            acov[j][t] = s / static_cast<double>(n);
        }
    }

    double w = 0.0;
    for (std::size_t j = 0; j < m; ++j) w += acov[j][0] * static_cast<double>(n) / (n - 1.0);
    w /= static_cast<double>(m);
    if (w <= 0.0) return {0.0, true};

    const double grand = diag_detail::mean_of(means);
    double b_over_n = 0.0;
    for (double mj : means) b_over_n += (mj - grand) * (mj - grand);
    b_over_n /= static_cast<double>(m - 1);
    const double var_plus = (static_cast<double>(n) - 1.0) / static_cast<double>(n) * w + b_over_n;

    auto mean_acov = [&](std::size_t t) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += acov[j][t];
        return s / static_cast<double>(m);
    };

    // multi-chain autocorrelation at lag t
    auto rho_at = [&](std::size_t t) { return 1.0 - (w - mean_acov(t)) / var_plus; };

    // Geyer initial positive + monotone sequence over lag pairs
    // P_k = rho(2k) + rho(2k+1), with rho(0) = 1; truncate at the first
    // nonpositive pair and force the sequence nonincreasing.
    double sum_pairs = 0.0;
    double prev_pair = kInf;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double r_even = (k == 0) ? 1.0 : rho_at(2 * k);
        const double r_odd = rho_at(2 * k + 1);
        double pair = r_even + r_odd;
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        sum_pairs += pair;
    }
    double tau = -1.0 + 2.0 * sum_pairs;
    tau = std::max(tau, 1e-3);

    const double ess = static_cast<double>(m * n) / tau;
    return {ess, false};
}

inline double ess(const PosteriorSamples& samples, std::size_t param) {
    return ess_full(samples, param).value;
}

/// Per-parameter convergence summary plus the post-warmup divergence count.
struct Diagnostics {
    std::vector<double> rhat;
    std::vector<double> ess;
    std::vector<bool> zero_variance;
    int divergences = 0;

    double max_rhat() const {
        double m = 0.0;
        for (std::size_t i = 0; i < rhat.size(); ++i)
            if (!zero_variance[i]) m = std::max(m, rhat[i]);
        return m;
    }
    double min_ess() const {
        double m = kInf;
        for (std::size_t i = 0; i < ess.size(); ++i)
            if (!zero_variance[i]) m = std::min(m, ess[i]);
        return std::isfinite(m) ? m : 0.0;
    }
};

inline Diagnostics compute_diagnostics(const PosteriorSamples& samples) {
    Diagnostics d;
    d.divergences = samples.divergence_count();
    for (std::size_t p = 0; p < samples.dim(); ++p) {
        const RhatResult r = rhat_full(samples, p);
        const EssResult e = ess_full(samples, p);
        d.rhat.push_back(r.value);
        d.ess.push_back(e.value);
        d.zero_variance.push_back(r.zero_variance || e.degenerate);
    }
    return d;
}

} // namespace rainfreq
