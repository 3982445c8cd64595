#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <future>
#include <utility>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/log_density.hpp"
#include "rainfreq/math.hpp"
#include "rainfreq/models.hpp"
#include "rainfreq/rng.hpp"

namespace rainfreq {

struct SamplerConfig {
    int chains = 4;
    int iterations = 10000; ///< per chain; the warmup fraction is discarded
    double warmup_fraction = 0.5;
    double target_accept = 0.8;
    int max_tree_depth = 10;
    std::uint64_t seed = 0;
    double divergence_threshold = 1000.0; ///< energy error that flags a divergence
    bool parallel = true;

    int warmup_iterations() const {
        return static_cast<int>(std::lround(iterations * warmup_fraction));
    }
    int kept_iterations() const { return iterations - warmup_iterations(); }

    void validate() const {
        if (chains < 1) throw input_error("SamplerConfig: chains must be >= 1");
        if (!(warmup_fraction > 0.0 && warmup_fraction < 1.0))
            throw input_error("SamplerConfig: warmup fraction must lie in (0,1)");
        if (iterations < 2 || kept_iterations() < 1)
            throw input_error("SamplerConfig: too few iterations");
        if (!(target_accept > 0.0 && target_accept < 1.0))
            throw input_error("SamplerConfig: target acceptance must lie in (0,1)");
        if (max_tree_depth < 1 || max_tree_depth > 14)
            throw input_error("SamplerConfig: max tree depth out of range");
    }
};

/// Post-warmup draws for one chain plus the adaptation record.
struct ChainRecord {
    std::vector<Eigen::VectorXd> draws;
    std::vector<double> log_posterior;
    std::vector<std::uint8_t> divergent;
    std::vector<int> tree_depth;
    int warmup_divergences = 0;
    double step_size = 0.0;
    Eigen::VectorXd inv_mass;
};

class PosteriorSamples {
public:
    PosteriorSamples() = default;
    PosteriorSamples(std::vector<ChainRecord> chains, std::size_t dim)
        : chains_(std::move(chains)), dim_(dim) {}

    const std::vector<ChainRecord>& chains() const { return chains_; }
    std::size_t n_chains() const { return chains_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t draws_per_chain() const { return chains_.empty() ? 0 : chains_[0].draws.size(); }
    std::size_t total_draws() const {
        std::size_t n = 0;
        for (const auto& c : chains_) n += c.draws.size();
        return n;
    }

    /// All post-warmup draws of one coordinate, chain-major.
    Eigen::VectorXd parameter_draws(std::size_t param) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(total_draws()));
        Eigen::Index k = 0;
        for (const auto& c : chains_)
            for (const auto& d : c.draws) out[k++] = d[static_cast<Eigen::Index>(param)];
        return out;
    }

    int divergence_count() const {
        int n = 0;
        for (const auto& c : chains_)
            for (auto f : c.divergent) n += f != 0;
        return n;
    }

private:
    std::vector<ChainRecord> chains_;
    std::size_t dim_ = 0;
};

namespace hmc_detail {

struct PhasePoint {
    Eigen::VectorXd theta;
    Eigen::VectorXd r;
    LogDensity ld;
};

struct Tree {
    PhasePoint minus, plus;
    Eigen::VectorXd prop_theta;
    LogDensity prop_ld;
    double log_sum_w = -kInf;
    double sum_accept = 0.0;
    int n_states = 0;
    bool divergent = false;
    bool turned = false;
};

inline double kinetic(const Eigen::VectorXd& r, const Eigen::VectorXd& inv_mass) {
    return 0.5 * r.dot(inv_mass.cwiseProduct(r));
}

inline bool uturn(const PhasePoint& minus, const PhasePoint& plus,
                  const Eigen::VectorXd& inv_mass) {
    const Eigen::VectorXd span = plus.theta - minus.theta;
    return span.dot(inv_mass.cwiseProduct(minus.r)) < 0.0 ||
           span.dot(inv_mass.cwiseProduct(plus.r)) < 0.0;
}

/// One leapfrog step; returns false when the target is -inf (gradient
/// undefined), which the caller treats as a divergent state.
inline bool leapfrog(const LogDensityFn& target, const Eigen::VectorXd& inv_mass, double eps,
                     PhasePoint& z) {
    Eigen::VectorXd r_half = z.r + 0.5 * eps * z.ld.grad;
    z.theta += eps * inv_mass.cwiseProduct(r_half);
    z.ld = target(z.theta);
    if (!z.ld.grad_defined || !std::isfinite(z.ld.value)) return false;
    z.r = r_half + 0.5 * eps * z.ld.grad;
    return true;
}

class DynamicHmcChain {
public:
    DynamicHmcChain(LogDensityFn target, const SamplerConfig& cfg, const Eigen::VectorXd& init,
                    int chain_index)
        : target_(std::move(target)),
          cfg_(cfg),
          rng_(cfg.seed, static_cast<std::uint64_t>(chain_index) + 1),
          inv_mass_(Eigen::VectorXd::Ones(init.size())) {
        cur_.theta = init;
        cur_.ld = target_(init);
        if (!std::isfinite(cur_.ld.value) || !cur_.ld.grad_defined)
            throw input_error("sample: chain initial point has non-finite log-posterior");
    }

    ChainRecord run() {
        const int warmup = cfg_.warmup_iterations();
        const int kept = cfg_.kept_iterations();
        ChainRecord rec;
        rec.draws.reserve(static_cast<std::size_t>(kept));

        setup_windows(warmup);
        eps_ = find_initial_step_size();
        da_reset(eps_);

        for (int it = 0; it < warmup; ++it) {
            const auto [divergent, accept_stat, depth] = transition();
            (void)depth;
            rec.warmup_divergences += divergent;
            da_update(accept_stat);
            if (in_slow_window(it)) welford_add(cur_.theta);
            if (is_window_end(it)) {
                update_inv_mass();
                eps_ = find_initial_step_size();
                da_reset(eps_);
            }
        }
        eps_ = da_final();

        for (int it = 0; it < kept; ++it) {
            const auto [divergent, accept_stat, depth] = transition();
            (void)accept_stat;
            rec.draws.push_back(cur_.theta);
            rec.log_posterior.push_back(cur_.ld.value);
            rec.divergent.push_back(divergent ? 1 : 0);
            rec.tree_depth.push_back(depth);
        }
        rec.step_size = eps_;
        rec.inv_mass = inv_mass_;
        return rec;
    }

private:
    // ---- adaptation schedule (init buffer / doubling windows / term buffer)
    void setup_windows(int warmup) {
        window_ends_.clear();
        if (warmup <= 0) return;
        int init_buf = 75, term_buf = 50, base = 25;
        if (init_buf + term_buf + base > warmup) {
            init_buf = static_cast<int>(0.15 * warmup);
            term_buf = static_cast<int>(0.10 * warmup);
            base = warmup - init_buf - term_buf;
            if (base < 1) { // degenerate warmup: one big window
                init_buf = 0;
                term_buf = 0;
                base = warmup;
            }
        }
        slow_start_ = init_buf;
        slow_end_ = warmup - term_buf;
        int w = base;
        int pos = init_buf;
        while (pos < slow_end_) {
            int end = pos + w;
            if (end + 2 * w > slow_end_) end = slow_end_; // absorb the remainder
            window_ends_.push_back(end - 1);
            pos = end;
            w *= 2;
        }
    }

    bool in_slow_window(int it) const { return it >= slow_start_ && it < slow_end_; }
    bool is_window_end(int it) const {
        for (int e : window_ends_)
            if (e == it) return true;
        return false;
    }

    // ---- Welford accumulator for the diagonal mass matrix
    void welford_add(const Eigen::VectorXd& x) {
        if (wf_n_ == 0) {
            wf_mean_ = Eigen::VectorXd::Zero(x.size());
            wf_m2_ = Eigen::VectorXd::Zero(x.size());
        }
        ++wf_n_;
        const Eigen::VectorXd delta = x - wf_mean_;
        wf_mean_ += delta / static_cast<double>(wf_n_);
        wf_m2_ += delta.cwiseProduct(x - wf_mean_);
    }

    void update_inv_mass() {
        if (wf_n_ < 5) return; // keep the current metric; window too short
        const double n = static_cast<double>(wf_n_);
        const Eigen::VectorXd var = wf_m2_ / (n - 1.0);
        // regularize toward unit scale as Stan does
        inv_mass_ = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
        wf_n_ = 0;
    }

    // ---- dual averaging of the step size
    void da_reset(double eps) {
        da_mu_ = std::log(10.0 * eps);
        da_h_bar_ = 0.0;
        da_log_eps_bar_ = std::log(eps);
        da_m_ = 0;
    }

    void da_update(double accept_stat) {
        static constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
        ++da_m_;
        const double m = static_cast<double>(da_m_);
        da_h_bar_ = (1.0 - 1.0 / (m + t0)) * da_h_bar_ +
                    (cfg_.target_accept - accept_stat) / (m + t0);
        const double log_eps = da_mu_ - std::sqrt(m) / gamma * da_h_bar_;
        const double eta = std::pow(m, -kappa);
        da_log_eps_bar_ = eta * log_eps + (1.0 - eta) * da_log_eps_bar_;
        eps_ = std::exp(log_eps);
    }

    double da_final() const { return std::exp(da_log_eps_bar_); }

    /// Crude bracketing of a step size whose one-step acceptance straddles
    /// 1/2, run at the current point with the current metric.
    double find_initial_step_size() {
        double eps = 1.0;
        PhasePoint z0 = cur_;
        z0.r = sample_momentum();
        const double h0 = -z0.ld.value + kinetic(z0.r, inv_mass_);

        auto one_step_ratio = [&](double e) {
            PhasePoint z = z0;
            if (!leapfrog(target_, inv_mass_, e, z)) return 0.0;
            const double h = -z.ld.value + kinetic(z.r, inv_mass_);
            return std::exp(h0 - h);
        };

        double ratio = one_step_ratio(eps);
        const double dir = ratio > 0.5 ? 1.0 : -1.0;
        for (int i = 0; i < 50; ++i) {
            eps *= dir > 0 ? 2.0 : 0.5;
            if (eps > 1e2 || eps < 1e-10) break;
            ratio = one_step_ratio(eps);
            if ((dir > 0 && ratio <= 0.5) || (dir < 0 && ratio >= 0.5)) break;
        }
        return std::min(std::max(eps, 1e-10), 1e2);
    }

    Eigen::VectorXd sample_momentum() {
        Eigen::VectorXd r(inv_mass_.size());
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r[i] = rng_.normal() / std::sqrt(inv_mass_[i]);
        return r;
    }

    Tree leaf(PhasePoint z, double h0, double eps_signed) {
        Tree t;
        const bool ok = leapfrog(target_, inv_mass_, eps_signed, z);
        t.n_states = 1;
        double h = kInf;
        if (ok) h = -z.ld.value + kinetic(z.r, inv_mass_);
        const double delta = h - h0;
        t.divergent = !std::isfinite(delta) || delta > cfg_.divergence_threshold;
        t.sum_accept = t.divergent ? 0.0 : std::min(1.0, std::exp(-delta));
        t.minus = z;
        t.plus = std::move(z);
        if (!t.divergent) {
            t.prop_theta = t.plus.theta;
            t.prop_ld = t.plus.ld;
            t.log_sum_w = -delta;
        }
        return t;
    }

    Tree build_tree(int depth, const PhasePoint& from, double h0, double eps_signed) {
        if (depth == 0) return leaf(from, h0, eps_signed);

        Tree t1 = build_tree(depth - 1, from, h0, eps_signed);
        if (t1.divergent || t1.turned) return t1;

        const PhasePoint& grow_from = eps_signed > 0 ? t1.plus : t1.minus;
        Tree t2 = build_tree(depth - 1, grow_from, h0, eps_signed);

        Tree t;
        t.n_states = t1.n_states + t2.n_states;
        t.sum_accept = t1.sum_accept + t2.sum_accept;
        t.divergent = t2.divergent;
        t.turned = t2.turned;
        if (eps_signed > 0) {
            t.minus = std::move(t1.minus);
            t.plus = std::move(t2.plus);
        } else {
            t.minus = std::move(t2.minus);
            t.plus = std::move(t1.plus);
        }
        if (t.divergent || t.turned) return t;

        // multinomial selection between the two halves
        t.log_sum_w = std::max(t1.log_sum_w, t2.log_sum_w) +
                      std::log(std::exp(t1.log_sum_w - std::max(t1.log_sum_w, t2.log_sum_w)) +
                               std::exp(t2.log_sum_w - std::max(t1.log_sum_w, t2.log_sum_w)));
        const double p_take2 = std::exp(t2.log_sum_w - t.log_sum_w);
        if (rng_.uniform() < p_take2) {
            t.prop_theta = std::move(t2.prop_theta);
            t.prop_ld = std::move(t2.prop_ld);
        } else {
            t.prop_theta = std::move(t1.prop_theta);
            t.prop_ld = std::move(t1.prop_ld);
        }
        t.turned = uturn(t.minus, t.plus, inv_mass_);
        return t;
    }

    /// One dynamic-HMC transition; returns (divergent, accept_stat, depth).
    std::tuple<bool, double, int> transition() {
        cur_.r = sample_momentum();
        const double h0 = -cur_.ld.value + kinetic(cur_.r, inv_mass_);

        PhasePoint minus = cur_, plus = cur_;
        Eigen::VectorXd prop_theta = cur_.theta;
        LogDensity prop_ld = cur_.ld;
        bool moved = false;
        double log_sum_w = 0.0; // weight of the initial state
        double sum_accept = 0.0;
        int n_states = 0;
        bool divergent = false;
        int depth = 0;

        for (; depth < cfg_.max_tree_depth; ++depth) {
            const bool forward = rng_.uniform() < 0.5;
            const double eps_signed = forward ? eps_ : -eps_;
            Tree sub = build_tree(depth, forward ? plus : minus, h0, eps_signed);
            sum_accept += sub.sum_accept;
            n_states += sub.n_states;

            if (sub.divergent) {
                divergent = true;
                break;
            }
            if (sub.turned) break;

            // biased progressive sampling toward the fresh subtree
            if (std::log(rng_.uniform()) < sub.log_sum_w - log_sum_w) {
                prop_theta = std::move(sub.prop_theta);
                prop_ld = std::move(sub.prop_ld);
                moved = true;
            }
            const double m = std::max(log_sum_w, sub.log_sum_w);
            log_sum_w = m + std::log(std::exp(log_sum_w - m) + std::exp(sub.log_sum_w - m));

            if (forward)
                plus = sub.plus;
            else
                minus = sub.minus;
            if (uturn(minus, plus, inv_mass_)) {
                ++depth;
                break;
            }
        }

        if (moved) {
            cur_.theta = std::move(prop_theta);
            cur_.ld = std::move(prop_ld);
        }
        const double accept_stat = n_states > 0 ? sum_accept / n_states : 0.0;
        return {divergent, accept_stat, depth};
    }

    LogDensityFn target_;
    SamplerConfig cfg_;
    Rng rng_;
    Eigen::VectorXd inv_mass_;
    PhasePoint cur_;
    double eps_ = 1.0;

    int slow_start_ = 0, slow_end_ = 0;
    std::vector<int> window_ends_;
    Eigen::VectorXd wf_mean_, wf_m2_;
    int wf_n_ = 0;

    double da_mu_ = 0.0, da_h_bar_ = 0.0, da_log_eps_bar_ = 0.0;
    int da_m_ = 0;
};

} // namespace hmc_detail

/// Draw posterior samples with MAP-style initialization. Chains run
/// independently (optionally in parallel); each owns the (seed, chain)
/// Philox stream, so results are reproducible regardless of scheduling.
inline PosteriorSamples sample(const LogDensityFn& target, const SamplerConfig& cfg,
                               const Eigen::VectorXd& init) {
    cfg.validate();
    if (!init.allFinite()) throw input_error("sample: non-finite initial point");

    std::vector<ChainRecord> records(static_cast<std::size_t>(cfg.chains));
    auto run_one = [&](int c) {
        hmc_detail::DynamicHmcChain chain(target, cfg, init, c);
        records[static_cast<std::size_t>(c)] = chain.run();
    };

    if (cfg.parallel && cfg.chains > 1) {
        std::vector<std::future<void>> futures;
        futures.reserve(static_cast<std::size_t>(cfg.chains));
        for (int c = 0; c < cfg.chains; ++c)
            futures.push_back(std::async(std::launch::async, run_one, c));
        for (auto& f : futures) f.get();
    } else {
        for (int c = 0; c < cfg.chains; ++c) run_one(c);
    }
    return PosteriorSamples(std::move(records), static_cast<std::size_t>(init.size()));
}

inline PosteriorSamples sample(const ModelSpec& spec, const SamplerConfig& cfg,
                               const Eigen::VectorXd& init) {
    return sample([&spec](const Eigen::VectorXd& t) { return spec.log_posterior_and_grad(t); },
                  cfg, init);
}

} // namespace rainfreq
