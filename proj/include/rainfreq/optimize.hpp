#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/log_density.hpp"
#include "rainfreq/models.hpp"
#include "rainfreq/rng.hpp"

namespace rainfreq {

struct OptimResult {
    Eigen::VectorXd theta;
    double log_posterior = -kInf;
    int iterations = 0;
    bool converged = false; ///< gradient max-norm below tolerance
};

/// L-BFGS ascent with backtracking Armijo line search. The accepted
/// objective sequence is nondecreasing; stops at gradient max-norm < gtol
/// or max_iter.
inline OptimResult lbfgs_maximize(const LogDensityFn& target, const Eigen::VectorXd& init,
                                  int max_iter = 500, double gtol = 1e-6, int history = 10) {
    OptimResult res;
    Eigen::VectorXd x = init;
    LogDensity cur = target(x);
    if (!std::isfinite(cur.value) || !cur.grad_defined)
        throw convergence_error("lbfgs_maximize: initial point has non-finite log-density");

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < max_iter; ++iter) {
        res.iterations = iter;
        if (cur.grad.lpNorm<Eigen::Infinity>() < gtol) {
            res.converged = true;
            break;
        }

        // two-loop recursion on the ascent direction
        Eigen::VectorXd q = cur.grad;
        std::vector<double> alpha(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            alpha[static_cast<std::size_t>(i)] =
                rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
            q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = q;
        double slope = cur.grad.dot(dir);
        if (!(slope > 0.0) || !dir.allFinite()) { // fall back to steepest ascent
            dir = cur.grad;
            slope = cur.grad.squaredNorm();
        }

        // backtracking Armijo
        const double c1 = 1e-4;
        double step = 1.0;
        LogDensity next;
        Eigen::VectorXd xn;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xn = x + step * dir;
            next = target(xn);
            if (std::isfinite(next.value) && next.grad_defined &&
                next.value >= cur.value + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no further progress along any tested step

        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd yv = cur.grad - next.grad; // for -f minimization curvature
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        x = std::move(xn);
        cur = std::move(next);
    }

    res.theta = x;
    res.log_posterior = cur.value;
    return res;
}

/// Multi-start MAP: the prior-mean point, a moment-matched start, and prior
/// draws for the rest, each polished with L-BFGS; returns the best optimum.
/// GEV posteriors can be multimodal in the shape, hence the restarts.
inline OptimResult map_estimate(const ModelSpec& spec, int starts = 8, std::uint64_t seed = 0,
                                int max_iter = 500, double gtol = 1e-6) {
    if (starts < 1) throw input_error("map_estimate: need at least one start");
    const LogDensityFn target = [&spec](const Eigen::VectorXd& t) {
        return spec.log_posterior_and_grad(t);
    };

    Rng rng(seed, /*stream=*/0x4d415053u); // MAP start stream
    OptimResult best;
    bool any = false;
    for (int k = 0; k < starts; ++k) {
        Eigen::VectorXd x0 = (k == 0)   ? spec.prior_mean_vector()
                             : (k == 1) ? spec.data_informed_start()
                                        : spec.prior_draw(rng);
        // a start inside the -inf region is useless; redraw a few times
        int tries = 0;
        while (spec.log_posterior_and_grad(x0).value == -kInf && tries++ < 20)
            x0 = spec.prior_draw(rng);
        if (spec.log_posterior_and_grad(x0).value == -kInf) continue;

        OptimResult r = lbfgs_maximize(target, x0, max_iter, gtol);
        if (!any || r.log_posterior > best.log_posterior) {
            best = std::move(r);
            any = true;
        }
    }
    if (!any)
        throw convergence_error("map_estimate: every start landed in the -inf region");
    return best;
}

} // namespace rainfreq
