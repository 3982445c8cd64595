#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/scores.hpp"

#include "helpers/oracles.hpp"

#include <cmath>

using namespace rainfreq;

namespace {

/// Quadrature oracle for CRPS of a GEV-mixture predictive distribution:
/// direct integration of the squared CDF error.
double crps_quadrature(double y, const PredictiveEnsemble& ens) {
    auto mixture_cdf = [&](double v) {
        double acc = 0.0;
        for (const auto& d : ens.draws) acc += gev_cdf(v, d);
        return acc / static_cast<double>(ens.draws.size());
    };
    double lo = y, hi = y;
    for (const auto& d : ens.draws) {
        lo = std::min(lo, gev_quantile(1e-9, d));
        hi = std::max(hi, gev_quantile(1.0 - 1e-9, d));
    }
    const double below = oracles::adaptive_simpson(
        [&](double v) { return mixture_cdf(v) * mixture_cdf(v); }, lo, y, 1e-11);
    const double above = oracles::adaptive_simpson(
        [&](double v) { return (1.0 - mixture_cdf(v)) * (1.0 - mixture_cdf(v)); }, y, hi, 1e-11);
    return below + above;
}

} // namespace

TEST_CASE("log score degenerate identities") {
    // single draw reduces to -logpdf
    const GevParams p{0.0, 1.0, 0.0};
    PredictiveEnsemble one{{p}};
    CHECK(log_score(0.0, one) == Catch::Approx(1.0).epsilon(1e-13));

    // two draws with likelihoods e^-1 and e^-3 at y = 0; direct arithmetic
    PredictiveEnsemble two{{GevParams{0.0, 1.0, 0.0}, GevParams{0.0, std::exp(2.0), 0.0}}};
    const double expected = -std::log((std::exp(-1.0) + std::exp(-3.0)) / 2.0);
    CHECK(expected == Catch::Approx(1.5662192).margin(5e-7));
    CHECK(log_score(0.0, two) == Catch::Approx(expected).epsilon(1e-12));

    // duplicating draws leaves the mixture mean unchanged
    PredictiveEnsemble four{{two.draws[0], two.draws[1], two.draws[0], two.draws[1]}};
    CHECK(log_score(0.0, four) == Catch::Approx(log_score(0.0, two)).epsilon(1e-13));

    // out-of-support observation scores +inf
    PredictiveEnsemble pos{{GevParams{0.0, 1.0, 0.5}}};
    CHECK(log_score(-10.0, pos) == kInf);
}

TEST_CASE("log score is invariant to draw permutation") {
    Rng rng(3, 1);
    PredictiveEnsemble ens;
    for (int i = 0; i < 20; ++i)
        ens.draws.push_back({rng.uniform(3.0, 6.0), rng.uniform(0.8, 2.0), rng.uniform(0.05, 0.3)});
    PredictiveEnsemble shuffled = ens;
    std::reverse(shuffled.draws.begin(), shuffled.draws.end());
    std::swap(shuffled.draws[2], shuffled.draws[11]);
    CHECK(log_score(5.5, ens) == Catch::Approx(log_score(5.5, shuffled)).epsilon(1e-13));
}

TEST_CASE("quantile score pinball identities") {
    const GevParams p{2.0, 1.0, 0.1};
    const double q90 = gev_quantile(0.9, p);
    PredictiveEnsemble one{{p}};
    CHECK(quantile_score(q90, one, 0.9) == Catch::Approx(0.0).margin(1e-14));
    CHECK(quantile_score(q90 + 0.5, one, 0.9) == Catch::Approx(0.45).epsilon(1e-12));
    CHECK(quantile_score(q90 - 0.5, one, 0.9) == Catch::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("crps point-mass identities") {
    // an effectively deterministic forecast: tiny sigma around the target
    const double y = 4.0;
    PredictiveEnsemble point{{GevParams{y, 1e-9, 1e-8}}};
    CHECK(crps(y, point, 4000, 1).value == Catch::Approx(0.0).margin(1e-8));
    PredictiveEnsemble off{{GevParams{y + 2.0, 1e-9, 1e-8}}};
    CHECK(crps(y, off, 4000, 1).value == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("crps of a uniform forecast via the generic sampler") {
    // CRPS(U(0,1), y=0.5) = 1/12 exactly
    Rng rng(17, 4);
    const auto est = crps_mc(0.5, [](Rng& r) { return r.uniform(); }, 200000, rng);
    CHECK(std::fabs(est.value - 1.0 / 12.0) < 3.0 * est.std_error);
    CHECK(est.std_error < 1e-3);
}

TEST_CASE("crps monte carlo matches the quadrature oracle on mixtures") {
    Rng rng(23, 8);
    for (int rep = 0; rep < 5; ++rep) {
        PredictiveEnsemble ens;
        const int m = 3 + static_cast<int>(rng.index(4));
        for (int i = 0; i < m; ++i)
            ens.draws.push_back(
                {rng.uniform(3.0, 7.0), rng.uniform(0.7, 2.0), rng.uniform(0.03, 0.35)});
        const double y = rng.uniform(2.0, 9.0);
        const double oracle = crps_quadrature(y, ens);
        const auto est = crps(y, ens, 60000, 1000 + static_cast<std::uint64_t>(rep));
        REQUIRE(std::fabs(est.value - oracle) < 3.0 * est.std_error);
    }
}

TEST_CASE("crps error shrinks like one over sqrt draws") {
    PredictiveEnsemble ens{{GevParams{5.0, 1.5, 0.2}, GevParams{4.5, 1.0, 0.1}}};
    const auto coarse = crps(5.2, ens, 2000, 9);
    const auto fine = crps(5.2, ens, 8000, 9);
    CHECK(fine.std_error == Catch::Approx(coarse.std_error / 2.0).epsilon(0.2));
}

TEST_CASE("pit histogram calibrated case stays within the binomial bound") {
    // truth-as-ensemble: data generated from the same fixed model
    Rng rng(29, 5);
    const GevParams truth{5.0, 1.3, 0.12};
    const int n = 2000;
    std::vector<double> obs;
    std::vector<PredictiveEnsemble> ens;
    for (int i = 0; i < n; ++i) {
        obs.push_back(gev_quantile(rng.uniform(), truth));
        ens.push_back(PredictiveEnsemble{{truth}});
    }
    const PitHistogram h = pit_histogram(obs, ens);
    REQUIRE(h.counts.size() == 10);
    CHECK(h.n_observations() == n);
    const double bound = 4.0 * std::sqrt(n * 0.1 * 0.9);
    CHECK(h.max_abs_deviation < bound);
    for (double v : h.values) {
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("pit histogram piles into the first bin when draws sit far above") {
    std::vector<double> obs{0.1, 0.2, 0.3};
    std::vector<PredictiveEnsemble> ens(3, PredictiveEnsemble{{GevParams{50.0, 0.5, 0.2}}});
    const PitHistogram h = pit_histogram(obs, ens);
    CHECK(h.counts[0] == 3);
}
