#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/gev.hpp"
#include "rainfreq/rng.hpp"

#include "helpers/oracles.hpp"

#include <cmath>

using namespace rainfreq;

namespace {

GevParams random_params(Rng& rng) {
    GevParams p;
    p.mu = rng.uniform(-3.0, 8.0);
    p.sigma = rng.uniform(0.3, 4.0);
    p.xi = rng.uniform(-0.35, 0.6);
    return p;
}

double random_in_support(Rng& rng, const GevParams& p) {
    // inverse-transform a point comfortably inside the support
    return gev_quantile(rng.uniform(0.02, 0.98), p);
}

} // namespace

TEST_CASE("gumbel density at the location is e^-1") {
    CHECK(gev_logpdf(0.0, {0.0, 1.0, 0.0}) == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("logpdf is -inf outside the support") {
    CHECK(gev_logpdf(-10.0, {0.0, 1.0, 0.5}) == -kInf);
    CHECK(gev_logpdf(10.0, {0.0, 1.0, -0.5}) == -kInf);
}

TEST_CASE("logpdf matches the numerical derivative of the cdf") {
    // density check via central differences of the CDF, step 1e-6
    const GevParams p{2.0, 1.5, 0.1};
    const double y = 3.0;
    const double fd_pdf =
        oracles::central_diff([&](double v) { return gev_cdf(v, p); }, y, 1e-6);
    CHECK(gev_logpdf(y, p) == Catch::Approx(std::log(fd_pdf)).epsilon(1e-7));
}

TEST_CASE("cdf identities") {
    Rng rng(2024, 11);
    for (int i = 0; i < 50; ++i) {
        const GevParams p = random_params(rng);
        CHECK(gev_cdf(p.mu, p) == Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    }
    // lower support bound for positive shape
    const GevParams pos{1.0, 2.0, 0.4};
    const double lower = pos.mu - pos.sigma / pos.xi;
    CHECK(gev_cdf(lower - 1e-9, pos) == 0.0);
    CHECK(gev_cdf(lower + 1e-12, pos) < 1e-6);
}

TEST_CASE("cdf against a Monte-Carlo inverse-transform oracle") {
    const GevParams p{0.0, 1.0, 0.2};
    const double y = 1.0;
    Rng rng(99, 5);
    const int n = 1000000;
    int count = 0;
    for (int i = 0; i < n; ++i)
        if (gev_quantile(rng.uniform(), p) <= y) ++count;
    const double est = static_cast<double>(count) / n;
    const double truth = gev_cdf(y, p);
    const double se = std::sqrt(truth * (1.0 - truth) / n);
    CHECK(std::fabs(est - truth) < 3.0 * se);
}

TEST_CASE("quantile inverts the F(mu) = e^-1 identity") {
    CHECK(gev_quantile(std::exp(-1.0), {5.0, 2.0, 0.3}) == Catch::Approx(5.0).margin(1e-10));
}

TEST_CASE("quantile matches bisection on the cdf") {
    {
        // frozen expectation from the bisection oracle: Gumbel median
        const GevParams p{0.0, 1.0, 0.0};
        const double via_bisect =
            oracles::bisect([&](double v) { return gev_cdf(v, p); }, 0.5, -10.0, 10.0);
        CHECK(gev_quantile(0.5, p) == Catch::Approx(via_bisect).margin(1e-9));
        CHECK(gev_quantile(0.5, p) == Catch::Approx(-std::log(std::log(2.0))).margin(1e-12));
    }
    {
        const GevParams p{4.0, 1.2, 0.15};
        const double via_bisect =
            oracles::bisect([&](double v) { return gev_cdf(v, p); }, 0.99, 4.0, 60.0);
        CHECK(gev_quantile(0.99, p) == Catch::Approx(via_bisect).margin(1e-8));
    }
}

TEST_CASE("return level definition and monotonicity") {
    const GevParams p{0.0, 1.0, 0.0};
    CHECK(return_level(ReturnPeriod(100.0), {4.0, 1.2, 0.15}) ==
          Catch::Approx(gev_quantile(0.99, {4.0, 1.2, 0.15})).margin(1e-14));
    const double oracle_t10 =
        oracles::bisect([&](double v) { return gev_cdf(v, p); }, 0.9, -5.0, 30.0);
    CHECK(return_level(ReturnPeriod(10.0), p) == Catch::Approx(oracle_t10).margin(1e-9));
    CHECK(return_level(ReturnPeriod(10.0), p) ==
          Catch::Approx(-std::log(-std::log(0.9))).margin(1e-12));
    CHECK(return_level(ReturnPeriod(2.0), p) < return_level(ReturnPeriod(100.0), p));
    CHECK_THROWS_AS(ReturnPeriod(1.0), input_error);
}

TEST_CASE("cdf-quantile round trip over random parameters") {
    Rng rng(77, 2);
    for (int i = 0; i < 1000; ++i) {
        const GevParams p = random_params(rng);
        const double prob = rng.uniform(1e-4, 1.0 - 1e-4);
        CHECK(std::fabs(gev_cdf(gev_quantile(prob, p), p) - prob) < 1e-9);
    }
}

TEST_CASE("gumbel branch continuity in xi") {
    Rng rng(31, 4);
    for (int i = 0; i < 200; ++i) {
        const double mu = rng.uniform(-3.0, 6.0);
        const double sigma = rng.uniform(0.3, 3.0);
        const double y = mu + sigma * rng.uniform(-1.5, 4.0);
        const double at_zero = gev_logpdf(y, {mu, sigma, 0.0});
        CHECK(std::fabs(gev_logpdf(y, {mu, sigma, 1e-7}) - at_zero) < 1e-5);
        CHECK(std::fabs(gev_logpdf(y, {mu, sigma, -1e-7}) - at_zero) < 1e-5);
    }
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(5150, 8);
    int checked = 0;
    while (checked < 1000) {
        const GevParams p = random_params(rng);
        const double y = random_in_support(rng, p);
        // keep a margin from the support boundary so the FD stencil stays valid
        if (std::fabs(p.xi) > 1e-4 && 1.0 + p.xi * (y - p.mu) / p.sigma < 1e-3) continue;
        const auto grad = gev_logpdf_grad(y, p);
        const double h = 1e-6;
        const double d_mu = oracles::central_diff(
            [&](double v) { return gev_logpdf(y, {v, p.sigma, p.xi}); }, p.mu, h);
        const double d_sigma = oracles::central_diff(
            [&](double v) { return gev_logpdf(y, {p.mu, v, p.xi}); }, p.sigma, h);
        const double d_xi = oracles::central_diff(
            [&](double v) { return gev_logpdf(y, {p.mu, p.sigma, v}); }, p.xi, h);
        const double scale_mu = std::max(std::fabs(d_mu), 1e-2);
        const double scale_sigma = std::max(std::fabs(d_sigma), 1e-2);
        const double scale_xi = std::max(std::fabs(d_xi), 1e-2);
        REQUIRE(std::fabs(grad[0] - d_mu) / scale_mu < 1e-5);
        REQUIRE(std::fabs(grad[1] - d_sigma) / scale_sigma < 1e-5);
        REQUIRE(std::fabs(grad[2] - d_xi) / scale_xi < 1e-5);
        ++checked;
    }
}

TEST_CASE("gradient translation identity and gumbel-limit xi component") {
    const GevParams p{0.0, 1.0, 0.0};
    // d/dmu logpdf = -d/dy logpdf
    const auto g = gev_logpdf_grad(0.7, p);
    const double d_y =
        oracles::central_diff([&](double v) { return gev_logpdf(v, p); }, 0.7, 1e-6);
    CHECK(g[0] == Catch::Approx(-d_y).margin(1e-8));
    // at the Gumbel location the mu-gradient vanishes
    const auto g0 = gev_logpdf_grad(0.0, p);
    CHECK(g0[0] == Catch::Approx(0.0).margin(1e-12));
    // xi component at xi = 0 equals the series limit = FD across the switch
    const double d_xi_fd = oracles::central_diff(
        [&](double v) { return gev_logpdf(0.7, {0.0, 1.0, v}); }, 0.0, 1e-4);
    CHECK(g0.size() == 3);
    CHECK(gev_logpdf_grad(0.7, p)[2] == Catch::Approx(d_xi_fd).margin(1e-6));
}

TEST_CASE("gradient errors on the support boundary") {
    const GevParams p{0.0, 1.0, 0.5};
    CHECK_THROWS_AS(gev_logpdf_grad(-2.0, p), numerical_error);
    CHECK_THROWS_AS(gev_logpdf_grad(-2.5, p), numerical_error);
}

TEST_CASE("density integrates to one") {
    const GevParams cases[] = {{0.0, 1.0, 0.0}, {2.0, 1.5, 0.2}, {1.0, 0.8, -0.2}};
    for (const auto& p : cases) {
        const double lo = std::min(gev_quantile(1e-12, p), p.mu - 12.0 * p.sigma);
        const double hi = std::max(gev_quantile(1.0 - 1e-13, p), p.mu + 12.0 * p.sigma);
        const double mass = oracles::adaptive_simpson(
            [&](double y) {
                const double lp = gev_logpdf(y, p);
                return lp == -kInf ? 0.0 : std::exp(lp);
            },
            lo, hi, 1e-12);
        CHECK(std::fabs(mass - 1.0) < 1e-6);
    }
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(gev_logpdf(std::nan(""), {0.0, 1.0, 0.0}), input_error);
    CHECK_THROWS_AS(gev_logpdf(0.0, {0.0, -1.0, 0.0}), input_error);
    CHECK_THROWS_AS(gev_quantile(0.0, {0.0, 1.0, 0.0}), input_error);
    CHECK_THROWS_AS(gev_quantile(1.0, {0.0, 1.0, 0.0}), input_error);
}
