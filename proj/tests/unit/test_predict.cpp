#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/optimize.hpp"
#include "rainfreq/predict.hpp"

#include "helpers/synthetic.hpp"

#include <algorithm>

using namespace rainfreq;

namespace {

struct SmallFit {
    synthetic::Bundle bundle;
    std::unique_ptr<ModelSpec> spec;
    PosteriorSamples samples;
    std::vector<Eigen::VectorXd> draws;
};

const SmallFit& small_svc_fit() {
    static const SmallFit fit = [] {
        SmallFit f;
        synthetic::BundleConfig cfg;
        cfg.lattice_cols = 3;
        cfg.lattice_rows = 3;
        cfg.n_years = 40;
        cfg.first_year = 1965;
        cfg.reference_year = 1985;
        cfg.seed = 2025;
        f.bundle = synthetic::make_bundle(cfg);
        f.spec = std::make_unique<ModelSpec>(ModelFamily::SpatiallyVaryingCovariates,
                                             f.bundle.dataset);
        const OptimResult map = map_estimate(*f.spec, 8, 11);
        SamplerConfig sc;
        sc.chains = 2;
        sc.iterations = 1000;
        sc.seed = 11;
        f.samples = sample(*f.spec, sc, map.theta);
        f.draws = flatten_draws(f.samples, 500);
        return f;
    }();
    return fit;
}

} // namespace

TEST_CASE("every stored draw decodes to a valid parameter set") {
    const SmallFit& f = small_svc_fit();
    const int year = f.bundle.first_year + 3;
    std::size_t checked = 0;
    for (const auto& chain : f.samples.chains()) {
        for (const auto& t : chain.draws) {
            for (std::size_t s = 0; s < f.bundle.dataset.n_stations(); ++s) {
                const GevParams p = f.spec->assemble_gev_params(t, s, year);
                REQUIRE(p.valid());
                REQUIRE(p.sigma > 0.0);
                REQUIRE(p.xi > 0.0);
                ++checked;
            }
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("conditioning at a training station matches the in-sample ensemble") {
    const SmallFit& f = small_svc_fit();
    const int year = f.bundle.first_year + 10;
    const std::size_t station = 4; // lattice center

    const PredictiveEnsemble direct = station_ensemble(*f.spec, f.draws, station, year);
    Rng rng(99, 1);
    const SiteSet target(std::vector<Site>{f.bundle.sites[station]});
    const ConditionedFieldDraws cd = condition_fields(*f.spec, f.draws, target, rng);
    const PredictiveEnsemble conditioned = conditioned_ensemble(
        cd, 0, f.bundle.x.at(year), ModelFamily::SpatiallyVaryingCovariates);

    const auto direct_levels = ensemble_return_levels(direct, 100.0);
    const auto cond_levels = ensemble_return_levels(conditioned, 100.0);
    const ReturnLevelEstimate a = summarize_levels(direct_levels);
    const ReturnLevelEstimate b = summarize_levels(cond_levels);

    // Monte-Carlo agreement: 2 standard errors of the posterior-mean level
    double var = 0.0;
    for (double v : direct_levels) var += (v - a.mean) * (v - a.mean);
    var /= static_cast<double>(direct_levels.size()) - 1.0;
    const double se = std::sqrt(var / static_cast<double>(direct_levels.size()));
    CHECK(std::fabs(a.mean - b.mean) < std::max(4.0 * se, 0.02 * a.mean));
}

TEST_CASE("return levels increase with the return period draw by draw") {
    const SmallFit& f = small_svc_fit();
    const int year = f.bundle.first_year + 5;
    const PredictiveEnsemble ens = station_ensemble(*f.spec, f.draws, 0, year);
    const auto t10 = ensemble_return_levels(ens, 10.0);
    const auto t100 = ensemble_return_levels(ens, 100.0);
    for (std::size_t i = 0; i < t10.size(); ++i) REQUIRE(t10[i] < t100[i]);

    const ReturnLevelEstimate e = summarize_levels(t100);
    CHECK(e.lower <= e.mean);
    CHECK(e.mean <= e.upper);
}

TEST_CASE("gridded posterior-mean levels vary continuously") {
    const SmallFit& f = small_svc_fit();
    const int year = f.bundle.last_year;
    const double x = f.bundle.x.at(year);

    // posterior-mean station levels for the empirical roughness bound
    std::vector<double> station_level(f.bundle.dataset.n_stations());
    for (std::size_t s = 0; s < f.bundle.dataset.n_stations(); ++s)
        station_level[s] = summarize_levels(ensemble_return_levels(
                                                station_ensemble(*f.spec, f.draws, s, year), 100.0))
                               .mean;

    // station-pair differences normalized to the grid spacing; exponential
    // kernel increments scale with sqrt(distance)
    std::vector<double> scaled;
    const auto& sites = f.bundle.dataset.sites();
    for (std::size_t i = 0; i < sites.size(); ++i)
        for (std::size_t j = i + 1; j < sites.size(); ++j)
            scaled.push_back(std::fabs(station_level[i] - station_level[j]) /
                             std::sqrt(site_distance(sites[i], sites[j])));
    std::sort(scaled.begin(), scaled.end());
    const double p99 = scaled[static_cast<std::size_t>(0.99 * (scaled.size() - 1))];

    // 0.25-degree grid of cell centers inside the station bounding box
    const double res = 0.25;
    const int cells = static_cast<int>(2.0 / res) - 1; // interior rows/cols
    std::vector<Site> grid_sites;
    for (int r = 0; r <= cells; ++r)
        for (int c = 0; c <= cells; ++c)
            grid_sites.push_back({-95.0 + (c + 0.5) * res, 29.0 + (r + 0.5) * res});
    const SiteSet grid(grid_sites);
    Rng rng(7, 2);
    const ConditionedFieldDraws cd = condition_fields(*f.spec, f.draws, grid, rng);
    std::vector<double> grid_level(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
        grid_level[g] = summarize_levels(ensemble_return_levels(
                                             conditioned_ensemble(
                                                 cd, g, x,
                                                 ModelFamily::SpatiallyVaryingCovariates),
                                             100.0))
                            .mean;

    // adjacent cells must not jump more than the station-pair roughness bound
    const double root_res = std::sqrt(res);
    double worst = 0.0;
    for (int r = 0; r <= cells; ++r) {
        for (int c = 0; c < cells; ++c) {
            const std::size_t a = static_cast<std::size_t>(r) * (cells + 1) + c;
            worst = std::max(worst,
                             std::fabs(grid_level[a] - grid_level[a + 1]) / root_res);
        }
    }
    for (int r = 0; r < cells; ++r)
        for (int c = 0; c <= cells; ++c) {
            const std::size_t a = static_cast<std::size_t>(r) * (cells + 1) + c;
            worst = std::max(worst,
                             std::fabs(grid_level[a] - grid_level[a + cells + 1]) / root_res);
        }
    CHECK(worst < p99);
}

TEST_CASE("prediction rejects families without a spatial layer") {
    const SmallFit& f = small_svc_fit();
    ModelSpec np(ModelFamily::NonpooledNonstationary, f.bundle.dataset);
    Rng rng(1, 1);
    const SiteSet target(std::vector<Site>{{-94.0, 29.5}});
    std::vector<Eigen::VectorXd> fake{Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(np.dim()))};
    CHECK_THROWS_AS(condition_fields(np, fake, target, rng), input_error);
}
