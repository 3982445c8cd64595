#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/cross_validation.hpp"

#include "helpers/synthetic.hpp"

#include <set>

using namespace rainfreq;

TEST_CASE("odd-even plan splits by year parity") {
    synthetic::BundleConfig cfg;
    cfg.lattice_cols = 2;
    cfg.lattice_rows = 1;
    cfg.first_year = 1990;
    cfg.n_years = 4;
    cfg.reference_year = 1991;
    const auto bundle = synthetic::make_bundle(cfg);

    const CvPlan plan = make_cv_plan(CvKind::OddEvenYears, bundle.dataset);
    REQUIRE(plan.folds.size() == 2);
    const auto odd_train = bundle.dataset.filter_years([](int y) { return y % 2 != 0; });
    std::set<int> odd_years;
    for (const auto& st : odd_train.stations())
        for (const auto& o : st.obs) odd_years.insert(o.year);
    CHECK(odd_years == std::set<int>{1991, 1993});
}

TEST_CASE("spatial folds partition all stations") {
    synthetic::BundleConfig cfg; // 5x4 lattice, 20 stations
    cfg.n_years = 3;
    cfg.reference_year = 1951;
    const auto bundle = synthetic::make_bundle(cfg);

    const CvPlan plan = make_cv_plan(CvKind::SpatialGrid, bundle.dataset);
    REQUIRE(plan.folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : plan.folds) {
        for (std::size_t s : fold.held_out_stations) {
            CHECK(seen.count(s) == 0); // pairwise disjoint
            seen.insert(s);
        }
    }
    CHECK(seen.size() == bundle.dataset.n_stations()); // union covers everything

    // single-fold selection matches the full plan's fold
    const CvPlan only3 = make_cv_plan(CvKind::SpatialGrid, bundle.dataset, 3);
    REQUIRE(only3.folds.size() == 1);
    CHECK(only3.folds[0].held_out_stations == plan.folds[2].held_out_stations);

    CHECK_THROWS_AS(make_cv_plan(CvKind::SpatialGrid, bundle.dataset, 7), input_error);
}

TEST_CASE("empty training fold is a plan error") {
    // all observations share one parity
    std::vector<StationRecord> recs{
        {"A", {-95.0, 30.0}, {{1990, 5.0}, {1992, 6.0}}},
        {"B", {-94.0, 30.0}, {{1990, 4.0}, {1992, 5.5}}}};
    Dataset data(recs, {{1990, 0.0}, {1992, 0.1}});
    CHECK_THROWS_AS(make_cv_plan(CvKind::OddEvenYears, data), input_error);
}

TEST_CASE("nonpooled family cannot be scored on spatial folds") {
    synthetic::BundleConfig cfg;
    cfg.n_years = 4;
    cfg.reference_year = 1952;
    const auto bundle = synthetic::make_bundle(cfg);
    const CvPlan plan = make_cv_plan(CvKind::SpatialGrid, bundle.dataset, 1);
    CvRunConfig run;
    run.sampler.chains = 2;
    run.sampler.iterations = 50;
    CHECK_THROWS_AS(
        run_cv({ModelFamily::NonpooledNonstationary}, bundle.dataset, plan, run, 1),
        input_error);
}

TEST_CASE("odd-even cv smoke run produces finite scores") {
    synthetic::BundleConfig cfg;
    cfg.lattice_cols = 2;
    cfg.lattice_rows = 1;
    cfg.n_years = 12;
    cfg.first_year = 1980;
    cfg.reference_year = 1986;
    cfg.seed = 5;
    const auto bundle = synthetic::make_bundle(cfg);

    CvRunConfig run;
    run.sampler.chains = 2;
    run.sampler.iterations = 300;
    run.sampler.max_tree_depth = 8;
    run.max_prediction_draws = 100;
    run.crps_mc_draws = 500;

    const auto table = run_cv({ModelFamily::NonpooledNonstationary}, bundle.dataset,
                              make_cv_plan(CvKind::OddEvenYears, bundle.dataset), run, 42);
    REQUIRE(table.size() == 1);
    const ScoreRow& row = table[0];
    CHECK(row.family == "nonpooled");
    CHECK(row.n_observations == bundle.dataset.n_observations());
    CHECK(std::isfinite(row.logs));
    CHECK(row.qs90 > 0.0);
    CHECK(row.qs98 > 0.0);
    CHECK(row.qs99 > 0.0);
    CHECK(row.crps > 0.0);
}
