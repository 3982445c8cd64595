#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rainfreq/data.hpp"
#include "rainfreq/errors.hpp"
#include "rainfreq/models.hpp"
#include "rainfreq/optimize.hpp"
#include "rainfreq/predict.hpp"
#include "rainfreq/sampler.hpp"
#include "rainfreq/scores.hpp"

namespace rainfreq {

enum class CvKind {
    OddEvenYears, ///< train on one year parity, score the other, both ways
    SpatialGrid   ///< 5x5 grid over the bounding box, diagonal-shift folds
};

struct CvFold {
    int train_parity = -1; ///< odd/even plans: 1 trains on odd years, 0 on even
    std::vector<std::size_t> held_out_stations; ///< spatial plans
};

struct CvPlan {
    CvKind kind = CvKind::OddEvenYears;
    std::vector<CvFold> folds;
};

namespace cv_detail {

/// Cell of a station in the 5x5 grid over the bounding box (row from
/// latitude, column from longitude); stations on the top edges clamp into
/// the last cell.
inline std::pair<int, int> grid_cell(const Site& s, double lon_min, double lon_max,
                                     double lat_min, double lat_max) {
    auto axis_cell = [](double v, double lo, double hi) {
        if (hi <= lo) return 0;
        int c = static_cast<int>((v - lo) / (hi - lo) * 5.0);
        return std::min(std::max(c, 0), 4);
    };
    return {axis_cell(s.lat, lat_min, lat_max), axis_cell(s.lon, lon_min, lon_max)};
}

} // namespace cv_detail

/// Spatial fold id (1..5) of each station: fold f holds out the five cells
/// on the diagonal shifted by f, so the 25 cells (and hence all stations)
/// partition into five held-out sets.
inline std::vector<int> spatial_fold_ids(const Dataset& data) {
    const auto& sites = data.sites();
    if (sites.empty()) throw input_error("spatial_fold_ids: empty dataset");
    double lon_min = kInf, lon_max = -kInf, lat_min = kInf, lat_max = -kInf;
    for (const auto& s : sites.sites()) {
        lon_min = std::min(lon_min, s.lon);
        lon_max = std::max(lon_max, s.lon);
        lat_min = std::min(lat_min, s.lat);
        lat_max = std::max(lat_max, s.lat);
    }
    std::vector<int> fold(sites.size());
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const auto [row, col] = cv_detail::grid_cell(sites[i], lon_min, lon_max, lat_min, lat_max);
        const int shift = ((col - row) % 5 + 5) % 5;
        fold[i] = shift == 0 ? 5 : shift; // shift-f diagonal <-> fold f, f in 1..5
    }
    return fold;
}

/// Build the requested cross-validation plan. For the spatial kind,
/// fold = 0 yields all five folds; fold in 1..5 selects one.
inline CvPlan make_cv_plan(CvKind kind, const Dataset& data, int fold = 0) {
    if (data.n_stations() == 0) throw input_error("make_cv_plan: empty dataset");
    CvPlan plan;
    plan.kind = kind;
    if (kind == CvKind::OddEvenYears) {
        CvFold odd, even;
        odd.train_parity = 1;
        even.train_parity = 0;
        plan.folds = {odd, even};
        for (const auto& f : plan.folds) {
            const auto train = data.filter_years(
                [&](int y) { return ((y % 2 + 2) % 2) == f.train_parity; });
            if (train.n_observations() == 0)
                throw input_error("make_cv_plan: empty training fold (no years of parity " +
                                  std::to_string(f.train_parity) + ")");
        }
        return plan;
    }

    const std::vector<int> ids = spatial_fold_ids(data);
    for (int f = 1; f <= 5; ++f) {
        if (fold != 0 && fold != f) continue;
        CvFold cf;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (ids[i] == f) cf.held_out_stations.push_back(i);
        if (cf.held_out_stations.size() == data.n_stations())
            throw input_error("make_cv_plan: fold " + std::to_string(f) +
                              " would leave no training stations");
        plan.folds.push_back(std::move(cf));
    }
    if (plan.folds.empty()) throw input_error("make_cv_plan: fold id must lie in 0..5");
    return plan;
}

/// One row of the Table-2-shaped score report.
struct ScoreRow {
    std::string family;
    double logs = 0.0;
    double qs90 = 0.0;
    double qs98 = 0.0;
    double qs99 = 0.0;
    double crps = 0.0;
    std::size_t n_observations = 0;
    std::size_t n_unsupported = 0; ///< observations outside every draw's support
};

struct CvRunConfig {
    SamplerConfig sampler;
    int map_starts = 8;
    std::size_t max_prediction_draws = 2000; ///< deterministic thinning cap
    int crps_mc_draws = 4000;
};

namespace cv_detail {

struct HeldOutObs {
    std::size_t station_in_train = 0; ///< index into the training spec (odd/even plans)
    std::size_t target_index = 0;     ///< index into the target set (spatial plans)
    int year = 0;
    double y = 0.0;
};

inline void accumulate_scores(ScoreRow& row, double y, const PredictiveEnsemble& ens,
                              int crps_draws, std::uint64_t seed) {
    const double ls = log_score(y, ens);
    if (ls == kInf)
        ++row.n_unsupported;
    else
        row.logs += ls;
    row.qs90 += quantile_score(y, ens, 0.90);
    row.qs98 += quantile_score(y, ens, 0.98);
    row.qs99 += quantile_score(y, ens, 0.99);
    row.crps += crps(y, ens, crps_draws, seed + 7919 * row.n_observations).value;
    ++row.n_observations;
}

} // namespace cv_detail

/// Fit one family on a fold's training data and score its held-out
/// observations; appends into `row`. Spatial folds score withheld stations
/// through the GP conditional only, never their own data.
inline void run_cv_fold(ModelFamily family, const Dataset& data, CvKind kind, const CvFold& fold,
                        const CvRunConfig& cfg, ScoreRow& row, std::uint64_t fold_seed) {
    if (kind == CvKind::SpatialGrid && family == ModelFamily::NonpooledNonstationary)
        throw input_error("run_cv: the nonpooled family cannot predict at withheld sites");
    Dataset train;
    std::vector<cv_detail::HeldOutObs> held;
    std::vector<std::size_t> held_stations;

    if (kind == CvKind::OddEvenYears) {
        train = data.filter_years(
            [&](int y) { return ((y % 2 + 2) % 2) == fold.train_parity; });
        for (std::size_t s = 0; s < data.n_stations(); ++s)
            for (const auto& o : data.stations()[s].obs)
                if (((o.year % 2 + 2) % 2) != fold.train_parity)
                    held.push_back({s, 0, o.year, o.depth});
    } else {
        std::vector<std::size_t> train_idx;
        std::vector<char> is_held(data.n_stations(), 0);
        for (std::size_t i : fold.held_out_stations) is_held[i] = 1;
        for (std::size_t s = 0; s < data.n_stations(); ++s)
            (is_held[s] ? held_stations : train_idx).push_back(s);
        if (train_idx.empty()) throw input_error("run_cv: empty training fold");
        train = data.select_stations(train_idx);
        for (std::size_t k = 0; k < held_stations.size(); ++k)
            for (const auto& o : data.stations()[held_stations[k]].obs)
                held.push_back({0, k, o.year, o.depth});
    }
    if (train.n_observations() == 0) throw input_error("run_cv: empty training fold");

    ModelSpec spec(family, train);
    SamplerConfig sampler_cfg = cfg.sampler;
    sampler_cfg.seed = fold_seed;
    const OptimResult map = map_estimate(spec, cfg.map_starts, fold_seed);
    const PosteriorSamples samples = sample(spec, sampler_cfg, map.theta);
    const auto draws = flatten_draws(samples, cfg.max_prediction_draws);

    if (kind == CvKind::OddEvenYears) {
        for (const auto& h : held) {
            const PredictiveEnsemble ens = station_ensemble(spec, draws, h.station_in_train, h.year);
            cv_detail::accumulate_scores(row, h.y, ens, cfg.crps_mc_draws, fold_seed);
        }
    } else {
        if (held_stations.empty()) return;
        std::vector<Site> target_sites;
        for (std::size_t s : held_stations) target_sites.push_back(data.sites()[s]);
        Rng cond_rng(fold_seed, /*stream=*/0x434f4e44u);
        const ConditionedFieldDraws cd =
            condition_fields(spec, draws, SiteSet(target_sites), cond_rng);
        for (const auto& h : held) {
            const PredictiveEnsemble ens =
                conditioned_ensemble(cd, h.target_index, data.x_at(h.year), family);
            cv_detail::accumulate_scores(row, h.y, ens, cfg.crps_mc_draws, fold_seed);
        }
    }
}

/// Run the plan for each family and return the Table-2-shaped score table:
/// per family, the unweighted mean of each score over all held-out
/// observations across folds.
inline std::vector<ScoreRow> run_cv(const std::vector<ModelFamily>& families, const Dataset& data,
                                    const CvPlan& plan, const CvRunConfig& cfg,
                                    std::uint64_t seed = 0) {
    if (data.n_observations() == 0) throw input_error("run_cv: empty dataset");
    std::vector<ScoreRow> table;
    for (ModelFamily family : families) {
        ScoreRow row;
        row.family = family_name(family);
        for (std::size_t f = 0; f < plan.folds.size(); ++f)
            run_cv_fold(family, data, plan.kind, plan.folds[f], cfg, row,
                        seed + 1000 * (f + 1));
        if (row.n_observations > 0) {
            const double n = static_cast<double>(row.n_observations);
            const double n_supported =
                static_cast<double>(row.n_observations - row.n_unsupported);
            row.logs = row.n_unsupported > 0 ? kInf : row.logs / n_supported;
            row.qs90 /= n;
            row.qs98 /= n;
            row.qs99 /= n;
            row.crps /= n;
        }
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace rainfreq
