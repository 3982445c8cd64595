#include "app.hpp"

#include <json.hpp>

#include <iostream>

#include "rainfreq/predict.hpp"
#include "rainfreq/version.hpp"

namespace rainfreq::cli {

namespace {

struct Targets {
    SiteSet sites;
    std::vector<std::string> ids;
    bool training_stations = false;
};

Targets resolve_targets(const RunConfig& cfg, const Bundle& bundle) {
    const std::string spec = cfg.get("locations", "stations");
    Targets t;
    if (spec == "stations") {
        t.sites = bundle.dataset.sites();
        t.ids = bundle.station_ids;
        t.training_stations = true;
        return t;
    }
    if (spec == "grid") {
        const double res = cfg.number("grid_res", 0.25);
        if (!(res > 0.0)) throw input_error("grid_res must be positive");
        double lon_min = kInf, lon_max = -kInf, lat_min = kInf, lat_max = -kInf;
        for (const auto& s : bundle.dataset.sites().sites()) {
            lon_min = std::min(lon_min, s.lon);
            lon_max = std::max(lon_max, s.lon);
            lat_min = std::min(lat_min, s.lat);
            lat_max = std::max(lat_max, s.lat);
        }
        const int n_lon = std::max(1, static_cast<int>(std::ceil((lon_max - lon_min) / res)));
        const int n_lat = std::max(1, static_cast<int>(std::ceil((lat_max - lat_min) / res)));
        std::vector<Site> pts;
        std::vector<std::string> ids;
        for (int r = 0; r < n_lat; ++r) {
            for (int c = 0; c < n_lon; ++c) {
                pts.push_back({lon_min + (c + 0.5) * res, lat_min + (r + 0.5) * res});
                ids.push_back("g" + std::to_string(r) + "_" + std::to_string(c));
            }
        }
        t.sites = SiteSet(pts, ids);
        t.ids = std::move(ids);
        return t;
    }
    // a CSV of target points: station,lon,lat
    const auto metas = stations_from_csv(read_csv_file(spec));
    std::vector<Site> pts;
    for (const auto& m : metas) {
        pts.push_back({m.lon, m.lat});
        t.ids.push_back(m.id);
    }
    t.sites = SiteSet(pts, t.ids);
    return t;
}

std::string geojson_body(const std::vector<ReturnLevelEstimate>& rows, const Metadata& meta) {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& e : rows) {
        nlohmann::json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", {e.lon, e.lat}}};
        f["properties"] = {{"location", e.location_id}, {"year", e.year},
                           {"return_period", e.return_period}, {"mean", e.mean},
                           {"lower", e.lower}, {"upper", e.upper}};
        features.push_back(std::move(f));
    }
    nlohmann::json fc;
    fc["type"] = "FeatureCollection";
    nlohmann::json inputs = nlohmann::json::object();
    for (const auto& [name, digest] : meta.input_digests) inputs[name] = digest;
    fc["metadata"] = {{"version", RAINFREQ_VERSION},
                      {"seed", meta.seed},
                      {"rng", kRngName},
                      {"config_hash", meta.config_hash},
                      {"inputs", std::move(inputs)}};
    fc["features"] = std::move(features);
    return fc.dump(1) + "\n";
}

} // namespace

int cmd_predict(const RunConfig& cfg) {
    const Bundle bundle = load_bundle(cfg.require("bundle"));
    const ModelFamily family = family_from_name(bundle.family);
    ModelSpec spec(family, bundle.dataset);

    std::vector<int> years;
    for (const auto& y : split_list(cfg.require("years")))
        years.push_back(parse_int(y, "years"));
    if (years.empty() || years.size() > 2)
        throw input_error("predict: give one or two years");
    std::vector<double> periods;
    for (const auto& p : split_list(cfg.get("return_periods", "10,100")))
        periods.push_back(parse_double(p, "return_periods"));

    const Targets targets = resolve_targets(cfg, bundle);
    if (family == ModelFamily::NonpooledNonstationary && !targets.training_stations)
        throw input_error("predict: the nonpooled family only predicts at its own stations");

    const auto draws =
        flatten_draws(bundle.samples, static_cast<std::size_t>(cfg.integer("prediction_draws", 2000)));
    std::cout << "predict: " << targets.sites.size() << " locations, " << draws.size()
              << " draws\n";

    // per-location ensembles: conditioned fields for the spatial families,
    // direct decoding for the nonpooled one
    std::vector<ReturnLevelEstimate> rows;
    std::vector<std::vector<double>> mean_by_year(years.size()); // per (loc,T) flat index
    const bool spatial = family != ModelFamily::NonpooledNonstationary;
    ConditionedFieldDraws cd;
    if (spatial) {
        Rng rng(bundle.seed, /*stream=*/0x50524544u);
        cd = condition_fields(spec, draws, targets.sites, rng);
    }

    for (std::size_t yi = 0; yi < years.size(); ++yi) {
        const double x = bundle.dataset.x_at(years[yi]); // input error when missing
        for (std::size_t loc = 0; loc < targets.sites.size(); ++loc) {
            PredictiveEnsemble ens;
            if (spatial)
                ens = conditioned_ensemble(cd, loc, x, family);
            else
                ens = station_ensemble(spec, draws, loc, years[yi]);
            for (double t_years : periods) {
                ReturnLevelEstimate e = summarize_levels(ensemble_return_levels(ens, t_years));
                e.location_id = targets.ids[loc];
                e.lon = targets.sites[loc].lon;
                e.lat = targets.sites[loc].lat;
                e.year = years[yi];
                e.return_period = t_years;
                rows.push_back(e);
                mean_by_year[yi].push_back(e.mean);
            }
        }
    }

    const Metadata meta = make_metadata(cfg, {bundle.ams_path, bundle.covariate_path});
    std::ostringstream body;
    body << "location,lon,lat,year,return_period,mean,lower,upper,pct_change\n";
    const std::size_t per_year = targets.sites.size() * periods.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& e = rows[i];
        body << e.location_id << ',' << format_double(e.lon) << ',' << format_double(e.lat) << ','
             << e.year << ',' << format_double(e.return_period) << ',' << format_double(e.mean)
             << ',' << format_double(e.lower) << ',' << format_double(e.upper) << ',';
        if (years.size() == 2 && i >= per_year) {
            const double base = mean_by_year[0][i - per_year];
            body << format_double((e.mean - base) / base * 100.0);
        }
        body << '\n';
    }

    const std::filesystem::path out(cfg.require("out"));
    write_with_metadata(out / "return_levels.csv", meta, body.str());
    atomic_write(out / "return_levels.geojson", geojson_body(rows, meta));
    std::cout << "wrote " << (out / "return_levels.csv").string() << " and .geojson\n";
    return kExitOk;
}

} // namespace rainfreq::cli
