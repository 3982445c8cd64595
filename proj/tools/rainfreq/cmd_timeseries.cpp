#include "app.hpp"

#include <iostream>

#include "rainfreq/predict.hpp"

namespace rainfreq::cli {

/// Projected annual return-level series with credible bands, extending the
/// historical covariate with a user-supplied scenario file.
int cmd_timeseries(const RunConfig& cfg) {
    const Bundle bundle = load_bundle(cfg.require("bundle"));
    const ModelFamily family = family_from_name(bundle.family);
    if (family == ModelFamily::NonpooledNonstationary)
        throw input_error("timeseries: use a spatial family (pooled or svc)");
    ModelSpec spec(family, bundle.dataset);

    const int horizon = cfg.integer("horizon", 2050);
    const double t_years = cfg.number("return_period", 100.0);

    // historical covariate plus the projection scenario
    CovariateSeries co2 = co2_from_csv(read_csv_file(bundle.covariate_path));
    const int record_end = co2.last_year();
    if (cfg.has("scenario")) {
        const CsvTable t = read_csv_file(cfg.require("scenario"));
        const auto cy = t.column("year"), cp = t.column("ppm");
        for (const auto& row : t.rows) {
            const int y = parse_int(row.at(cy), "scenario year");
            if (y > record_end)
                co2.insert(y, parse_double(row.at(cp), "scenario ppm"),
                           CovariateSeries::Provenance::Projection);
        }
    }
    int first_obs_year = record_end;
    for (const auto& st : bundle.dataset.stations())
        for (const auto& o : st.obs) first_obs_year = std::min(first_obs_year, o.year);
    const int start = cfg.integer("start_year", first_obs_year);
    for (int y = start; y <= horizon; ++y)
        if (!co2.has(y))
            throw input_error("timeseries: scenario gap at year " + std::to_string(y));
    const auto x = covariate_transform(co2, bundle.reference_year);

    // city locations
    const auto metas = stations_from_csv(read_csv_file(cfg.require("locations")));
    if (metas.empty()) throw input_error("timeseries: empty locations file");
    std::vector<Site> pts;
    std::vector<std::string> ids;
    for (const auto& m : metas) {
        pts.push_back({m.lon, m.lat});
        ids.push_back(m.id);
    }
    const SiteSet targets(pts, ids);

    const auto draws =
        flatten_draws(bundle.samples, static_cast<std::size_t>(cfg.integer("prediction_draws", 2000)));
    Rng rng(bundle.seed, /*stream=*/0x54534552u);
    const ConditionedFieldDraws cd = condition_fields(spec, draws, targets, rng);

    const bool has_ref = cfg.has("reference_level");
    const double ref = cfg.number("reference_level", 0.0);

    std::ostringstream body;
    body << "location,lon,lat,year,return_period,mean,lower,upper";
    if (has_ref) body << ",reference";
    body << '\n';
    const ReturnPeriod period(t_years);
    for (std::size_t loc = 0; loc < targets.size(); ++loc) {
        for (int y = start; y <= horizon; ++y) {
            std::vector<double> levels;
            levels.reserve(draws.size());
            for (std::size_t d = 0; d < draws.size(); ++d)
                levels.push_back(
                    return_level(period, conditioned_params(cd, d, loc, x.at(y), family)));
            const ReturnLevelEstimate e = summarize_levels(std::move(levels));
            body << ids[loc] << ',' << format_double(targets[loc].lon) << ','
                 << format_double(targets[loc].lat) << ',' << y << ',' << format_double(t_years)
                 << ',' << format_double(e.mean) << ',' << format_double(e.lower) << ','
                 << format_double(e.upper);
            if (has_ref) body << ',' << format_double(ref);
            body << '\n';
        }
    }

    const std::filesystem::path out(cfg.require("out"));
    std::vector<std::string> inputs{bundle.ams_path, bundle.covariate_path};
    if (cfg.has("scenario")) inputs.push_back(cfg.require("scenario"));
    inputs.push_back(cfg.require("locations"));
    write_with_metadata(out / "timeseries.csv", make_metadata(cfg, inputs), body.str());
    std::cout << "wrote " << (out / "timeseries.csv").string() << " (" << targets.size()
              << " locations, years " << start << ".." << horizon << ")\n";
    return kExitOk;
}

} // namespace rainfreq::cli
