#include "app.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "rainfreq/ghcn.hpp"

namespace rainfreq::cli {

namespace {

std::vector<std::string> dly_files(const std::string& path) {
    std::vector<std::string> files;
    if (std::filesystem::is_directory(path)) {
        for (const auto& e : std::filesystem::directory_iterator(path))
            if (e.path().extension() == ".dly") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    if (files.empty()) throw input_error("no .dly files under " + path);
    return files;
}

std::string daily_csv_body(const std::vector<DailyRecord>& rows) {
    std::ostringstream body;
    body << "station,date,depth,qflag\n";
    char date[16];
    for (const auto& r : rows) {
        std::snprintf(date, sizeof(date), "%04d-%02d-%02d", r.year, r.month, r.day);
        body << r.station << ',' << date << ',';
        if (!r.missing) body << format_double(r.depth);
        body << ',' << r.qflag << '\n';
    }
    return body.str();
}

} // namespace

/// ingest: fixed-width archives to the documented CSVs, AMS extraction, and
/// CO2 covariate assembly, driven by which config keys are present.
int cmd_ingest(const RunConfig& cfg) {
    const std::filesystem::path out(cfg.require("out"));
    std::filesystem::create_directories(out);
    std::vector<std::string> inputs;
    for (const char* key : {"dly", "stations_txt", "daily", "stations", "co2_monthly",
                            "co2_ice", "co2_projection"})
        if (cfg.has(key)) inputs.push_back(cfg.require(key));
    const Metadata meta = make_metadata(cfg, inputs);

    bool did_anything = false;
    std::string daily_path = cfg.get("daily");
    std::string stations_path = cfg.get("stations");

    // fixed-width GHCN archives -> daily.csv / stations.csv
    if (cfg.has("dly")) {
        std::vector<DailyRecord> rows;
        std::vector<std::string> warnings;
        for (const auto& f : dly_files(cfg.require("dly"))) {
            std::ifstream in(f);
            if (!in) throw input_error("cannot open " + f);
            auto part = parse_ghcn_dly(in, &warnings);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        daily_path = (out / "daily.csv").string();
        write_with_metadata(daily_path, meta, daily_csv_body(rows));
        std::cout << "wrote " << daily_path << " (" << rows.size() << " rows)\n";
        did_anything = true;
    }
    if (cfg.has("stations_txt")) {
        std::ifstream in(cfg.require("stations_txt"));
        if (!in) throw input_error("cannot open " + cfg.require("stations_txt"));
        const auto metas = parse_ghcn_stations(in);
        std::ostringstream body;
        body << "station,lon,lat\n";
        for (const auto& m : metas)
            body << m.id << ',' << format_double(m.lon) << ',' << format_double(m.lat) << '\n';
        stations_path = (out / "stations.csv").string();
        write_with_metadata(stations_path, meta, body.str());
        std::cout << "wrote " << stations_path << " (" << metas.size() << " stations)\n";
        did_anything = true;
    }

    // daily + station coordinates -> ams.csv
    if (!daily_path.empty()) {
        if (stations_path.empty())
            throw input_error("ingest: AMS extraction needs 'stations' coordinates");
        std::vector<std::string> warnings;
        const auto daily = daily_from_csv(read_csv_file(daily_path), &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << daily_path << " " << w << "\n";
        const auto extraction =
            extract_ams(daily, cfg.number("coverage", 0.99), cfg.integer("min_years", 30),
                        cfg.number("conversion", 1.11));
        for (const auto& w : extraction.warnings) std::cerr << "warning: " << w << "\n";

        std::map<std::string, StationMeta> coords;
        for (const auto& m : stations_from_csv(read_csv_file(stations_path))) coords[m.id] = m;
        std::ostringstream body;
        body << "station,lon,lat,year,inches\n";
        for (const auto& r : extraction.records) {
            auto it = coords.find(r.station);
            if (it == coords.end())
                throw input_error("ingest: no coordinates for station " + r.station);
            body << r.station << ',' << format_double(it->second.lon) << ','
                 << format_double(it->second.lat) << ',' << r.year << ','
                 << format_double(r.inches) << '\n';
        }
        const auto ams_path = out / "ams.csv";
        write_with_metadata(ams_path, meta, body.str());
        std::cout << "wrote " << ams_path.string() << " (" << extraction.roster.size()
                  << " stations, " << extraction.records.size() << " station-years)\n";
        did_anything = true;
    }

    // CO2 sources -> co2.csv
    if (cfg.has("co2_monthly") || cfg.has("co2_ice")) {
        std::vector<MonthlyCo2> monthly;
        if (cfg.has("co2_monthly")) {
            const CsvTable t = read_csv_file(cfg.require("co2_monthly"));
            const auto cy = t.column("year"), cm = t.column("month"), cp = t.column("ppm");
            for (const auto& row : t.rows)
                monthly.push_back({parse_int(row.at(cy), "co2 year"),
                                   parse_int(row.at(cm), "co2 month"),
                                   parse_double(row.at(cp), "co2 ppm")});
        }
        auto read_annual = [](const std::string& path) {
            std::vector<AnnualCo2> out_rows;
            const CsvTable t = read_csv_file(path);
            const auto cy = t.column("year"), cp = t.column("ppm");
            for (const auto& row : t.rows)
                out_rows.push_back({parse_int(row.at(cy), "co2 year"),
                                    parse_double(row.at(cp), "co2 ppm")});
            return out_rows;
        };
        std::vector<AnnualCo2> ice, proj;
        if (cfg.has("co2_ice")) ice = read_annual(cfg.require("co2_ice"));
        if (cfg.has("co2_projection")) proj = read_annual(cfg.require("co2_projection"));

        const CovariateSeries series = build_co2_series(monthly, ice, proj);
        std::ostringstream body;
        body << "year,ppm,provenance\n";
        for (int y : series.years())
            body << y << ',' << format_double(series.ppm(y)) << ','
                 << CovariateSeries::provenance_name(series.provenance(y)) << '\n';
        const auto co2_path = out / "co2.csv";
        write_with_metadata(co2_path, meta, body.str());
        std::cout << "wrote " << co2_path.string() << " (" << series.size() << " years)\n";
        did_anything = true;
    }

    if (!did_anything)
        throw input_error(
            "ingest: nothing to do; provide dly/stations_txt, daily+stations, or co2_* inputs");
    return kExitOk;
}

} // namespace rainfreq::cli
