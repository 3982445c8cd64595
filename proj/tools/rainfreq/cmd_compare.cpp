#include "app.hpp"

#include <iostream>
#include <set>

namespace rainfreq::cli {

namespace {

using Key = std::pair<std::string, double>; // (station, return period)

std::string key_name(const Key& k) {
    return k.first + "/T=" + format_fixed(k.second, 1);
}

} // namespace

/// Percentage difference of our return-level estimates against an external
/// reference table, keyed by station and return period. Positive means our
/// estimate is higher.
int cmd_compare(const RunConfig& cfg) {
    const CsvTable ours_t = read_csv_file(cfg.require("ours"));
    const CsvTable ref_t = read_csv_file(cfg.require("reference"));

    // ours: predict output (location, return_period, mean [, year])
    std::map<Key, double> ours;
    {
        const auto c_loc = ours_t.column(ours_t.has_column("location") ? "location" : "station");
        const auto c_t = ours_t.column("return_period");
        const auto c_mean = ours_t.column(ours_t.has_column("mean") ? "mean" : "level");
        std::set<std::string> years;
        const bool has_year = ours_t.has_column("year");
        const auto c_year = has_year ? ours_t.column("year") : 0;
        for (const auto& row : ours_t.rows) {
            if (has_year) years.insert(row.at(c_year));
            const Key k{row.at(c_loc), parse_double(row.at(c_t), "ours return_period")};
            ours[k] = parse_double(row.at(c_mean), "ours mean");
        }
        if (years.size() > 1)
            throw input_error("compare: 'ours' holds several years; predict a single year first");
    }

    // reference: station, return_period, level
    std::map<Key, double> ref;
    {
        const auto c_loc = ref_t.column(ref_t.has_column("station") ? "station" : "location");
        const auto c_t = ref_t.column("return_period");
        const auto c_level = ref_t.column(ref_t.has_column("level") ? "level" : "mean");
        for (const auto& row : ref_t.rows) {
            const Key k{row.at(c_loc), parse_double(row.at(c_t), "reference return_period")};
            ref[k] = parse_double(row.at(c_level), "reference level");
        }
    }

    std::vector<std::string> unmatched;
    for (const auto& [k, v] : ours)
        if (!ref.count(k)) unmatched.push_back("ours-only " + key_name(k));
    for (const auto& [k, v] : ref)
        if (!ours.count(k)) unmatched.push_back("reference-only " + key_name(k));
    if (!unmatched.empty()) {
        std::ostringstream msg;
        msg << "compare: key mismatch between the two tables:";
        for (const auto& u : unmatched) msg << "\n  " << u;
        throw input_error(msg.str());
    }

    std::ostringstream body;
    body << "station,return_period,ours,reference,pct_diff,flag\n";
    for (const auto& [k, v] : ours) {
        const double r = ref.at(k);
        body << k.first << ',' << format_double(k.second) << ',' << format_double(v) << ','
             << format_double(r) << ',';
        if (r == 0.0)
            body << ",undefined"; // row preserved, difference undefined
        else
            body << format_double((v - r) / r * 100.0) << ',';
        body << '\n';
    }

    const std::filesystem::path out(cfg.require("out"));
    const Metadata meta = make_metadata(cfg, {cfg.require("ours"), cfg.require("reference")});
    write_with_metadata(out / "comparison.csv", meta, body.str());
    std::cout << "wrote " << (out / "comparison.csv").string() << " (" << ours.size()
              << " keys)\n";
    return kExitOk;
}

} // namespace rainfreq::cli
