#pragma once

#include <istream>
#include <string>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/pipeline.hpp"

namespace rainfreq {

/// GHCN-Daily .dly fixed-width reader, PRCP element only.
/// Layout per line: ID cols 1-11, YEAR 12-15, MONTH 16-17, ELEMENT 18-21,
/// then 31 day groups of VALUE(5) MFLAG(1) QFLAG(1) SFLAG(1).
/// PRCP values are tenths of millimeters; -9999 marks missing. Depths are
/// converted to inches here so everything downstream stays in one unit.
inline std::vector<DailyRecord> parse_ghcn_dly(std::istream& in,
                                               std::vector<std::string>* warnings = nullptr) {
    std::vector<DailyRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() < 21) {
            if (warnings)
                warnings->push_back("dly line " + std::to_string(lineno) + ": too short; skipped");
            continue;
        }
        const std::string element = line.substr(17, 4);
        if (element != "PRCP") continue;
        const std::string id = line.substr(0, 11);
        int year = 0, month = 0;
        try {
            year = parse_int(csv_detail::trim(line.substr(11, 4)), "dly year");
            month = parse_int(csv_detail::trim(line.substr(15, 2)), "dly month");
        } catch (const input_error&) {
            if (warnings)
                warnings->push_back("dly line " + std::to_string(lineno) + ": bad year/month; skipped");
            continue;
        }
        const int ndays = days_in_month(year, month);
        for (int day = 1; day <= std::min(ndays, 31); ++day) {
            const std::size_t off = 21 + static_cast<std::size_t>(day - 1) * 8;
            if (off + 8 > line.size() + 1) break;
            if (off + 5 > line.size()) break;
            const std::string raw = csv_detail::trim(line.substr(off, 5));
            DailyRecord r;
            r.station = id;
            r.year = year;
            r.month = month;
            r.day = day;
            if (off + 7 <= line.size()) {
                const char q = line[off + 6];
                if (q != ' ') r.qflag = std::string(1, q);
            }
            if (raw.empty() || raw == "-9999") {
                r.missing = true;
            } else {
                int tenths_mm = 0;
                try {
                    tenths_mm = parse_int(raw, "dly value");
                } catch (const input_error&) {
                    if (warnings)
                        warnings->push_back("dly line " + std::to_string(lineno) + " day " +
                                            std::to_string(day) + ": bad value '" + raw +
                                            "'; treated as missing");
                    r.missing = true;
                }
                if (!r.missing) r.depth = tenths_mm / 254.0; // tenths of mm -> inches
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// ghcnd-stations.txt fixed-width reader: ID 1-11, LAT 13-20, LON 22-30.
inline std::vector<StationMeta> parse_ghcn_stations(std::istream& in) {
    std::vector<StationMeta> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.size() < 30) continue;
        StationMeta m;
        m.id = csv_detail::trim(line.substr(0, 11));
        try {
            m.lat = parse_double(csv_detail::trim(line.substr(12, 8)), "stations lat");
            m.lon = parse_double(csv_detail::trim(line.substr(21, 9)), "stations lon");
        } catch (const input_error&) {
            continue;
        }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace rainfreq
