#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rainfreq/csv.hpp"
#include "rainfreq/data.hpp"
#include "rainfreq/errors.hpp"

namespace rainfreq {

struct DailyRecord {
    std::string station;
    int year = 0, month = 0, day = 0;
    double depth = 0.0; ///< inches; meaningless when missing
    bool missing = false;
    std::string qflag; ///< any non-empty flag treats the value as missing
};

struct AmsRecord {
    std::string station;
    int year = 0;
    double inches = 0.0; ///< unconstrained 24-hour basis (raw max x 1.11)
};

struct StationMeta {
    std::string id;
    double lon = 0.0, lat = 0.0;
};

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int year, int month) {
    static const int d[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return d[month - 1];
}

inline int days_in_year(int y) { return is_leap_year(y) ? 366 : 365; }

struct AmsExtraction {
    std::vector<AmsRecord> records;   ///< sorted by (station, year)
    std::vector<std::string> roster;  ///< retained stations, sorted
    std::vector<std::string> warnings;
};

/// Annual-maximum extraction. A station-year counts only when its
/// non-missing daily coverage reaches the threshold; stations need at least
/// min_years qualifying years; retained maxima are scaled by the
/// constrained-to-unconstrained conversion factor.
inline AmsExtraction extract_ams(const std::vector<DailyRecord>& rows,
                                 double coverage_threshold = 0.99, int min_years = 30,
                                 double conversion = 1.11) {
    AmsExtraction out;
    // best valid depth per (station, year, month, day); duplicates keep the max
    std::map<std::tuple<std::string, int, int, int>, double> best;
    for (const auto& r : rows) {
        if (r.day < 1 || r.day > days_in_month(r.year, r.month)) {
            std::ostringstream w;
            w << "invalid date " << r.year << "-" << r.month << "-" << r.day << " at station "
              << r.station << "; row ignored";
            out.warnings.push_back(w.str());
            continue;
        }
        if (r.missing || !r.qflag.empty()) continue;
        if (!(r.depth >= 0.0) || !std::isfinite(r.depth)) {
            out.warnings.push_back("negative or non-finite depth at station " + r.station +
                                   " " + std::to_string(r.year) + "; row ignored");
            continue;
        }
        const auto key = std::make_tuple(r.station, r.year, r.month, r.day);
        auto [it, inserted] = best.emplace(key, r.depth);
        if (!inserted) {
            out.warnings.push_back("duplicate record for station " + r.station + " " +
                                   std::to_string(r.year) + "; keeping the larger depth");
            it->second = std::max(it->second, r.depth);
        }
    }

    std::map<std::string, std::map<int, std::pair<int, double>>> per_station; // year -> (days, max)
    for (const auto& [key, depth] : best) {
        auto& [days, mx] = per_station[std::get<0>(key)][std::get<1>(key)];
        ++days;
        mx = std::max(mx, depth);
    }

    for (const auto& [station, years] : per_station) {
        std::vector<AmsRecord> qualifying;
        for (const auto& [year, dm] : years) {
            const double coverage = static_cast<double>(dm.first) / days_in_year(year);
            if (coverage < coverage_threshold) continue;
            if (!(dm.second > 0.0)) {
                out.warnings.push_back("station " + station + " year " + std::to_string(year) +
                                       ": zero annual maximum; year skipped");
                continue;
            }
            qualifying.push_back({station, year, dm.second * conversion});
        }
        if (static_cast<int>(qualifying.size()) >= min_years) {
            out.roster.push_back(station);
            out.records.insert(out.records.end(), qualifying.begin(), qualifying.end());
        }
    }
    return out;
}

struct MonthlyCo2 {
    int year = 0, month = 0;
    double ppm = 0.0;
};

struct AnnualCo2 {
    int year = 0;
    double ppm = 0.0;
};

/// Assemble the covariate series: ice core before the observatory record,
/// observatory annual means (12 monthly values) after the ice core ends,
/// the arithmetic mean of the two in overlapping years, and projection
/// years appended after the historical record. Any hole inside the span is
/// a hard error naming the missing years.
inline CovariateSeries build_co2_series(const std::vector<MonthlyCo2>& observatory,
                                        const std::vector<AnnualCo2>& ice_core,
                                        const std::vector<AnnualCo2>& projection = {}) {
    std::map<int, std::vector<double>> monthly;
    for (const auto& m : observatory) {
        if (m.month < 1 || m.month > 12)
            throw input_error("build_co2_series: bad month " + std::to_string(m.month));
        monthly[m.year].push_back(m.ppm);
    }
    std::map<int, double> obs_annual;
    for (const auto& [year, vals] : monthly) {
        if (vals.size() != 12) continue; // incomplete year; surfaces as a gap if needed
        double s = 0.0;
        for (double v : vals) s += v;
        obs_annual[year] = s / 12.0;
    }
    std::map<int, double> ice;
    for (const auto& a : ice_core) ice[a.year] = a.ppm;
    std::map<int, double> proj;
    for (const auto& a : projection) proj[a.year] = a.ppm;

    if (obs_annual.empty() && ice.empty())
        throw input_error("build_co2_series: no historical CO2 data");

    int first = std::numeric_limits<int>::max();
    int last_hist = std::numeric_limits<int>::min();
    for (const auto& [y, v] : obs_annual) { first = std::min(first, y); last_hist = std::max(last_hist, y); }
    for (const auto& [y, v] : ice) { first = std::min(first, y); last_hist = std::max(last_hist, y); }
    int last = last_hist;
    for (const auto& [y, v] : proj) last = std::max(last, y);

    CovariateSeries series;
    std::vector<int> missing;
    for (int y = first; y <= last; ++y) {
        const bool has_obs = obs_annual.count(y) != 0;
        const bool has_ice = ice.count(y) != 0;
        if (has_obs && has_ice)
            series.insert(y, 0.5 * (obs_annual[y] + ice[y]), CovariateSeries::Provenance::Blended);
        else if (has_ice)
            series.insert(y, ice[y], CovariateSeries::Provenance::IceCore);
        else if (has_obs)
            series.insert(y, obs_annual[y], CovariateSeries::Provenance::Observatory);
        else if (y > last_hist && proj.count(y))
            series.insert(y, proj[y], CovariateSeries::Provenance::Projection);
        else
            missing.push_back(y);
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "build_co2_series: missing years inside the span:";
        for (int y : missing) msg << ' ' << y;
        throw input_error(msg.str());
    }
    return series;
}

struct KendallResult {
    double tau = 0.0;
    bool undefined = false; ///< degenerate (constant) series
};

namespace kendall_detail {

/// Inversion count by merge sort (Knight's algorithm workhorse).
inline std::size_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                    std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::size_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            inv += mid - i;
            buf[k++] = v[j++];
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
              v.begin() + static_cast<long>(lo));
    return inv;
}

inline double tie_pairs(const std::vector<double>& sorted_keys) {
    double s = 0.0;
    std::size_t i = 0;
    while (i < sorted_keys.size()) {
        std::size_t j = i;
        while (j + 1 < sorted_keys.size() && sorted_keys[j + 1] == sorted_keys[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        s += t * (t - 1.0) / 2.0;
        i = j + 1;
    }
    return s;
}

} // namespace kendall_detail

/// Kendall's tau-b with tie correction, O(n log n) via Knight's algorithm.
inline KendallResult kendall_tau_b(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw input_error("kendall_tau_b: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw input_error("kendall_tau_b: need at least 2 pairs");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }

    const double tot = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double xtie = kendall_detail::tie_pairs(xs);

    // joint ties: runs of equal (x, y)
    double xytie = 0.0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && xs[j + 1] == xs[i] && ys[j + 1] == ys[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            xytie += t * (t - 1.0) / 2.0;
            i = j + 1;
        }
    }

    std::vector<double> ys_for_ties = ys;
    std::sort(ys_for_ties.begin(), ys_for_ties.end());
    const double ytie = kendall_detail::tie_pairs(ys_for_ties);

    std::vector<double> buf(n);
    const double dis = static_cast<double>(kendall_detail::count_inversions(ys, buf, 0, n));

    const double denom = std::sqrt((tot - xtie) * (tot - ytie));
    KendallResult res;
    if (denom <= 0.0) {
        res.undefined = true;
        res.tau = std::nan("");
        return res;
    }
    res.tau = (tot - xtie - ytie + xytie - 2.0 * dis) / denom;
    return res;
}

struct StationTau {
    std::string station;
    double tau = 0.0;
    bool undefined = false;
    std::size_t n_pairs = 0;
};

/// Per-station rank correlation between annual maxima and the covariate.
/// Stations with fewer than min_pairs paired years are skipped.
inline std::vector<StationTau> kendall_tau_screen(const std::vector<AmsRecord>& ams,
                                                  const std::map<int, double>& x,
                                                  std::size_t min_pairs = 10) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> grouped;
    for (const auto& r : ams) {
        auto it = x.find(r.year);
        if (it == x.end()) continue;
        grouped[r.station].first.push_back(it->second);
        grouped[r.station].second.push_back(r.inches);
    }
    std::vector<StationTau> out;
    for (auto& [station, xy] : grouped) {
        if (xy.first.size() < min_pairs) continue;
        const KendallResult k = kendall_tau_b(xy.first, xy.second);
        out.push_back({station, k.tau, k.undefined, xy.first.size()});
    }
    return out;
}

// ---- CSV bindings for the documented file formats ------------------------

/// daily CSV: station,date,depth,qflag with ISO dates; empty depth = missing
inline std::vector<DailyRecord> daily_from_csv(const CsvTable& t,
                                               std::vector<std::string>* warnings = nullptr) {
    const auto c_station = t.column("station");
    const auto c_date = t.column("date");
    const auto c_depth = t.column("depth");
    const auto c_qflag = t.has_column("qflag") ? t.column("qflag") : static_cast<std::size_t>(-1);

    std::vector<DailyRecord> out;
    out.reserve(t.rows.size());
    std::size_t line = 1;
    for (const auto& row : t.rows) {
        ++line;
        auto warn = [&](const std::string& msg) {
            if (warnings) warnings->push_back("row " + std::to_string(line) + ": " + msg);
        };
        if (row.size() <= std::max(c_station, std::max(c_date, c_depth))) {
            warn("too few fields; row skipped");
            continue;
        }
        DailyRecord r;
        r.station = row[c_station];
        const std::string& date = row[c_date];
        if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
            warn("bad date '" + date + "'; row skipped");
            continue;
        }
        try {
            r.year = parse_int(date.substr(0, 4), "date");
            r.month = parse_int(date.substr(5, 2), "date");
            r.day = parse_int(date.substr(8, 2), "date");
        } catch (const input_error&) {
            warn("bad date '" + date + "'; row skipped");
            continue;
        }
        if (c_qflag != static_cast<std::size_t>(-1) && c_qflag < row.size())
            r.qflag = row[c_qflag];
        if (row[c_depth].empty()) {
            r.missing = true;
        } else {
            try {
                r.depth = parse_double(row[c_depth], "depth");
            } catch (const input_error&) {
                warn("bad depth '" + row[c_depth] + "'; row skipped");
                continue;
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

/// stations CSV: station,lon,lat
inline std::vector<StationMeta> stations_from_csv(const CsvTable& t) {
    const auto c_id = t.column("station");
    const auto c_lon = t.column("lon");
    const auto c_lat = t.column("lat");
    std::vector<StationMeta> out;
    for (const auto& row : t.rows) {
        StationMeta m;
        m.id = row.at(c_id);
        m.lon = parse_double(row.at(c_lon), "stations lon");
        m.lat = parse_double(row.at(c_lat), "stations lat");
        out.push_back(std::move(m));
    }
    return out;
}

/// AMS CSV: station,lon,lat,year,inches
inline std::vector<StationRecord> ams_from_csv(const CsvTable& t) {
    const auto c_id = t.column("station");
    const auto c_lon = t.column("lon");
    const auto c_lat = t.column("lat");
    const auto c_year = t.column("year");
    const auto c_in = t.column("inches");

    std::map<std::string, StationRecord> by_station;
    std::vector<std::string> order;
    for (const auto& row : t.rows) {
        const std::string id = row.at(c_id);
        auto it = by_station.find(id);
        if (it == by_station.end()) {
            StationRecord rec;
            rec.id = id;
            rec.site = {parse_double(row.at(c_lon), "ams lon"),
                        parse_double(row.at(c_lat), "ams lat")};
            it = by_station.emplace(id, std::move(rec)).first;
            order.push_back(id);
        }
        it->second.obs.push_back(
            {parse_int(row.at(c_year), "ams year"), parse_double(row.at(c_in), "ams inches")});
    }
    std::vector<StationRecord> out;
    out.reserve(order.size());
    for (const auto& id : order) out.push_back(std::move(by_station[id]));
    return out;
}

/// CO2 CSV: year,ppm[,provenance]
inline CovariateSeries co2_from_csv(const CsvTable& t) {
    const auto c_year = t.column("year");
    const auto c_ppm = t.column("ppm");
    const bool has_prov = t.has_column("provenance");
    const auto c_prov = has_prov ? t.column("provenance") : 0;

    CovariateSeries series;
    for (const auto& row : t.rows) {
        auto prov = CovariateSeries::Provenance::Observatory;
        if (has_prov) {
            const std::string& p = row.at(c_prov);
            if (p == "ice-core") prov = CovariateSeries::Provenance::IceCore;
            else if (p == "blended") prov = CovariateSeries::Provenance::Blended;
            else if (p == "projection") prov = CovariateSeries::Provenance::Projection;
            else if (p == "observatory") prov = CovariateSeries::Provenance::Observatory;
            else throw input_error("co2 csv: unknown provenance '" + p + "'");
        }
        series.insert(parse_int(row.at(c_year), "co2 year"),
                      parse_double(row.at(c_ppm), "co2 ppm"), prov);
    }
    return series;
}

} // namespace rainfreq
