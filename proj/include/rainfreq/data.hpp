#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rainfreq/errors.hpp"
#include "rainfreq/gp.hpp"

namespace rainfreq {

/// Year-indexed CO2 concentration with per-year provenance.
class CovariateSeries {
public:
    enum class Provenance { Observatory, IceCore, Blended, Projection };

    void insert(int year, double ppm, Provenance prov) {
        if (!(ppm > 0.0) || !std::isfinite(ppm))
            throw input_error("CovariateSeries: ppm must be positive and finite for year " +
                              std::to_string(year));
        values_[year] = {ppm, prov};
    }

    bool has(int year) const { return values_.count(year) != 0; }
    double ppm(int year) const {
        auto it = values_.find(year);
        if (it == values_.end())
            throw input_error("CovariateSeries: no value for year " + std::to_string(year));
        return it->second.first;
    }
    Provenance provenance(int year) const {
        auto it = values_.find(year);
        if (it == values_.end())
            throw input_error("CovariateSeries: no value for year " + std::to_string(year));
        return it->second.second;
    }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    int first_year() const { return values_.begin()->first; }
    int last_year() const { return values_.rbegin()->first; }

    std::vector<int> years() const {
        std::vector<int> out;
        out.reserve(values_.size());
        for (const auto& [y, v] : values_) out.push_back(y);
        return out;
    }

    static const char* provenance_name(Provenance p) {
        switch (p) {
            case Provenance::Observatory: return "observatory";
            case Provenance::IceCore: return "ice-core";
            case Provenance::Blended: return "blended";
            case Provenance::Projection: return "projection";
        }
        return "?";
    }

private:
    std::map<int, std::pair<double, Provenance>> values_;
};

/// x(t) = ln ppm(t) - ln ppm(reference). Centering at a fixed reference
/// year keeps the regression intercepts interpretable as GEV parameters
/// around that year.
inline std::map<int, double> covariate_transform(const CovariateSeries& series,
                                                 int reference_year) {
    if (!series.has(reference_year))
        throw input_error("covariate_transform: reference year " +
                          std::to_string(reference_year) + " missing from series");
    const double log_ref = std::log(series.ppm(reference_year));
    std::map<int, double> x;
    for (int year : series.years()) x[year] = std::log(series.ppm(year)) - log_ref;
    return x;
}

struct AmsObservation {
    int year;
    double depth; ///< annual maximum, inches
};

struct StationRecord {
    std::string id;
    Site site;
    std::vector<AmsObservation> obs; ///< ragged; lengths may differ across stations
};

/// Station set plus ragged annual-maximum records plus the transformed
/// covariate. Construction enforces the covariate join: every observed year
/// must carry an x value.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<StationRecord> stations, std::map<int, double> covariate_x)
        : stations_(std::move(stations)), x_(std::move(covariate_x)) {
        std::vector<Site> sites;
        std::vector<std::string> ids;
        sites.reserve(stations_.size());
        for (const auto& st : stations_) {
            sites.push_back(st.site);
            ids.push_back(st.id);
            for (const auto& o : st.obs) {
                if (!(o.depth > 0.0) || !std::isfinite(o.depth))
                    throw input_error("Dataset: nonpositive depth at station " + st.id +
                                      " year " + std::to_string(o.year));
                if (x_.find(o.year) == x_.end())
                    throw input_error("Dataset: no covariate value for year " +
                                      std::to_string(o.year) + " (station " + st.id + ")");
            }
        }
        sites_ = SiteSet(std::move(sites), std::move(ids));
    }

    const SiteSet& sites() const { return sites_; }
    const std::vector<StationRecord>& stations() const { return stations_; }
    std::size_t n_stations() const { return stations_.size(); }
    const std::map<int, double>& covariate() const { return x_; }

    double x_at(int year) const {
        auto it = x_.find(year);
        if (it == x_.end())
            throw input_error("Dataset: no covariate value for year " + std::to_string(year));
        return it->second;
    }

    std::size_t n_observations() const {
        std::size_t n = 0;
        for (const auto& st : stations_) n += st.obs.size();
        return n;
    }

    /// Subset on observations by a year predicate; keeps every station
    /// (possibly with an empty record).
    template <typename YearPred>
    Dataset filter_years(YearPred keep) const {
        std::vector<StationRecord> out = stations_;
        for (auto& st : out) {
            std::erase_if(st.obs, [&](const AmsObservation& o) { return !keep(o.year); });
        }
        return Dataset(std::move(out), x_);
    }

    /// Subset on stations by index list, preserving order.
    Dataset select_stations(const std::vector<std::size_t>& idx) const {
        std::vector<StationRecord> out;
        out.reserve(idx.size());
        for (std::size_t i : idx) out.push_back(stations_.at(i));
        return Dataset(std::move(out), x_);
    }

private:
    std::vector<StationRecord> stations_;
    SiteSet sites_;
    std::map<int, double> x_;
};

} // namespace rainfreq
