#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/ghcn.hpp"
#include "rainfreq/pipeline.hpp"
#include "rainfreq/rng.hpp"

#include "helpers/oracles.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace rainfreq;

namespace {

/// Full synthetic year of daily rows, optionally with gaps.
std::vector<DailyRecord> full_year(const std::string& station, int year, double max_depth,
                                   int missing_days = 0) {
    std::vector<DailyRecord> rows;
    int skipped = 0;
    for (int m = 1; m <= 12; ++m) {
        for (int d = 1; d <= days_in_month(year, m); ++d) {
            if (skipped < missing_days) {
                ++skipped;
                continue;
            }
            DailyRecord r;
            r.station = station;
            r.year = year;
            r.month = m;
            r.day = d;
            r.depth = (m == 6 && d == 15) ? max_depth : 0.1;
            rows.push_back(r);
        }
    }
    return rows;
}

void append(std::vector<DailyRecord>& to, std::vector<DailyRecord> rows) {
    to.insert(to.end(), rows.begin(), rows.end());
}

} // namespace

TEST_CASE("ams extraction applies the 1.11 conversion") {
    std::vector<DailyRecord> rows;
    for (int y = 1980; y < 2012; ++y) append(rows, full_year("ST1", y, 10.0));
    const AmsExtraction out = extract_ams(rows);
    REQUIRE(out.roster == std::vector<std::string>{"ST1"});
    REQUIRE(out.records.size() == 32);
    CHECK(out.records[0].inches == Catch::Approx(11.1).epsilon(1e-12));
}

TEST_CASE("coverage below threshold excludes the year") {
    std::vector<DailyRecord> rows;
    for (int y = 1980; y < 2011; ++y) append(rows, full_year("ST1", y, 8.0));
    // 1979: 360/365 days = 0.986 coverage, below 0.99
    append(rows, full_year("ST1", 1979, 8.0, 5));
    const AmsExtraction out = extract_ams(rows);
    for (const auto& r : out.records) CHECK(r.year != 1979);
}

TEST_CASE("stations below the year minimum are dropped") {
    std::vector<DailyRecord> rows;
    for (int y = 1990; y < 2019; ++y) append(rows, full_year("SHORT", y, 5.0)); // 29 years
    for (int y = 1985; y < 2019; ++y) append(rows, full_year("LONG", y, 5.0));  // 34 years
    const AmsExtraction out = extract_ams(rows);
    CHECK(out.roster == std::vector<std::string>{"LONG"});
}

TEST_CASE("quality-flagged and missing rows do not count as coverage") {
    std::vector<DailyRecord> rows = full_year("ST1", 2000, 7.0);
    for (std::size_t i = 0; i < 10; ++i) rows[i].qflag = "G";
    const AmsExtraction out = extract_ams(rows, 0.99, 1);
    CHECK(out.records.empty()); // 356/366 days in leap 2000 is under threshold
}

TEST_CASE("extraction is order independent and idempotent") {
    std::vector<DailyRecord> rows;
    for (int y = 1970; y < 2005; ++y) append(rows, full_year("B", y, 9.0));
    for (int y = 1970; y < 2005; ++y) append(rows, full_year("A", y, 6.0));
    const AmsExtraction a = extract_ams(rows);

    std::mt19937 shuffler(99);
    std::shuffle(rows.begin(), rows.end(), shuffler);
    const AmsExtraction b = extract_ams(rows);

    REQUIRE(a.roster == b.roster);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].station == b.records[i].station);
        CHECK(a.records[i].year == b.records[i].year);
        CHECK(a.records[i].inches == b.records[i].inches);
    }
}

TEST_CASE("leap years use a 366-day denominator") {
    // 362 valid days: 362/366 = 0.9891 in leap 2020, excluded
    auto rows = full_year("ST1", 2020, 5.0, 4);
    REQUIRE(rows.size() == 362);
    CHECK(extract_ams(rows, 0.99, 1).records.empty());
    // the same 362 valid days clear the bar in ordinary 2021: 362/365 = 0.9918
    auto rows21 = full_year("ST1", 2021, 5.0, 3);
    REQUIRE(rows21.size() == 362);
    CHECK(extract_ams(rows21, 0.99, 1).records.size() == 1);
}

TEST_CASE("co2 blending follows the source-overlap rule") {
    std::vector<MonthlyCo2> obs;
    for (int y = 1958; y <= 1980; ++y)
        for (int m = 1; m <= 12; ++m) obs.push_back({y, m, 332.0});
    std::vector<AnnualCo2> ice;
    for (int y = 1940; y <= 1978; ++y) ice.push_back({y, 330.0});
    std::vector<AnnualCo2> proj{{1981, 340.0}, {1982, 341.0}};

    const CovariateSeries s = build_co2_series(obs, ice, proj);
    CHECK(s.ppm(1950) == 330.0);
    CHECK(s.provenance(1950) == CovariateSeries::Provenance::IceCore);
    CHECK(s.ppm(1970) == Catch::Approx(331.0).epsilon(1e-14)); // mean of the two
    CHECK(s.provenance(1970) == CovariateSeries::Provenance::Blended);
    CHECK(s.ppm(1980) == 332.0);
    CHECK(s.provenance(1980) == CovariateSeries::Provenance::Observatory);
    CHECK(s.ppm(1982) == 341.0);
    CHECK(s.provenance(1982) == CovariateSeries::Provenance::Projection);

    // blended values stay inside the source envelope
    for (int y = 1958; y <= 1978; ++y) {
        CHECK(s.ppm(y) >= 330.0);
        CHECK(s.ppm(y) <= 332.0);
    }
}

TEST_CASE("observatory annual mean averages twelve monthly values") {
    std::vector<MonthlyCo2> obs;
    for (int m = 1; m <= 12; ++m) obs.push_back({1990, m, 350.0 + m});
    const CovariateSeries s = build_co2_series(obs, {});
    CHECK(s.ppm(1990) == Catch::Approx(356.5).epsilon(1e-14));
}

TEST_CASE("gap years inside the span are a hard error listing the years") {
    std::vector<AnnualCo2> ice{{1940, 310.0}, {1941, 310.5}, {1944, 311.0}};
    try {
        build_co2_series({}, ice);
        FAIL("expected input_error");
    } catch (const input_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("1942") != std::string::npos);
        CHECK(msg.find("1943") != std::string::npos);
    }
}

TEST_CASE("covariate transform centers at the reference year") {
    CovariateSeries s;
    s.insert(1990, 354.0, CovariateSeries::Provenance::Observatory);
    s.insert(2000, 708.0, CovariateSeries::Provenance::Observatory);
    s.insert(2010, 900.0, CovariateSeries::Provenance::Observatory);
    const auto x = covariate_transform(s, 1990);
    CHECK(x.at(1990) == 0.0);
    CHECK(x.at(2000) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    // monotone ppm -> monotone x
    CHECK(x.at(1990) < x.at(2000));
    CHECK(x.at(2000) < x.at(2010));
    CHECK_THROWS_AS(covariate_transform(s, 1980), input_error);
}

TEST_CASE("kendall tau-b endpoints and the brute-force oracle") {
    {
        std::vector<double> x{1, 2, 3, 4, 5}, inc{2, 4, 5, 7, 9}, dec{9, 7, 5, 4, 2};
        CHECK(kendall_tau_b(x, inc).tau == Catch::Approx(1.0).epsilon(1e-14));
        CHECK(kendall_tau_b(x, dec).tau == Catch::Approx(-1.0).epsilon(1e-14));
    }
    Rng rng(404, 2);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<double> x, y;
        for (int i = 0; i < 20; ++i) {
            // quantize to force ties
            x.push_back(std::floor(rng.uniform(0.0, 8.0)));
            y.push_back(std::floor(rng.uniform(0.0, 8.0)));
        }
        const KendallResult k = kendall_tau_b(x, y);
        if (k.undefined) continue;
        const double oracle = oracles::brute_force_tau_b(x, y);
        REQUIRE(k.tau == Catch::Approx(oracle).margin(1e-12));
        CHECK(k.tau >= -1.0);
        CHECK(k.tau <= 1.0);
    }
    // degenerate constant series is flagged
    CHECK(kendall_tau_b({1, 1, 1}, {2, 3, 4}).undefined);
}

TEST_CASE("kendall screen joins ams records with the covariate") {
    std::vector<AmsRecord> ams;
    std::map<int, double> x;
    for (int y = 1990; y < 2005; ++y) {
        x[y] = 0.01 * (y - 1990);
        ams.push_back({"UP", y, 5.0 + 0.3 * (y - 1990)});
        ams.push_back({"FEW", y, 4.0});
    }
    // drop FEW below the pair minimum by removing the covariate overlap
    std::vector<AmsRecord> trimmed;
    for (const auto& r : ams)
        if (r.station == "UP" || r.year < 1995) trimmed.push_back(r);
    const auto taus = kendall_tau_screen(trimmed, x, 10);
    REQUIRE(taus.size() == 1);
    CHECK(taus[0].station == "UP");
    CHECK(taus[0].tau == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ghcn dly parsing converts units and honors quality flags") {
    // two days of PRCP in tenths of mm: day1 = 254 (1 inch), day2 flagged
    std::ostringstream line;
    line << "USW00012345" << "1990" << "01" << "PRCP";
    line << "  254   ";                    // day 1: value 254, no flags
    line << "  508 G ";                    // day 2: value 508, qflag G
    line << "-9999   ";                    // day 3: missing
    for (int d = 4; d <= 31; ++d) line << "    0   ";
    std::istringstream in(line.str());
    const auto rows = parse_ghcn_dly(in);
    REQUIRE(rows.size() == 31);
    CHECK(rows[0].depth == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rows[0].qflag.empty());
    CHECK(rows[1].qflag == "G");
    CHECK(rows[2].missing);
}

TEST_CASE("ghcn stations file parsing") {
    std::istringstream in(
        "USW00012345  29.5342  -95.1342    8.2 TX HOUSTON                       \n"
        "bad line\n"
        "USW00099999  30.0000  -90.2500    1.0 LA NEW ORLEANS                   \n");
    const auto metas = parse_ghcn_stations(in);
    REQUIRE(metas.size() == 2);
    CHECK(metas[0].id == "USW00012345");
    CHECK(metas[0].lat == Catch::Approx(29.5342));
    CHECK(metas[0].lon == Catch::Approx(-95.1342));
}

TEST_CASE("daily csv round trip with warnings for bad rows") {
    std::istringstream in(
        "station,date,depth,qflag\n"
        "S1,1990-01-01,0.5,\n"
        "S1,1990-01-02,,\n"
        "S1,bad-date,1.0,\n"
        "S1,1990-01-04,oops,\n"
        "S1,1990-01-05,2.5,X\n");
    std::vector<std::string> warnings;
    const auto rows = daily_from_csv(read_csv(in), &warnings);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].depth == 0.5);
    CHECK(rows[1].missing);
    CHECK(rows[2].qflag == "X");
    CHECK(warnings.size() == 2); // bad date + bad depth, never silent
}
