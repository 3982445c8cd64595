#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/rng.hpp"

#include <cmath>
#include <vector>

using rainfreq::Philox4x32;
using rainfreq::Rng;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Published test vectors for the 10-round 4x32 configuration.
    {
        const auto out = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        const auto out = Philox4x32::bijection({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                               {0xffffffffu, 0xffffffffu});
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        const auto out = Philox4x32::bijection({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                               {0xa4093822u, 0x299f31d0u});
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("streams are independent and reproducible") {
    Rng a(42, 0), b(42, 0), c(42, 1);
    bool same = true, differ = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform();
        same = same && (va == b.uniform());
        differ = differ || (va != c.uniform());
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("uniform stays inside the open interval") {
    Rng rng(7, 3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal moments at sampling scale") {
    Rng rng(123, 0);
    const int n = 200000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::fabs(var - 1.0) < 0.02);
}
