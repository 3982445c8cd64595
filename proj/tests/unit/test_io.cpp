#include <catch2/catch_amalgamated.hpp>

#include "rainfreq/io.hpp"

#include <filesystem>
#include <fstream>

using namespace rainfreq;

TEST_CASE("fnv digest is stable and sensitive") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(hex64(fnv1a64("rainfall")).size() == 16);
}

TEST_CASE("atomic write leaves no temp file and replaces content") {
    const auto dir = std::filesystem::temp_directory_path() / "rainfreq_io_test";
    std::filesystem::remove_all(dir);
    const auto path = dir / "out.csv";
    atomic_write(path, "first\n");
    atomic_write(path, "second\n");
    CHECK(read_file(path.string()) == "second\n");
    CHECK_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("metadata header carries the provenance fields") {
    Metadata m;
    m.config_hash = "00ff";
    m.seed = 42;
    m.input_digests = {{"ams", "abcd"}};
    m.created = "2024-01-02T03:04:05Z";
    const std::string r = m.render();
    CHECK(r.find("# rainfreq ") != std::string::npos);
    CHECK(r.find("# created: 2024-01-02T03:04:05Z\n") != std::string::npos);
    CHECK(r.find("# seed: 42\n") != std::string::npos);
    CHECK(r.find("# rng: philox4x32-10\n") != std::string::npos);
    CHECK(r.find("# config_hash: 00ff\n") != std::string::npos);
    CHECK(r.find("# input ams: abcd\n") != std::string::npos);
}
