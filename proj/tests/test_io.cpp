#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "qwalk/results_io.hpp"
#include "qwalk/two_photon.hpp"

using namespace qwalk;

TEST_CASE("distribution CSV layout and ordering") {
    ModeDistribution d;
    d.step = 2;
    d.entries[{2, Coin::H}] = 0.25;
    d.entries[{0, Coin::V}] = 0.25;
    d.entries[{0, Coin::H}] = 0.25;
    d.entries[{-2, Coin::V}] = 0.25;
    std::ostringstream os;
    write_distribution_csv(os, d);
    CHECK(os.str() ==
          "step,x,coin,probability\n"
          "2,-2,V,0.25\n"
          "2,0,H,0.25\n"
          "2,0,V,0.25\n"
          "2,2,H,0.25\n");
}

TEST_CASE("empty distributions write a header-only file") {
    ModeDistribution d;
    std::ostringstream os;
    write_distribution_csv(os, d);
    CHECK(os.str() == "step,x,coin,probability\n");
}

TEST_CASE("distribution CSV round-trips within 1e-12") {
    ModeDistribution d = mode_distribution(evolve(WalkerState::symmetric_origin(), 9));
    std::ostringstream os;
    write_distribution_csv(os, d);
    std::istringstream is(os.str());
    ModeDistribution back = read_distribution_csv(is);
    CHECK(back.step == d.step);
    CHECK(oracles::max_entry_diff(d, back) < 1e-12);

    // writing is deterministic
    std::ostringstream os2;
    write_distribution_csv(os2, d);
    CHECK(os.str() == os2.str());
}

TEST_CASE("json results carry meta and distribution") {
    ModeDistribution d;
    d.step = 1;
    d.entries[{1, Coin::H}] = 0.5;
    d.entries[{-1, Coin::V}] = 0.5;

    RunManifest manifest;
    manifest.command = "walk";
    manifest.parameters = {{"steps", 1}, {"init", "0,H"}};
    manifest.rng_seed = 7;
    manifest.outputs.emplace_back("out.csv", "0123456789abcdef");

    nlohmann::json doc;
    doc["meta"] = manifest.to_json();
    doc["distribution"] = distribution_to_json(d);

    CHECK(doc["meta"]["command"] == "walk");
    CHECK(doc["meta"]["tool_version"] == kToolVersion);
    CHECK(doc["meta"]["outputs"][0]["path"] == "out.csv");
    CHECK(doc["distribution"].size() == 2);
    CHECK(doc["distribution"][0]["x"] == -1);  // stable mode order
    CHECK(doc["distribution"][0]["coin"] == "V");
    CHECK(doc["distribution"][1]["x"] == 1);
    double p = doc["distribution"][1]["probability"];
    CHECK(p == 0.5);
}

TEST_CASE("checksums are stable and sensitive") {
    CHECK(checksum_hex("") == checksum_hex(""));
    CHECK(checksum_hex("abc") != checksum_hex("abd"));
    CHECK(checksum_hex("abc").size() == 16);
}

TEST_CASE("series CSV") {
    std::ostringstream os;
    write_series_csv(os, "T", "R", {{1, 0.0}, {2, 0.5}});
    CHECK(os.str() == "T,R\n1,0\n2,0.5\n");
}
