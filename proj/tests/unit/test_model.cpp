#include <doctest.h>

#include <fstream>

#include "freqstab/model.hpp"
#include "support.hpp"

using namespace freqstab;
using nlohmann::json;

namespace {

json reference_json() { return read_json_file(test::data_path("reference_model.json")); }

std::string field_of(const json& j) {
    try {
        (void)build_system(j);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<accepted>";
}

}  // namespace

TEST_CASE("reference model loads with the expected structure") {
    const TwoAreaSystem sys = test::reference_system();
    CHECK(sys.base.s_base == 10.0);
    CHECK(sys.base.f0 == 50.0);
    CHECK(sys.area_ip.blocks.size() == 5);
    CHECK(sys.area_ce.blocks.size() == 4);
    const GenerationBlock* nuclear = sys.area_ip.find_block("nuclear");
    REQUIRE(nuclear != nullptr);
    CHECK_FALSE(nuclear->provides_fcr());
    const GenerationBlock* cn = sys.area_ce.find_block("coal_nuclear");
    REQUIRE(cn != nullptr);
    CHECK(cn->technologies == std::vector<std::string>{"coal", "nuclear"});
    CHECK(sys.area_ip.find_block("hydro")->governor->kind() == TechnologyKind::HydroClassic);
    CHECK(sys.area_ip.find_block("missing") == nullptr);
}

TEST_CASE("json round trip is lossless") {
    const TwoAreaSystem sys = test::reference_system();
    CHECK(build_system(to_json(sys)) == sys);
}

TEST_CASE("area and kind names") {
    CHECK(parse_area("IP") == AreaId::IP);
    CHECK(parse_area("ce") == AreaId::CE);
    CHECK_THROWS((void)parse_area("FR"));
    CHECK(to_string(AreaId::CE) == "CE");
    for (auto k : {TechnologyKind::SteamTgov1, TechnologyKind::GasGast, TechnologyKind::HydroClassic,
                   TechnologyKind::SyncCondenser}) {
        CHECK(parse_kind(to_string(k)) == k);
    }
    CHECK_FALSE(parse_kind("steam").has_value());
}

TEST_CASE("malformed descriptions name the offending field") {
    SUBCASE("missing droop") {
        json j = reference_json();
        j["area_ip"]["blocks"][2]["governor"].erase("r");
        CHECK(field_of(j) == "area_ip.blocks[2].governor.r");
    }
    SUBCASE("non-positive water starting time") {
        json j = reference_json();
        j["area_ce"]["blocks"][2]["governor"]["tw"] = 0.0;
        CHECK(field_of(j) == "area_ce.blocks[2].governor.tw");
    }
    SUBCASE("zero inertia") {
        json j = reference_json();
        j["area_ip"]["h"] = 0.0;
        CHECK(field_of(j) == "area_ip.h");
    }
    SUBCASE("unknown kind") {
        json j = reference_json();
        j["area_ip"]["blocks"][1]["kind"] = "Diesel";
        CHECK(field_of(j) == "area_ip.blocks[1].kind");
    }
    SUBCASE("negative tie coefficient") {
        json j = reference_json();
        j["tie"]["t_coeff"] = -1.0;
        CHECK(field_of(j) == "tie.t_coeff");
    }
    SUBCASE("duplicate block names") {
        json j = reference_json();
        j["area_ip"]["blocks"][4]["name"] = "coal";
        CHECK(field_of(j) == "area_ip.blocks[4].name");
    }
    SUBCASE("string where a number is expected") {
        json j = reference_json();
        j["area_ce"]["d"] = "high";
        CHECK(field_of(j) == "area_ce.d");
    }
    SUBCASE("transient droop below droop") {
        json j = reference_json();
        j["area_ip"]["blocks"][3]["governor"]["rt"] = 0.1;
        CHECK(field_of(j) == "area_ip.blocks[3].governor.rt");
    }
}

TEST_CASE("file errors carry the file name") {
    const auto path = std::filesystem::temp_directory_path() / "freqstab_bad_model.json";
    {
        json j = reference_json();
        j["area_ip"]["blocks"][1]["governor"]["tg"] = -0.4;
        std::ofstream(path) << j.dump();
    }
    try {
        (void)load_system(path);
        FAIL("accepted a negative time constant");
    } catch (const ConfigError& e) {
        CHECK(e.field() == path.string() + ":area_ip.blocks[1].governor.tg");
    }
    {
        std::ofstream(path) << "{ not json";
    }
    CHECK_THROWS_AS((void)load_system(path), ConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("relaxed validation admits transient droop below droop") {
    TwoAreaSystem sys = test::reference_system();
    auto& hydro = std::get<HydroClassicParams>(sys.area_ip.find_block("hydro")->governor->turbine);
    hydro.rt = 0.05;
    CHECK_THROWS_AS(validate(sys, Validation::Strict), ConfigError);
    CHECK_NOTHROW(validate(sys, Validation::Relaxed));
}

TEST_CASE("synchronous condensers cannot provide reserve") {
    TwoAreaSystem sys = test::reference_system();
    GenerationBlock sc;
    sc.name = "sc";
    sc.kind = TechnologyKind::SyncCondenser;
    sc.fcr_enabled = true;
    sc.governor = GovernorParams{};
    sys.area_ip.blocks.push_back(sc);
    CHECK_THROWS_AS(validate(sys), ConfigError);
}

TEST_CASE("inertia decomposition check") {
    AreaModel a;
    a.h = 5.0;
    CHECK(validate_decomposition(a) == false);
    a.h_load = 2.0;
    a.blocks.push_back(test::inertia_block("x"));
    a.blocks.back().h_contrib = 3.0;
    CHECK(validate_decomposition(a));
    a.blocks.back().h_contrib = 3.0 + 1e-6;
    CHECK_FALSE(validate_decomposition(a));
}

TEST_CASE("disturbance validation") {
    CHECK_NOTHROW(validate(Disturbance{AreaId::IP, 0.0, 0.0}));
    CHECK_THROWS_AS(validate(Disturbance{AreaId::IP, 0.1, -1.0}), ConfigError);
    CHECK_THROWS_AS(validate(Disturbance{AreaId::IP, std::nan(""), 1.0}), ConfigError);
}
