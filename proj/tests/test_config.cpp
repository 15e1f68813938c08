#include <doctest.h>

#include <string>

#include "cbm/app/config.hpp"
#include "cbm/errors.hpp"

using namespace cbm;
using namespace cbm::app;
using doctest::Approx;
using nlohmann::json;

TEST_SUITE("config") {
    TEST_CASE("presets parse and validate") {
        for (const auto& name : preset_names()) {
            CAPTURE(name);
            const auto cfg = parse_config(json{{"preset", name}});
            CHECK_NOTHROW(cfg.validate());
            CHECK(cfg.preset == name);
            CHECK(cfg.t_grid.size() == 10);
            CHECK(cfg.m_grid.size() == 8);
            REQUIRE(cfg.policy.has_value());
            CHECK(cfg.policy->inspection_period == Approx(6.333333333333));
        }
        const auto det = parse_config(json{{"preset", "baseline_deterministic"}});
        CHECK_FALSE(det.system.growth.has_random_effect());
        CHECK(det.sensitivity.kind == SweepKind::shape_and_rate);
        CHECK_FALSE(det.sensitivity.fixed_policy.has_value());
        const auto re = parse_config(json{{"preset", "baseline_random_effects"}});
        CHECK(re.system.growth.has_random_effect());
        CHECK(re.sensitivity.kind == SweepKind::shape_and_scale_center);
        CHECK_THROWS_AS(parse_config(json{{"preset", "nope"}}), ValidationError);
    }

    TEST_CASE("document keys override the preset") {
        const auto cfg = parse_config(json::parse(R"({
            "preset": "baseline_deterministic",
            "seed": 7,
            "system": {"arrivals": {"mu": 0.5}},
            "grid": {"T": [2, 4], "M": {"from": 2, "to": 8, "points": 3}}
        })"));
        CHECK(cfg.seed == 7);
        CHECK(cfg.system.arrivals.mu == 0.5);
        CHECK(cfg.system.arrivals.lambda0 == 1.0);
        CHECK(cfg.t_grid == std::vector<double>{2.0, 4.0});
        CHECK(cfg.m_grid == std::vector<double>{2.0, 5.0, 8.0});
    }

    TEST_CASE("unknown keys and bad values are rejected") {
        try {
            parse_config(json::parse(R"({"system": {"arrivals": {"lambda": 1}}})"));
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("system.arrivals.lambda") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_config(json::parse(R"({"system": {"arrivals": {"delta": -1}}})")), ValidationError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"preset": "baseline_deterministic", "grid": {"M": [12]}})")),
                        ValidationError);
        CHECK_THROWS_AS(parse_config(json::parse(R"({"sensitivity": {"kind": "other"}})")), ValidationError);
    }

    TEST_CASE("costs sweep fixes the policy") {
        const auto cfg = parse_config(json::parse(R"({
            "preset": "baseline_deterministic",
            "sensitivity": {"kind": "costs", "axis1": [190, 210], "axis2": [90, 110]}
        })"));
        CHECK(cfg.sensitivity.kind == SweepKind::corrective_and_preventive);
        REQUIRE(cfg.sensitivity.fixed_policy.has_value());
        CHECK(cfg.sensitivity.fixed_policy->preventive_threshold == Approx(1.0 + 4.0 * 9.0 / 7.0));
    }

    TEST_CASE("to_json round trip") {
        for (const auto& name : preset_names()) {
            const auto cfg = parse_config(json{{"preset", name}});
            const json j = to_json(cfg);
            const auto back = parse_config(j);
            CHECK(to_json(back) == j);
        }
    }
}
