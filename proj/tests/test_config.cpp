#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "pgddm/config.hpp"
#include "pgddm/errors.hpp"

using namespace pgddm;
using nlohmann::json;

namespace {

json valid_config() {
    return json{
        {"schema", "pgddm-config/v1"},
        {"scenario",
         {{"data_model",
           {{"vocab_size", 2},
            {"length", 2},
            {"kind", "table"},
            {"probs", {0.25, 0.25, 0.25, 0.25}}}},
          {"reward", {{"kind", "pattern"}, {"pattern", {1, 1}}}},
          {"oracle", true}}},
        {"sampler",
         {{"method", "pg"},
          {"m", 2},
          {"k", 4},
          {"T", 8},
          {"phi", 1},
          {"beta", 0.1},
          {"resample_every", 5},
          {"proposal", "remdm"},
          {"estimator", "beam"},
          {"remask", {{"kind", "constant"}, {"eta", 0.02}}},
          {"seed", 99}}},
        {"replications", 3},
    };
}

}  // namespace

TEST_CASE("a valid config parses into the expected fields") {
    const RunConfig cfg = parse_config(valid_config());
    CHECK(cfg.sampler.method == Method::pg);
    CHECK(cfg.sampler.m == 2);
    CHECK(cfg.sampler.k == 4);
    CHECK(cfg.sampler.steps == 8);
    CHECK(cfg.sampler.beta == doctest::Approx(0.1));
    CHECK(cfg.sampler.resample_every == 5);
    CHECK(cfg.sampler.proposal == Proposal::remdm);
    CHECK(cfg.sampler.seed == 99);
    CHECK(cfg.replications == 3);
    CHECK(cfg.scenario.oracle);
    CHECK(cfg.scenario.reward->indicator());
    CHECK(!cfg.has_sweep);
}

TEST_CASE("unknown keys are rejected everywhere") {
    auto doc = valid_config();
    SUBCASE("top level") { doc["extra"] = 1; }
    SUBCASE("scenario") { doc["scenario"]["extra"] = 1; }
    SUBCASE("sampler") { doc["sampler"]["particles"] = 4; }
    SUBCASE("reward") { doc["scenario"]["reward"]["extra"] = 1; }
    CHECK_THROWS_AS(parse_config(doc), config_error);
}

TEST_CASE("schema id is required") {
    auto doc = valid_config();
    doc["schema"] = "pgddm-config/v0";
    CHECK_THROWS_AS(parse_config(doc), config_error);
    doc.erase("schema");
    CHECK_THROWS_AS(parse_config(doc), config_error);
}

TEST_CASE("reward kinds") {
    auto doc = valid_config();
    SUBCASE("token_count") {
        doc["scenario"]["reward"] = {{"kind", "token_count"}, {"target", 1}, {"lambda", 2.0}};
        const RunConfig cfg = parse_config(doc);
        CHECK(cfg.scenario.reward->eval(SequenceState({1, 1})) == doctest::Approx(4.0));
    }
    SUBCASE("log_likelihood") {
        doc["scenario"]["reward"] = {
            {"kind", "log_likelihood"},
            {"ref_model",
             {{"vocab_size", 2},
              {"length", 2},
              {"kind", "table"},
              {"probs", {0.25, 0.25, 0.25, 0.25}}}}};
        const RunConfig cfg = parse_config(doc);
        CHECK(cfg.scenario.reward->eval(SequenceState({0, 1})) ==
              doctest::Approx(std::log(0.25)));
    }
    SUBCASE("constant") {
        doc["scenario"]["reward"] = {{"kind", "constant"}, {"value", 1.5}};
        CHECK(parse_config(doc).scenario.reward->eval(SequenceState({0, 0})) ==
              doctest::Approx(1.5));
    }
    SUBCASE("pattern tokens must be in the vocab") {
        doc["scenario"]["reward"] = {{"kind", "pattern"}, {"pattern", {1, 9}}};
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
    SUBCASE("unknown kind") {
        doc["scenario"]["reward"] = {{"kind", "toxicity"}};
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
}

TEST_CASE("markov data model probs layout is V init entries then V*V transitions") {
    auto doc = valid_config();
    doc["scenario"]["data_model"] = {
        {"vocab_size", 2},
        {"length", 3},
        {"kind", "markov"},
        {"probs", {0.6, 0.4, /*trans*/ 0.7, 0.3, 0.2, 0.8}}};
    const RunConfig cfg = parse_config(doc);
    CHECK(cfg.scenario.model.kind() == TabularDataModel::Kind::markov);
    CHECK(cfg.scenario.model.prob(SequenceState({0, 0, 1})) ==
          doctest::Approx(0.6 * 0.7 * 0.3));
    SUBCASE("wrong payload size") {
        doc["scenario"]["data_model"]["probs"] = {0.6, 0.4};
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
}

TEST_CASE("schedule and remask forms") {
    auto doc = valid_config();
    SUBCASE("named schedule") {
        doc["sampler"]["schedule"] = "cosine";
        CHECK(parse_config(doc).sampler.schedule.kind() == NoiseSchedule::Kind::cosine);
    }
    SUBCASE("table schedule") {
        doc["sampler"]["schedule"] = {{"kind", "table"},
                                      {"t", {0.0, 0.5, 1.0}},
                                      {"alpha", {1.0, 0.4, 0.0}}};
        CHECK(parse_config(doc).sampler.schedule.alpha_at(0.5) == doctest::Approx(0.4));
    }
    SUBCASE("remask table") {
        doc["sampler"]["remask"] = {{"kind", "table"}, {"values", {0.1, 0.1, 0.0}}};
        const RunConfig cfg = parse_config(doc);
        CHECK(cfg.sampler.remask.kind == RemaskSchedule::Kind::table);
    }
    SUBCASE("unknown schedule name") {
        doc["sampler"]["schedule"] = "sigmoid";
        CHECK_THROWS_AS(parse_config(doc), config_error);
    }
}

TEST_CASE("sweep axes expand as an ordered cross product") {
    auto doc = valid_config();
    doc["sweep"] = {{"m", {1, 2}}, {"k", {2, 4}}, {"proposal", {"mdlm", "remdm"}}};
    const RunConfig cfg = parse_config(doc);
    REQUIRE(cfg.has_sweep);
    REQUIRE(cfg.sweep_cells.size() == 8);
    CHECK(cfg.sweep_cells[0].m == 1);
    CHECK(cfg.sweep_cells[0].k == 2);
    CHECK(cfg.sweep_cells[0].proposal == Proposal::mdlm);
    CHECK(cfg.sweep_cells[1].proposal == Proposal::remdm);
    CHECK(cfg.sweep_cells[7].m == 2);
    CHECK(cfg.sweep_cells[7].k == 4);
    // unswept axes inherit the sampler section
    for (const auto& cell : cfg.sweep_cells) CHECK(cell.steps == 8);
}

TEST_CASE("config files report parse errors with a line reference") {
    const std::string path = "/tmp/pgddm_bad_config.json";
    {
        std::ofstream out(path);
        out << "{\n  \"schema\": \"pgddm-config/v1\",\n  broken\n}\n";
    }
    try {
        load_config_file(path);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config_file("/nonexistent/nope.json"), config_error);
}

TEST_CASE("config file round trip") {
    const std::string path = "/tmp/pgddm_ok_config.json";
    {
        std::ofstream out(path);
        out << valid_config().dump(2);
    }
    const RunConfig cfg = load_config_file(path);
    CHECK(cfg.sampler.k == 4);
    std::remove(path.c_str());
}
