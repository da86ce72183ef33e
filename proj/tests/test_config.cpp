#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "autocube/config.hpp"

using autocube::KeyValueConfig;

TEST_CASE("parse: comments, whitespace, typed accessors") {
    const auto cfg = KeyValueConfig::parse_string(
        "# a comment\n"
        "k = 5\n"
        "  learning_rate =  1e-4  # trailing\n"
        "body_layers = 256 128\n"
        "name = desk run\n"
        "\n");
    CHECK(cfg.get_int("k") == 5);
    CHECK(cfg.get_double("learning_rate") == doctest::Approx(1e-4));
    CHECK(cfg.get_int_list("body_layers", {}) == std::vector<int>{256, 128});
    CHECK(cfg.get_string("name") == "desk run");
    CHECK(cfg.get_int("missing", 7) == 7);
    CHECK_FALSE(cfg.has("absent"));
    CHECK_THROWS_WITH_AS(cfg.get_string("absent"), doctest::Contains("missing"),
                         std::runtime_error);
}

TEST_CASE("parse errors carry line numbers; bad values are typed errors") {
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse_string("a = 1\nnonsense\n"),
                         doctest::Contains("line 2"), std::runtime_error);
    CHECK_THROWS_WITH_AS(KeyValueConfig::parse_string("bad key! = 1\n"),
                         doctest::Contains("bad key"), std::runtime_error);
    const auto cfg = KeyValueConfig::parse_string("k = five\nx = 1.2.3\n");
    CHECK_THROWS_WITH_AS(cfg.get_int("k"), doctest::Contains("not an integer"),
                         std::runtime_error);
    CHECK_THROWS_AS(cfg.get_double("x"), std::runtime_error);
}

TEST_CASE("serialization is canonical: sorted keys, one per line") {
    KeyValueConfig cfg;
    cfg.set("zeta", "1");
    cfg.set("alpha", "2");
    cfg.set_int("mid", 3);
    CHECK(cfg.serialize() == "alpha = 2\nmid = 3\nzeta = 1\n");
    // round trip
    const auto again = KeyValueConfig::parse_string(cfg.serialize());
    CHECK(again.serialize() == cfg.serialize());
}

TEST_CASE("require_known lists offenders") {
    const auto cfg = KeyValueConfig::parse_string("good = 1\ntypo_key = 2\n");
    CHECK_NOTHROW(cfg.require_known({"good", "typo_key"}));
    CHECK_THROWS_WITH_AS(cfg.require_known({"good"}), doctest::Contains("typo_key"),
                         std::runtime_error);
}

TEST_CASE("set_double keeps full precision") {
    KeyValueConfig cfg;
    cfg.set_double("x", 0.1234567890123456789);
    const auto again = KeyValueConfig::parse_string(cfg.serialize());
    CHECK(again.get_double("x") == doctest::Approx(0.1234567890123456789).epsilon(1e-16));
}
