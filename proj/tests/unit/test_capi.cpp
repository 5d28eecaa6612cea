#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/heatpath.h"

#include <cmath>
#include <cstring>
#include <string>

TEST_CASE("config handle lifecycle") {
    hp_config* cfg = nullptr;
    REQUIRE(hp_config_create(&cfg) == HP_OK);
    CHECK(hp_config_set(cfg, "samples", "123") == HP_OK);
    char buf[32];
    size_t needed = 0;
    REQUIRE(hp_config_get(cfg, "samples", buf, sizeof buf, &needed) == HP_OK);
    CHECK(std::string(buf) == "123");
    CHECK(needed == 4);

    CHECK(hp_config_set(cfg, "nope", "1") == HP_ERR_VALIDATION);
    CHECK(std::strstr(hp_last_error(), "nope") != nullptr);
    CHECK(hp_config_get(cfg, "samples", buf, 2, &needed) == HP_ERR_INVALID_INPUT);

    size_t size = 0;
    REQUIRE(hp_config_serialize(cfg, nullptr, 0, &size) == HP_OK);
    std::string text(size, '\0');
    REQUIRE(hp_config_serialize(cfg, text.data(), size, nullptr) == HP_OK);
    hp_config* copy = nullptr;
    REQUIRE(hp_config_parse(text.c_str(), &copy) == HP_OK);
    uint64_t h1 = 0, h2 = 0;
    hp_config_hash(cfg, &h1);
    hp_config_hash(copy, &h2);
    CHECK(h1 == h2);
    hp_config_destroy(copy);
    hp_config_destroy(cfg);
}

TEST_CASE("null arguments are reported") {
    CHECK(hp_config_create(nullptr) == HP_ERR_INVALID_INPUT);
    CHECK(hp_run_step(nullptr) == HP_ERR_INVALID_INPUT);
    CHECK(std::string(hp_status_name(HP_ERR_PROPERTY_FAILED)) == "property-failed");
}

TEST_CASE("billiard flow through the C interface") {
    hp_geometry* g = nullptr;
    REQUIRE(hp_geometry_create("disk(1)", &g) == HP_OK);
    CHECK(hp_geometry_coordinates(g) == 2);
    const double x[2] = {0, 0}, v[2] = {2, 0};
    double xo[2], vo[2];
    int refl = 0;
    REQUIRE(hp_billiard_flow(g, x, v, 1.0, xo, vo, &refl) == HP_OK);
    CHECK(refl == 1);
    CHECK(std::abs(xo[0]) < 1e-12);
    CHECK(vo[0] == doctest::Approx(-2.0));
    hp_geometry_destroy(g);
    CHECK(hp_geometry_create("hexagon(1)", &g) != HP_OK);
}

TEST_CASE("point estimate") {
    hp_config* cfg = nullptr;
    REQUIRE(hp_config_create(&cfg) == HP_OK);
    hp_config_set(cfg, "samples", "20000");
    const double x = 1.0;
    double re, im, se_re, se_im;
    long rejected = -1;
    REQUIRE(hp_estimate_point(cfg, &x, 2, &re, &im, &se_re, &se_im, &rejected) == HP_OK);
    CHECK(std::abs(re - 0.655338261900256) < 4 * se_re);
    CHECK(im == 0.0);
    CHECK(rejected == 0);
    hp_config_destroy(cfg);
}
