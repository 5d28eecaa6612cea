#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/rng.hpp"
#include "heatpath/semigroup.hpp"

#include <cmath>

using namespace heatpath;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST_CASE("philox block matches reference vectors") {
    using Block = std::array<std::uint32_t, 4>;
    CHECK(PhiloxStream::block({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(PhiloxStream::block({~0u, ~0u, ~0u, ~0u}, {~0u, ~0u}) ==
          Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(PhiloxStream::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
    PhiloxStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differ_stream = false, differ_seed = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a.next_u32();
        CHECK(x == b.next_u32());
        differ_stream |= x != c.next_u32();
        differ_seed |= x != d.next_u32();
    }
    CHECK(differ_stream);
    CHECK(differ_seed);
}

TEST_CASE("uniform and normal moments") {
    PhiloxStream rng(5, 0);
    const int n = 200000;
    double su = 0, smin = 1, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        smin = std::min(smin, u);
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
    }
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("segment velocity variance is 2/dtau per component") {
    PhiloxStream rng(9, 3);
    const int n = 100000;
    double s[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
        const Vec v = sample_segment_velocity(2, 0.5, rng);
        s[0] += v[0] * v[0];
        s[1] += v[1] * v[1];
        CHECK(v[2] == 0.0);
    }
    // variance 4 with relative sampling error sqrt(2/n) ~ 0.0045
    CHECK(s[0] / n == doctest::Approx(4.0).epsilon(0.025));
    CHECK(s[1] / n == doctest::Approx(4.0).epsilon(0.025));
}
