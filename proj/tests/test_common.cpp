#include <doctest.h>

#include <cmath>

#include "common.hpp"

using namespace buildflex;

TEST_CASE("format_double round-trips arbitrary values") {
    Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.below(200)) - 100);
        double back;
        REQUIRE(parse_double(format_double(v), back));
        CHECK(back == v);
    }
    double back;
    CHECK(parse_double("0.1", back));
    CHECK(!parse_double("0.1x", back));
    CHECK(!parse_double("", back));
}

TEST_CASE("rng streams are deterministic per seed") {
    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        double va = a.uniform(), vb = b.uniform(), vc = c.uniform();
        all_equal = all_equal && va == vb;
        any_diff = any_diff || va != vc;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("rng below stays in range and covers values") {
    Rng rng(1);
    std::vector<int> seen(7, 0);
    for (int i = 0; i < 7000; ++i) ++seen[rng.below(7)];
    for (int count : seen) CHECK(count > 0);
}

TEST_CASE("normal draws have sane moments") {
    Rng rng(5);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double v = rng.normal();
        sum += v;
        sq += v * v;
    }
    CHECK(std::abs(sum / n) < 0.02);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}

TEST_CASE("fnv hash is stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
    CHECK(to_hex(0x1234abcdull) == "000000001234abcd");
}
