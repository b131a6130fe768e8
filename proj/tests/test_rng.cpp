#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "spp/rng.hpp"

using namespace spp;

TEST_CASE("identically seeded streams are bit-identical", "[rng]") {
    RngStream a(42), b(42);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("keyed derivation is order-free and label-sensitive", "[rng]") {
    RngStream a = RngStream::keyed(7, "costs", 1, 2, 3);
    RngStream b = RngStream::keyed(7, "costs", 1, 2, 3);
    RngStream c = RngStream::keyed(7, "signals", 1, 2, 3);
    RngStream d = RngStream::keyed(7, "costs", 1, 2, 4);
    REQUIRE(a.next_u64() == b.next_u64());
    REQUIRE(a.next_u64() == b.next_u64());
    RngStream a2 = RngStream::keyed(7, "costs", 1, 2, 3);
    REQUIRE(a2.next_u64() != c.next_u64());
    REQUIRE(RngStream::keyed(7, "costs", 1, 2, 3).next_u64() != d.next_u64());
}

TEST_CASE("uniform01 lies in [0,1) and has the right mean", "[rng]") {
    RngStream rng(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    REQUIRE(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("below is near-uniform over small ranges", "[rng]") {
    RngStream rng(9);
    std::vector<int> counts(5, 0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(rng.below(5))]++;
    for (int c : counts) REQUIRE(std::abs(c - n / 5) < 500);
}

TEST_CASE("shuffle produces a permutation", "[rng]") {
    RngStream rng(5);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<int> orig = v;
    rng.shuffle(v);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(sorted == orig);
}
