#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "spde/parallel.hpp"
#include "spde/rng.hpp"

using namespace spde;

TEST_CASE("philox known answers") {
    const auto a = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(a == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const auto b = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
    CHECK(b == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const auto c = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
    CHECK(c == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("draws are addressable by index") {
    RngStream s(42, 7);
    std::vector<double> bulk(101);
    s.fill_normal(bulk, 3);
    for (std::size_t i = 0; i < bulk.size(); ++i) CHECK(bulk[i] == s.normal_at(3 + i));
    RngStream seq(42, 7);
    for (int i = 0; i < 10; ++i) CHECK(seq.normal() == s.normal_at(i));
    CHECK(seq.position() == 10);
}

TEST_CASE("streams differ by seed, id and lane") {
    const RngStream a(1, 0), b(2, 0), c(1, 1);
    CHECK(a.normal_at(0) != b.normal_at(0));
    CHECK(a.normal_at(0) != c.normal_at(0));
    CHECK(a.child(0).normal_at(0) != a.child(1).normal_at(0));
    CHECK(a.child(5).normal_at(9) == RngStream(1, 0).child(5).normal_at(9));
}

TEST_CASE("normal and uniform moments") {
    const RngStream s(2024, 0);
    const std::size_t n = 400000;
    std::vector<double> z(n);
    s.fill_normal(z, 0);
    double m = 0, v = 0, k = 0, u = 0;
    for (double x : z) {
        m += x;
        v += x * x;
        k += x * x * x * x;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = s.uniform_at(i);
        CHECK((x > 0.0 && x < 1.0));
        u += x;
    }
    const double nn = static_cast<double>(n);
    CHECK(std::abs(m / nn) < 4.0 / std::sqrt(nn));
    CHECK(std::abs(v / nn - 1.0) < 4.0 * std::sqrt(2.0 / nn));
    CHECK(std::abs(k / nn - 3.0) < 4.0 * std::sqrt(96.0 / nn));
    CHECK(std::abs(u / nn - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / nn));
}

TEST_CASE("replica map is independent of the worker count") {
    const RngStream root(99, 0);
    const auto body = [&](std::size_t r) {
        std::vector<double> z(257);
        root.child(r).fill_normal(z, 0);
        double s = 0.0;
        for (double x : z) s += std::exp(0.1 * x);
        return s;
    };
    parallel::set_threads(1);
    const auto one = parallel::map_replicas<double>(1000, body);
    parallel::set_threads(4);
    const auto four = parallel::map_replicas<double>(1000, body);
    parallel::set_threads(0);
    const auto ref = serial::map_replicas<double>(1000, body);
    CHECK(one == four);
    CHECK(one == ref);
    CHECK(parallel::ordered_sum(one) == parallel::ordered_sum(four));
}

TEST_CASE("replica map propagates exceptions") {
    CHECK_THROWS_AS(parallel::map_replicas<int>(50,
                                                [](std::size_t r) -> int {
                                                    if (r == 17) throw std::runtime_error("boom");
                                                    return 1;
                                                }),
                    std::runtime_error);
}
