#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "spectralflow/rng.hpp"

using namespace spectralflow;

// Known-answer vectors from the Random123 reference distribution (kat_vectors,
// philox4x32 rounds=10).
TEST_CASE("philox4x32-10 known-answer vectors") {
    auto out = rng::Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);

    out = rng::Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);

    out = rng::Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
}

TEST_CASE("streams are reproducible and independent of interleaving") {
    rng::GaussianStream a(42, rng::stream_id(rng::StreamKind::fgn, 0, 7));
    std::vector<double> first;
    for (int i = 0; i < 100; ++i) first.push_back(a.next());

    rng::GaussianStream b(42, rng::stream_id(rng::StreamKind::fgn, 0, 7));
    rng::GaussianStream other(42, rng::stream_id(rng::StreamKind::fgn, 0, 8));
    for (int i = 0; i < 100; ++i) {
        other.next();
        CHECK(b.next() == first[static_cast<std::size_t>(i)]);
    }
}

TEST_CASE("stream ids separate kinds, replicas and indices") {
    std::set<std::uint64_t> ids;
    for (auto kind : {rng::StreamKind::fgn, rng::StreamKind::entry, rng::StreamKind::lattice})
        for (std::uint32_t rep : {0u, 1u, 65535u})
            for (std::uint64_t idx : {std::uint64_t{0}, std::uint64_t{1}, (std::uint64_t{1} << 40) - 1})
                ids.insert(rng::stream_id(kind, rep, idx));
    CHECK(ids.size() == 27);
}

TEST_CASE("normal draws have the right first moments") {
    rng::GaussianStream gs(2024, rng::stream_id(rng::StreamKind::fgn, 0, 0));
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = gs.next();
        sum += x;
        sumsq += x * x;
        sum4 += x * x * x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    const double m4 = sum4 / n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("uniform draws stay in (0,1] and look uniform") {
    rng::GaussianStream gs(7, rng::stream_id(rng::StreamKind::law, 0, 3));
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = gs.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 4.0 / std::sqrt(12.0 * n));
}
