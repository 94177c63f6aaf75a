#include "spectralflow/rng.hpp"

#include <cmath>

namespace spectralflow::rng {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// (0,1]: offset by one ulp so log() is always finite.
inline double u64_to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 1.0) * (1.0 / 9007199254740992.0);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32::block(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kM0, ctr[0], hi0, lo0);
        mulhilo(kM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

std::uint64_t stream_id(StreamKind kind, std::uint32_t replica, std::uint64_t index) {
    return (static_cast<std::uint64_t>(kind) << 56) |
           (static_cast<std::uint64_t>(replica & 0xFFFFu) << 40) |
           (index & 0xFFFFFFFFFFull);
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

std::array<std::uint32_t, 4> GaussianStream::next_block() {
    const std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_),
                                              static_cast<std::uint32_t>(block_ >> 32),
                                              stream_[0], stream_[1]};
    ++block_;
    return Philox4x32::block(ctr, key_);
}

double GaussianStream::next() {
    if (have_cached_) {
        have_cached_ = false;
        return cached_;
    }
    const auto b = next_block();
    const std::uint64_t a = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    const std::uint64_t c = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
    const double u = u64_to_unit(a);
    const double v = u64_to_unit(c);
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = 2.0 * M_PI * v;
    cached_ = r * std::sin(phi);
    have_cached_ = true;
    return r * std::cos(phi);
}

double GaussianStream::next_uniform() {
    // One block yields two uniforms; cadence mirrors next().
    if (have_cached_uniform_) {
        have_cached_uniform_ = false;
        return cached_uniform_;
    }
    const auto b = next_block();
    const std::uint64_t a = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
    const std::uint64_t c = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
    cached_uniform_ = u64_to_unit(c);
    have_cached_uniform_ = true;
    return u64_to_unit(a);
}

}  // namespace spectralflow::rng
