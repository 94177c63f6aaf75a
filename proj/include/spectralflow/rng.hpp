#pragma once

#include <array>
#include <cstdint>

namespace spectralflow::rng {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// A block is a pure function of (counter, key); streams never share state,
// so parallel draws are reproducible regardless of worker scheduling.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key);
};

// Domain tags keep independent consumers of the same seed on disjoint streams.
enum class StreamKind : std::uint8_t {
    fgn = 1,        // fractional Gaussian noise paths
    initial = 2,    // x0 draws
    entry = 3,      // ensemble entry paths
    lattice = 4,    // dependent-ensemble lattice sites
    wishart = 5,    // Wishart factor entries
    law = 6,            // law_sampler
    moment = 7,         // moment_estimator replicas
    probe = 8,          // modulus / diagnostic replicas
    moment_initial = 9, // x0 draws inside moment_estimator (disjoint from `initial`)
};

// 64-bit stream id: [kind:8 | replica:16 | index:40].
std::uint64_t stream_id(StreamKind kind, std::uint32_t replica, std::uint64_t index);

// Deterministic stream of i.i.d. draws addressed by (seed, stream).
// The k-th draw depends only on (seed, stream, k): blocks are consumed in
// increasing counter order, two normals (Box-Muller) or two uniforms per block.
class GaussianStream {
  public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream);

    double next();          // N(0,1)
    double next_uniform();  // uniform on (0,1]

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t block_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
    double cached_uniform_ = 0.0;
    bool have_cached_uniform_ = false;

    std::array<std::uint32_t, 4> next_block();
};

}  // namespace spectralflow::rng
