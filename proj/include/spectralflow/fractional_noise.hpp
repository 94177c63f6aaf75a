#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectralflow/rng.hpp"

namespace spectralflow {

// Hurst parameter, restricted to the long-memory regime H in (1/2, 1).
// H = 1/2 is admitted only when explicitly requested (Brownian sanity checks).
class HurstParameter {
  public:
    explicit HurstParameter(double h, bool allow_brownian = false);
    double value() const { return h_; }

  private:
    double h_;
};

// Uniform grid t_k = k * t_end / steps, k = 0..steps.
struct TimeGrid {
    double t_end = 1.0;
    int steps = 1;

    TimeGrid() = default;
    TimeGrid(double t_end_, int steps_);
    double dt() const { return t_end / steps; }
    double node(int k) const { return t_end * k / steps; }
    int nodes() const { return steps + 1; }
};

// Batch of paths on a shared grid, row-major (path-major), steps+1 values per
// path, value 0 at node 0. For increment batches the entries 1..M hold the M
// stationary fGN increments (slot 0 stays 0 so both views share one layout).
struct GaussianPathBatch {
    TimeGrid grid;
    double hurst = 0.75;
    std::int64_t count = 0;
    std::vector<double> values;

    const double* path(std::int64_t i) const { return values.data() + i * grid.nodes(); }
    double* path(std::int64_t i) { return values.data() + i * grid.nodes(); }
};

// Exact fBm covariance  (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double s, double t, const HurstParameter& h);

struct FgnOptions {
    bool allow_hosking_fallback = true;
    bool force_hosking = false;   // test hook: exercise the O(M^2) path
    double tol_spec = 1e-10;      // relative clamp threshold for the embedded spectrum
    // Stream addressing: path i draws from (kind, replica, offset + i), so a
    // batch can be produced in slices without changing any path's bits.
    rng::StreamKind stream_kind = rng::StreamKind::fgn;
    std::uint32_t stream_replica = 0;
    std::uint64_t stream_offset = 0;
};

// Stationary fGN increments via circulant embedding (Davies-Harte), falling
// back to the sequential conditional (Hosking) recursion if the embedded
// spectrum dips below -tol_spec * max. Output depends only on
// (grid, h, count, seed) — never on worker count.
GaussianPathBatch generate_fgn(const TimeGrid& grid, const HurstParameter& h,
                               std::int64_t count, std::uint64_t seed,
                               const FgnOptions& opts = {}, int workers = 0);

// Prefix sums of generate_fgn: B^H paths started at 0.
GaussianPathBatch generate_fbm(const TimeGrid& grid, const HurstParameter& h,
                               std::int64_t count, std::uint64_t seed,
                               const FgnOptions& opts = {}, int workers = 0);

// Dense-Cholesky sampler from the covariance directly; test oracle, n <= 64.
GaussianPathBatch generate_fgn_cholesky(const TimeGrid& grid, const HurstParameter& h,
                                        std::int64_t count, std::uint64_t seed);

// Analytic covariance of increments k and l (0-based), from fbm_covariance.
double fgn_increment_covariance(const TimeGrid& grid, const HurstParameter& h, int k, int l);

// Embedded circulant spectrum for (grid, h); exposed for the fallback tests.
std::vector<double> circulant_spectrum(const TimeGrid& grid, const HurstParameter& h);

// CSV dump: header path_id,t,value. Binary dump: 32-byte header
// (magic "FBMP", version u32, count u64, nodes u64, 8 zero bytes) then
// row-major little-endian f64.
void write_paths_csv(const GaussianPathBatch& batch, const std::string& file);
void write_paths_binary(const GaussianPathBatch& batch, const std::string& file);

}  // namespace spectralflow
