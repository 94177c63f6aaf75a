#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spectralflow/fractional_noise.hpp"
#include "spectralflow/rng.hpp"

namespace spectralflow {

// Coefficients of dX = sigma(X) dB^H + b(X) dt (Young/Stratonovich, H > 1/2).
// Admissibility (boundedness, Hoelder derivatives) is declared by the caller;
// the solver only spot-checks finiteness of sigma'/b' at visited states.
struct CoefficientSet {
    std::function<double(double)> sigma;
    std::function<double(double)> b;
    std::function<double(double)> sigma_prime;
    std::function<double(double)> b_prime;
    bool sigma_bounded = false;
    bool b_bounded = false;
    std::string name = "custom";
};

// 2-D analogue: 2x2 sigma (row-major) acting on the 2-D driver increment.
// Jacobians are optional oracles (8 resp. 4 partials, row-major), same
// finiteness spot-check when present.
struct CoefficientSet2D {
    std::function<std::array<double, 4>(double, double)> sigma;
    std::function<std::array<double, 2>(double, double)> b;
    std::function<std::array<double, 8>(double, double)> sigma_jacobian;
    std::function<std::array<double, 4>(double, double)> b_jacobian;
    bool sigma_bounded = false;
    bool b_bounded = false;
    std::string name = "custom";
};

struct SamplePath {
    TimeGrid grid;
    double x0 = 0.0;
    std::vector<double> values;  // grid.nodes() entries, values[0] == x0
};

struct SamplePath2D {
    TimeGrid grid;
    std::array<double, 2> z0{0.0, 0.0};
    std::vector<double> v1, v2;  // components, grid.nodes() each
};

struct HolderEstimate {
    double beta = 0.0;
    double quotient = 0.0;  // empirical sup |X_t - X_s| / |t-s|^beta
    std::array<double, 2> argmax_pair{0.0, 0.0};
};

struct MomentEstimate {
    double t = 0.0;
    double m_t = 0.0;       // mean estimate
    double d_t = 0.0;       // stddev estimate, >= 0
    double mc_stderr = 0.0; // standard error of m_t
    std::int64_t n_mc = 0;
};

struct MomentEstimate2D {
    double t = 0.0;
    std::array<double, 2> m_t{0.0, 0.0};
    double d_t = 0.0;  // (E || Z_t - m_Z(t) ||^2)^{1/2}
    double mc_stderr = 0.0;
    std::int64_t n_mc = 0;
};

// Initial-condition sampler; a small closed family so runs can record it.
struct X0Sampler {
    enum class Kind { point, normal } kind = Kind::point;
    double a = 0.0;   // point value / normal mean
    double sd = 1.0;  // normal stddev

    double draw(rng::GaussianStream& gs) const;
    std::string describe() const;

    static X0Sampler point(double v) { return {Kind::point, v, 0.0}; }
    static X0Sampler normal(double mean, double sd) { return {Kind::normal, mean, sd}; }
};

// Heun (explicit trapezoidal predictor-corrector) over one driver path with
// grid.nodes() values. Throws on the first non-finite state.
SamplePath integrate(const CoefficientSet& coeffs, const TimeGrid& grid, const double* driver,
                     double x0);
SamplePath integrate(const CoefficientSet& coeffs, const GaussianPathBatch& drivers,
                     std::int64_t path_index, double x0);

SamplePath2D integrate_2d(const CoefficientSet2D& coeffs, const TimeGrid& grid,
                          const double* driver1, const double* driver2,
                          std::array<double, 2> z0);

// Sup of |X_t - X_s| / |t-s|^beta: exact over all pairs for steps <= 2048,
// dyadic separations beyond.
HolderEstimate holder_norm_estimate(const SamplePath& path, double beta);

// Monte Carlo m_t, d_t over n_mc independent drivers + initial draws. t must
// lie on the grid (snapped within 1e-9 * t_end). Deterministic in
// (coeffs, grid, h, t, n_mc, seed); independent of workers.
MomentEstimate moment_estimator(const CoefficientSet& coeffs, const X0Sampler& x0,
                                const HurstParameter& h, const TimeGrid& grid, double t,
                                std::int64_t n_mc, std::uint64_t seed, int workers = 0);

MomentEstimate2D moment_estimator_2d(const CoefficientSet2D& coeffs, const X0Sampler& x0,
                                     const HurstParameter& h, const TimeGrid& grid, double t,
                                     std::int64_t n_mc, std::uint64_t seed, int workers = 0);

// Named presets reachable from config: fbm, ou, sin_drift, bounded_smooth.
struct PresetParams {
    double theta = 1.0;   // ou drift rate
    double sigma0 = 1.0;  // ou diffusion constant
};
CoefficientSet coefficient_preset(const std::string& name, const PresetParams& params = {});

// Diagonal lift of a scalar preset: sigma~ = sigma * I, b~ = (b, b) applied
// componentwise. Used by the complex Hermitian ensemble.
CoefficientSet2D diagonal_coefficients_2d(const CoefficientSet& scalar);

// Exact m_t for presets that admit one (fbm: x0; ou: x0 * exp(-theta t) for a
// point initial law). Returns false when no closed form is declared.
bool preset_exact_mean(const std::string& name, const PresetParams& params, const X0Sampler& x0,
                       double t, double* out);

}  // namespace spectralflow
