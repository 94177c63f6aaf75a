#pragma once

#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectralflow/ensembles.hpp"
#include "spectralflow/spectra.hpp"

namespace spectralflow {

using cplx = std::complex<double>;

// Below this height empirical transforms at moderate N are fluctuation-dominated.
inline constexpr double kEtaMin = 0.05;

// Uniform E-grid at a single height eta, evaluated on a set of times.
struct ComplexGrid {
    double e_min = -3.0;
    double e_max = 3.0;
    int n_e = 65;
    double eta = 0.5;
    std::vector<double> times;

    double energy(int j) const { return e_min + (e_max - e_min) * j / (n_e - 1); }
    cplx z(int j) const { return {energy(j), eta}; }
};

void validate_grid(const ComplexGrid& grid);

// G(t,z) sampled over times x energies. `upper` convention:
// G(z) = int dmu/(z - x), so Im z > 0 forces Im G < 0.
struct StieltjesField {
    ComplexGrid grid;
    std::vector<cplx> values;  // row-major, times x n_e
    std::string convention = "upper";

    cplx at(std::size_t ti, int j) const { return values[ti * grid.n_e + j]; }
};

StieltjesField make_field(const ComplexGrid& grid,
                          const std::function<cplx(double, cplx)>& g);
StieltjesField empirical_field(const ESDSeries& series, const ComplexGrid& grid);
StieltjesField closed_sc_field(const ComplexGrid& grid, const std::vector<double>& d_series);
StieltjesField closed_mp_field(const ComplexGrid& grid, double c,
                               const std::vector<double>& d_series);

// |G| <= 1/eta and the Herglotz sign, everywhere on the grid.
void validate_field(const StieltjesField& field);

cplx empirical_stieltjes(const SpectrumFrame& frame, cplx z);

// Root of d^2 G^2 - z G + 1 = 0 with G ~ 1/z at infinity.
cplx gsc_closed(cplx z, double d);
// Root of c z d^2 G^2 - G (z - d^2 (1 - c)) + 1 = 0 with G ~ 1/z at infinity.
cplx gmp_closed(cplx z, double c, double sigma);

// |LHS - RHS| of one transport equation on the interior of a field's grid.
struct ResidualField {
    std::vector<double> times;     // interior time nodes
    std::vector<double> energies;  // interior energies
    double eta = 0.0;
    std::vector<double> values;  // row-major, times x energies
    std::string equation_id;

    double at(std::size_t ti, std::size_t j) const { return values[ti * energies.size() + j]; }
    double max_abs() const;
};

// dG/dt = -(d_t^2)' G dG/dz; (d_t^2)' by central differences of d_series.
ResidualField pde_residual_sc(const StieltjesField& field, const std::vector<double>& d_series);
// fbm special case with the analytic coefficient 2H t^(2H-1).
ResidualField pde_residual_sc_fbm(const StieltjesField& field, double hurst);
// dF/du = -F dF/dz after the monotone reindexing u = t^(2H); the field must
// have been evaluated at times t_i = u_i^(1/2H).
ResidualField burgers_check(const StieltjesField& field, double hurst);
// dG/dt = -(d_t^2)' (c G^2 + 2 c z G dG/dz + (1-c) dG/dz).
ResidualField pde_residual_mp(const StieltjesField& field, const std::vector<double>& d_series,
                              double c);

// gamma_t(k,l) = d_t^2 sum_{r in I, r-(k,l) in I} a_r a_{r-(k,l)}, then
// symmetrized across transposed lags (value taken from whichever lag the raw
// enumeration populates; a genuine mismatch only sets the flag, never throws).
struct DependentKernel {
    std::vector<IndexTerm> index_set;
    double d_t = 1.0;
    std::map<std::pair<int, int>, double> gamma;
    bool raw_transpose_symmetric = true;
    double max_raw_asymmetry = 0.0;
    int window_radius = 0;

    // f(x,y) = sum gamma_{k,l} e^{-2 pi i (kx + ly)}; real because gamma is
    // centrally symmetric.
    double f(double x, double y) const;
    // d_t^2 |sum a_r e^{i(r1 theta + r2 psi)}|^2, the symbol of the raw lags.
    double symbol(double theta, double psi) const;
    double gamma_abs_sum() const;
};

DependentKernel enumerate_gamma(const std::vector<IndexTerm>& index_set, double d_t);

enum class SignConvention { plus, selfconsistent_minus };

std::string sign_name(SignConvention sign);

struct FixedPointConfig {
    int n_q = 256;        // quadrature points on [0,1]
    double damping = 0.5;  // theta in (0,1]
    double tol = 1e-10;
    int max_iter = 10000;
    SignConvention sign = SignConvention::selfconsistent_minus;
};

struct FixedPointResult {
    std::vector<cplx> h;  // scalar solver: h(x_j); mirror: theta-marginal of g
    cplx s{0.0, 0.0};
    int iterations = 0;
    bool converged = false;
};

struct FixedPointError : std::runtime_error {
    FixedPointError(const std::string& what, double residual, int iters)
        : std::runtime_error(what), last_residual(residual), iterations(iters) {}
    double last_residual;
    int iterations;
};

// Damped iteration of h = (-z +/- int_0^1 f(x,y) h(y) dy)^{-1} on n_q
// quadrature points; S = int_0^1 h dx. Throws FixedPointError past max_iter.
FixedPointResult dependent_fixed_point(const DependentKernel& kernel, cplx z,
                                       const FixedPointConfig& cfg = {});

// Self-consistent equation on [0,1] x S^1 that keeps track of which side of
// the diagonal a neighbouring entry sits on:
//   g(x,th) = (-z - sig(x,th))^{-1},
//   sig(x,th) = (1/2pi) int int [b(th,ps) 1_{y>x} + b(ps,th) 1_{y<x}] g(y,ps),
// with b the kernel symbol. Reduces to dependent_fixed_point (minus sign)
// whenever the raw lags are transpose-symmetric.
FixedPointResult dependent_fixed_point_mirror(const DependentKernel& kernel, cplx z,
                                              const FixedPointConfig& cfg = {});

std::vector<FixedPointResult> fixed_point_grid(const DependentKernel& kernel,
                                               const std::vector<cplx>& zs,
                                               const FixedPointConfig& cfg, bool mirror,
                                               unsigned workers = 0);

// CSV schemas: t,re_z,im_z,re_G,im_G,convention and t,re_z,residual,equation_id.
void write_field_csv(const StieltjesField& field, const std::string& path);
void write_residual_csv(const ResidualField& residual, const std::string& path);

}  // namespace spectralflow
