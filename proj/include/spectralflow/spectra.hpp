#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spectralflow/ensembles.hpp"
#include "spectralflow/laws.hpp"

namespace spectralflow {

struct SpectrumFrame {
    double t = 0.0;
    std::vector<double> eigenvalues;  // ascending
};

struct ESDSeries {
    std::vector<SpectrumFrame> frames;  // strictly increasing times
    std::uint64_t ensemble_hash = 0;
};

struct MetricRow {
    double t = 0.0;
    double ks = 0.0;
    double w1 = 0.0;
    std::string law;  // reference law id
};

struct MetricReport {
    std::vector<MetricRow> rows;
    std::uint64_t ensemble_hash = 0;
};

struct EigOptions {
    bool verify = true;      // residual check (off in timed sweeps)
    double tol_eig = 1e-9;   // relative residual bound
    double tol_sym = 1e-9;   // relative symmetry validation bound
};

// Ascending spectrum of a symmetric/Hermitian frame. With verify on, asserts
// max_i ||A v_i - lambda_i v_i|| <= tol_eig ||A||_F. Non-symmetric input
// beyond tol_sym -> invalid_argument.
SpectrumFrame eigenvalues_sym(const MatrixProcessFrame& frame, const EigOptions& opts = {});

ESDSeries esd_series(const std::vector<MatrixProcessFrame>& frames, const EigOptions& opts = {},
                     std::uint64_t ensemble_hash = 0);

// sup_x |F_emp - F_law| over all jump points (both sides) and the law's atom.
double ks_distance(const SpectrumFrame& frame, const SpectralLaw& law);
double ks_distance_two_sample(const SpectrumFrame& a, const SpectrumFrame& b);

// Quantile-coupling W1 on a 10^4-point quantile grid of the law.
double wasserstein1(const SpectrumFrame& frame, const SpectralLaw& law);

MetricRow metric_row(const SpectrumFrame& frame, const SpectralLaw& law);

// C^1 test functions with known ||f'||_inf for the modulus probes.
struct TestFunction {
    std::string name;
    std::function<double(double)> f;
    double fprime_sup = 1.0;
};

// library ids: arctan, ratio (x/sqrt(1+x^2)), phi (sqrt(1+x^2)), sin
TestFunction test_function(const std::string& id);

// <f, L(t)> = mean of f over the eigenvalues.
double esd_mean(const SpectrumFrame& frame, const TestFunction& f);

// max over grid pairs |t - s| <= delta of |<f, L(t)> - <f, L(s)>|.
double measure_flow_modulus(const ESDSeries& series, const TestFunction& f, double delta);

// Monte Carlo E|<f, L_N(t)> - <f, L_N(s)>|^2 across n_mc ensemble replicas
// (replica tags spec.replica + 0 .. n_mc-1).
double modulus_moment_probe(const EnsembleSpec& spec, const TestFunction& f, double s, double t,
                            int n_mc);

struct HoffmanWielandt {
    double lhs = 0.0;  // sum (lambda_i^A - lambda_i^B)^2, spectra ascending
    double rhs = 0.0;  // ||A - B||_F^2
    bool ok = false;   // lhs <= rhs + tol
};

HoffmanWielandt hoffman_wielandt_check(const MatrixProcessFrame& a, const MatrixProcessFrame& b,
                                       double tol = 1e-9);

// CSV schemas: spectra `t,rank,eigenvalue` (rank 1-based ascending);
// metrics `t,metric,value,law,ensemble_hash` (hash as 16 hex digits).
void write_spectrum_csv(const ESDSeries& series, const std::string& file);
void write_metrics_csv(const MetricReport& report, const std::string& file);

}  // namespace spectralflow
