#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spectralflow/fractional_noise.hpp"
#include "spectralflow/pathwise_sde.hpp"

namespace spectralflow {

enum class EnsembleVariant {
    wigner_real,
    wigner_complex,
    dependent,
    wishart_real,
    wishart_complex,
};

std::string variant_name(EnsembleVariant v);
EnsembleVariant parse_variant(const std::string& name);

// One lattice shift r with weight a_r (Dependent variant).
struct IndexTerm {
    std::array<int, 2> r{0, 0};
    double a = 1.0;
};

struct EnsembleSpec {
    EnsembleVariant variant = EnsembleVariant::wigner_real;
    int n = 1;                         // matrix dimension N
    int p = 0;                         // Wishart rows (aspect c = p/N)
    std::vector<IndexTerm> index_set;  // Dependent only
    CoefficientSet coeffs;             // scalar entry dynamics
    CoefficientSet2D coeffs2d;         // complex off-diagonal dynamics
    std::string coeffs_name = "fbm";   // preset name ("custom" disables exact m_t)
    PresetParams preset_params;
    X0Sampler x0;
    TimeGrid grid{1.0, 64};
    HurstParameter hurst{0.75};
    std::uint64_t seed = 0;
    std::uint32_t replica = 0;         // stream replica tag
    std::vector<int> snapshot_nodes;   // ascending grid-node indices
    int workers = 0;

    int window_radius() const;  // max |r| component over index_set
};

void validate_spec(const EnsembleSpec& spec);

// Dense frame, exactly symmetric (real) or Hermitian (complex) by
// construction; row-major, dim x dim (dim = p for Wishart variants).
struct MatrixProcessFrame {
    double t = 0.0;
    int dim = 0;
    bool complex_entries = false;
    std::vector<double> re;
    std::vector<double> im;  // empty when the frame is real

    double real_at(int i, int j) const { return re[static_cast<std::size_t>(i) * dim + j]; }
    double imag_at(int i, int j) const {
        return complex_entries ? im[static_cast<std::size_t>(i) * dim + j] : 0.0;
    }
    double frobenius_sq() const;
};

// Upper-triangle linear index maps shared by builders and the path source.
std::int64_t upper_index(int n, int i, int j);         // i <= j
std::int64_t strict_upper_index(int n, int i, int j);  // i < j

// Per-entry path view backed by the same counter-based substreams the
// builders consume; the same index always yields the identical path.
class EntryPathSource {
  public:
    explicit EntryPathSource(const EnsembleSpec& spec);

    SamplePath wigner_entry(int i, int j) const;          // real variant, i <= j
    SamplePath wigner_diagonal(int k) const;              // complex variant diagonal
    SamplePath2D wigner_offdiagonal(int i, int j) const;  // complex variant, i < j
    SamplePath lattice_site(int u, int v) const;          // dependent, coords in [-w, n-1+w]
    SamplePath wishart_factor(int i, int k) const;        // real factors, i < p, k < n
    SamplePath2D wishart_factor_2d(int i, int k) const;

  private:
    SamplePath scalar_path(rng::StreamKind kind, std::uint64_t driver_index,
                           std::uint64_t initial_index) const;
    SamplePath2D complex_path(rng::StreamKind kind, std::uint64_t pair_index,
                              std::uint64_t initial_index) const;
    EnsembleSpec spec_;
};

// Wishart centering table: m_t per snapshot (m2 for the complex component),
// exact when the preset declares a closed-form mean, Monte Carlo otherwise.
struct CenteringTable {
    std::vector<double> t;
    std::vector<double> m1;
    std::vector<double> m2;
    std::string method;  // "exact" or "mc"
    std::int64_t n_mc = 0;
};

CenteringTable resolve_wishart_centering(const EnsembleSpec& spec, std::int64_t n_mc = 10000);

std::vector<MatrixProcessFrame> build_wigner_frames(const EnsembleSpec& spec);
std::vector<MatrixProcessFrame> build_wigner_complex_frames(const EnsembleSpec& spec);
std::vector<MatrixProcessFrame> build_dependent_frames(const EnsembleSpec& spec);
std::vector<MatrixProcessFrame> build_wishart_frames(const EnsembleSpec& spec,
                                                     CenteringTable* centering = nullptr);
std::vector<MatrixProcessFrame> build_wishart_complex_frames(const EnsembleSpec& spec,
                                                             CenteringTable* centering = nullptr);
std::vector<MatrixProcessFrame> uncentered_wishart_frames(const EnsembleSpec& spec);

// Dispatch on spec.variant.
std::vector<MatrixProcessFrame> build_frames(const EnsembleSpec& spec,
                                             CenteringTable* centering = nullptr);

// CSV schema t,i,j,re,im. Binary: 32-byte header (magic "MATF", version u32,
// frames u64, dim u64, complex flag byte, 7 zero bytes) then per frame t
// followed by dim*dim re values (and dim*dim im values when complex),
// row-major little-endian f64.
void write_frames_csv(const std::vector<MatrixProcessFrame>& frames, const std::string& file);
void write_frames_binary(const std::vector<MatrixProcessFrame>& frames, const std::string& file);
std::vector<MatrixProcessFrame> read_frames_binary(const std::string& file);

}  // namespace spectralflow
