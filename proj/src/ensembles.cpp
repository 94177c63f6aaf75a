#include "spectralflow/ensembles.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "spectralflow/parallel.hpp"

namespace spectralflow {

namespace {

constexpr std::int64_t kBlock = 8192;  // entry paths generated per slice

// Snapshot values X_index(t_s) for scalar entry paths [0, count); row-major
// count x nodes.size(). Slicing never changes a path's bits (stream_offset).
std::vector<double> scalar_snapshots(const EnsembleSpec& spec, rng::StreamKind kind,
                                     std::int64_t count, std::uint64_t initial_base,
                                     const std::vector<int>& nodes) {
    const std::size_t ns = nodes.size();
    std::vector<double> out(static_cast<std::size_t>(count) * ns);
    for (std::int64_t base = 0; base < count; base += kBlock) {
        const std::int64_t bcount = std::min(kBlock, count - base);
        FgnOptions o;
        o.stream_kind = kind;
        o.stream_replica = spec.replica;
        o.stream_offset = static_cast<std::uint64_t>(base);
        GaussianPathBatch drivers =
            generate_fbm(spec.grid, spec.hurst, bcount, spec.seed, o, spec.workers);
        parallel_for(static_cast<std::size_t>(bcount), resolve_workers(spec.workers),
                     [&](std::size_t i) {
                         rng::GaussianStream gs(
                             spec.seed, rng::stream_id(rng::StreamKind::initial, spec.replica,
                                                       initial_base + base + i));
                         const SamplePath p = integrate(spec.coeffs, drivers,
                                                        static_cast<std::int64_t>(i),
                                                        spec.x0.draw(gs));
                         for (std::size_t s = 0; s < ns; ++s)
                             out[(base + i) * ns + s] = p.values[nodes[s]];
                     });
    }
    return out;
}

// 2-D analogue: entry e consumes driver paths 2e, 2e+1 and two x0 draws from
// one initial stream; output row-major count x nodes.size() x 2.
std::vector<double> complex_snapshots(const EnsembleSpec& spec, rng::StreamKind kind,
                                      std::int64_t count, std::uint64_t initial_base,
                                      const std::vector<int>& nodes) {
    const std::size_t ns = nodes.size();
    std::vector<double> out(static_cast<std::size_t>(count) * ns * 2);
    for (std::int64_t base = 0; base < count; base += kBlock) {
        const std::int64_t bcount = std::min(kBlock, count - base);
        FgnOptions o;
        o.stream_kind = kind;
        o.stream_replica = spec.replica;
        o.stream_offset = static_cast<std::uint64_t>(2 * base);
        GaussianPathBatch drivers =
            generate_fbm(spec.grid, spec.hurst, 2 * bcount, spec.seed, o, spec.workers);
        parallel_for(static_cast<std::size_t>(bcount), resolve_workers(spec.workers),
                     [&](std::size_t i) {
                         rng::GaussianStream gs(
                             spec.seed, rng::stream_id(rng::StreamKind::initial, spec.replica,
                                                       initial_base + base + i));
                         const double a = spec.x0.draw(gs);
                         const double b = spec.x0.draw(gs);
                         const SamplePath2D p = integrate_2d(spec.coeffs2d, spec.grid,
                                                             drivers.path(2 * i),
                                                             drivers.path(2 * i + 1), {a, b});
                         for (std::size_t s = 0; s < ns; ++s) {
                             out[((base + i) * ns + s) * 2] = p.v1[nodes[s]];
                             out[((base + i) * ns + s) * 2 + 1] = p.v2[nodes[s]];
                         }
                     });
    }
    return out;
}

MatrixProcessFrame empty_frame(double t, int dim, bool complex_entries) {
    MatrixProcessFrame f;
    f.t = t;
    f.dim = dim;
    f.complex_entries = complex_entries;
    f.re.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    if (complex_entries) f.im.assign(static_cast<std::size_t>(dim) * dim, 0.0);
    return f;
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

std::string variant_name(EnsembleVariant v) {
    switch (v) {
        case EnsembleVariant::wigner_real: return "wigner_real";
        case EnsembleVariant::wigner_complex: return "wigner_complex";
        case EnsembleVariant::dependent: return "dependent";
        case EnsembleVariant::wishart_real: return "wishart_real";
        case EnsembleVariant::wishart_complex: return "wishart_complex";
    }
    return "?";
}

EnsembleVariant parse_variant(const std::string& name) {
    if (name == "wigner_real") return EnsembleVariant::wigner_real;
    if (name == "wigner_complex") return EnsembleVariant::wigner_complex;
    if (name == "dependent") return EnsembleVariant::dependent;
    if (name == "wishart_real") return EnsembleVariant::wishart_real;
    if (name == "wishart_complex") return EnsembleVariant::wishart_complex;
    throw std::invalid_argument("unknown ensemble variant: " + name);
}

int EnsembleSpec::window_radius() const {
    int w = 0;
    for (const auto& term : index_set)
        w = std::max({w, std::abs(term.r[0]), std::abs(term.r[1])});
    return w;
}

void validate_spec(const EnsembleSpec& spec) {
    require(spec.n >= 1, "ensemble dimension n must be >= 1");
    const bool wishart = spec.variant == EnsembleVariant::wishart_real ||
                         spec.variant == EnsembleVariant::wishart_complex;
    if (wishart) require(spec.p >= 1, "wishart needs p >= 1");
    if (spec.variant == EnsembleVariant::dependent)
        require(!spec.index_set.empty(), "dependent ensemble needs a nonempty index set");
    require(!spec.snapshot_nodes.empty(), "at least one snapshot node required");
    int prev = -1;
    for (int node : spec.snapshot_nodes) {
        require(node > prev, "snapshot nodes must be strictly increasing");
        require(node >= 0 && node <= spec.grid.steps, "snapshot node outside the grid");
        prev = node;
    }
    require(static_cast<bool>(spec.coeffs.sigma) ||
                spec.variant == EnsembleVariant::wishart_complex,
            "scalar coefficients required");
}

double MatrixProcessFrame::frobenius_sq() const {
    double acc = 0.0;
    for (double v : re) acc += v * v;
    for (double v : im) acc += v * v;
    return acc;
}

std::int64_t upper_index(int n, int i, int j) {
    // row-major over {(i,j): 0 <= i <= j < n}
    return static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i + 1) / 2 + j;
}

std::int64_t strict_upper_index(int n, int i, int j) {
    // row-major over {(i,j): 0 <= i < j < n}
    return static_cast<std::int64_t>(i) * n - static_cast<std::int64_t>(i) * (i + 3) / 2 + j - 1;
}

EntryPathSource::EntryPathSource(const EnsembleSpec& spec) : spec_(spec) {}

SamplePath EntryPathSource::scalar_path(rng::StreamKind kind, std::uint64_t driver_index,
                                        std::uint64_t initial_index) const {
    FgnOptions o;
    o.stream_kind = kind;
    o.stream_replica = spec_.replica;
    o.stream_offset = driver_index;
    GaussianPathBatch driver = generate_fbm(spec_.grid, spec_.hurst, 1, spec_.seed, o, 1);
    rng::GaussianStream gs(spec_.seed,
                           rng::stream_id(rng::StreamKind::initial, spec_.replica, initial_index));
    return integrate(spec_.coeffs, driver, 0, spec_.x0.draw(gs));
}

SamplePath2D EntryPathSource::complex_path(rng::StreamKind kind, std::uint64_t pair_index,
                                           std::uint64_t initial_index) const {
    FgnOptions o;
    o.stream_kind = kind;
    o.stream_replica = spec_.replica;
    o.stream_offset = 2 * pair_index;
    GaussianPathBatch drivers = generate_fbm(spec_.grid, spec_.hurst, 2, spec_.seed, o, 1);
    rng::GaussianStream gs(spec_.seed,
                           rng::stream_id(rng::StreamKind::initial, spec_.replica, initial_index));
    const double a = spec_.x0.draw(gs);
    const double b = spec_.x0.draw(gs);
    return integrate_2d(spec_.coeffs2d, spec_.grid, drivers.path(0), drivers.path(1), {a, b});
}

SamplePath EntryPathSource::wigner_entry(int i, int j) const {
    const auto idx = static_cast<std::uint64_t>(upper_index(spec_.n, i, j));
    return scalar_path(rng::StreamKind::entry, idx, idx);
}

SamplePath EntryPathSource::wigner_diagonal(int k) const {
    const std::int64_t n_off = static_cast<std::int64_t>(spec_.n) * (spec_.n - 1) / 2;
    return scalar_path(rng::StreamKind::entry, static_cast<std::uint64_t>(2 * n_off + k),
                       static_cast<std::uint64_t>(n_off + k));
}

SamplePath2D EntryPathSource::wigner_offdiagonal(int i, int j) const {
    const auto idx = static_cast<std::uint64_t>(strict_upper_index(spec_.n, i, j));
    return complex_path(rng::StreamKind::entry, idx, idx);
}

SamplePath EntryPathSource::lattice_site(int u, int v) const {
    const int w = spec_.window_radius();
    const std::int64_t side = spec_.n + 2 * w;
    const auto idx = static_cast<std::uint64_t>((u + w) * side + (v + w));
    return scalar_path(rng::StreamKind::lattice, idx, idx);
}

SamplePath EntryPathSource::wishart_factor(int i, int k) const {
    const auto idx = static_cast<std::uint64_t>(static_cast<std::int64_t>(i) * spec_.n + k);
    return scalar_path(rng::StreamKind::wishart, idx, idx);
}

SamplePath2D EntryPathSource::wishart_factor_2d(int i, int k) const {
    const auto idx = static_cast<std::uint64_t>(static_cast<std::int64_t>(i) * spec_.n + k);
    return complex_path(rng::StreamKind::wishart, idx, idx);
}

std::vector<MatrixProcessFrame> build_wigner_frames(const EnsembleSpec& spec) {
    validate_spec(spec);
    require(spec.variant == EnsembleVariant::wigner_real, "spec variant must be wigner_real");
    const int n = spec.n;
    const auto& nodes = spec.snapshot_nodes;
    const std::size_t ns = nodes.size();
    const std::int64_t count = static_cast<std::int64_t>(n) * (n + 1) / 2;
    const std::vector<double> snap = scalar_snapshots(spec, rng::StreamKind::entry, count, 0, nodes);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    const double diag_scale = std::sqrt(2.0) * inv_sqrt_n;
    std::vector<MatrixProcessFrame> frames;
    frames.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        MatrixProcessFrame f = empty_frame(spec.grid.node(nodes[s]), n, false);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double x = snap[static_cast<std::size_t>(upper_index(n, i, j)) * ns + s];
                const double v = (i == j) ? diag_scale * x : inv_sqrt_n * x;
                f.re[static_cast<std::size_t>(i) * n + j] = v;
                f.re[static_cast<std::size_t>(j) * n + i] = v;
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<MatrixProcessFrame> build_wigner_complex_frames(const EnsembleSpec& spec) {
    validate_spec(spec);
    require(spec.variant == EnsembleVariant::wigner_complex, "spec variant must be wigner_complex");
    require(static_cast<bool>(spec.coeffs2d.sigma), "2-D coefficients required");
    require(static_cast<bool>(spec.coeffs.sigma), "scalar coefficients required for the diagonal");
    const int n = spec.n;
    const auto& nodes = spec.snapshot_nodes;
    const std::size_t ns = nodes.size();
    const std::int64_t n_off = static_cast<std::int64_t>(n) * (n - 1) / 2;

    const std::vector<double> off =
        complex_snapshots(spec, rng::StreamKind::entry, n_off, 0, nodes);
    // diagonal drivers live after the off-diagonal pairs in the same stream kind
    std::vector<double> diag;
    {
        FgnOptions o;
        o.stream_kind = rng::StreamKind::entry;
        o.stream_replica = spec.replica;
        o.stream_offset = static_cast<std::uint64_t>(2 * n_off);
        diag.resize(static_cast<std::size_t>(n) * ns);
        GaussianPathBatch drivers = generate_fbm(spec.grid, spec.hurst, n, spec.seed, o, spec.workers);
        parallel_for(static_cast<std::size_t>(n), resolve_workers(spec.workers), [&](std::size_t k) {
            rng::GaussianStream gs(spec.seed,
                                   rng::stream_id(rng::StreamKind::initial, spec.replica,
                                                  static_cast<std::uint64_t>(n_off) + k));
            const SamplePath p =
                integrate(spec.coeffs, drivers, static_cast<std::int64_t>(k), spec.x0.draw(gs));
            for (std::size_t s = 0; s < ns; ++s) diag[k * ns + s] = p.values[nodes[s]];
        });
    }

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<MatrixProcessFrame> frames;
    frames.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        MatrixProcessFrame f = empty_frame(spec.grid.node(nodes[s]), n, true);
        for (int i = 0; i < n; ++i) {
            f.re[static_cast<std::size_t>(i) * n + i] = inv_sqrt_n * diag[i * ns + s];
            for (int j = i + 1; j < n; ++j) {
                const std::size_t e = static_cast<std::size_t>(strict_upper_index(n, i, j));
                const double z1 = off[(e * ns + s) * 2];
                const double z2 = off[(e * ns + s) * 2 + 1];
                f.re[static_cast<std::size_t>(i) * n + j] = inv_sqrt_n * z1;
                f.im[static_cast<std::size_t>(i) * n + j] = inv_sqrt_n * z2;
                f.re[static_cast<std::size_t>(j) * n + i] = inv_sqrt_n * z1;
                f.im[static_cast<std::size_t>(j) * n + i] = -inv_sqrt_n * z2;
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<MatrixProcessFrame> build_dependent_frames(const EnsembleSpec& spec) {
    validate_spec(spec);
    require(spec.variant == EnsembleVariant::dependent, "spec variant must be dependent");
    const int n = spec.n;
    const int w = spec.window_radius();
    const std::int64_t side = n + 2 * w;
    const auto& nodes = spec.snapshot_nodes;
    const std::size_t ns = nodes.size();
    const std::vector<double> snap =
        scalar_snapshots(spec, rng::StreamKind::lattice, side * side, 0, nodes);

    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<MatrixProcessFrame> frames;
    frames.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        MatrixProcessFrame f = empty_frame(spec.grid.node(nodes[s]), n, false);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double acc = 0.0;
                for (const auto& term : spec.index_set) {
                    const std::size_t site = static_cast<std::size_t>(
                        (i + term.r[0] + w) * side + (j + term.r[1] + w));
                    acc += term.a * snap[site * ns + s];
                }
                const double v = inv_sqrt_n * acc;
                f.re[static_cast<std::size_t>(i) * n + j] = v;
                f.re[static_cast<std::size_t>(j) * n + i] = v;
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

CenteringTable resolve_wishart_centering(const EnsembleSpec& spec, std::int64_t n_mc) {
    CenteringTable table;
    table.method = "exact";
    const bool complex_entries = spec.variant == EnsembleVariant::wishart_complex;
    for (int node : spec.snapshot_nodes) {
        const double t = spec.grid.node(node);
        table.t.push_back(t);
        double m = 0.0;
        if (preset_exact_mean(spec.coeffs_name, spec.preset_params, spec.x0, t, &m)) {
            table.m1.push_back(m);
            table.m2.push_back(complex_entries ? m : 0.0);
        } else {
            table.method = "mc";
            table.n_mc = n_mc;
            if (complex_entries) {
                const auto est = moment_estimator_2d(spec.coeffs2d, spec.x0, spec.hurst, spec.grid,
                                                     t, n_mc, spec.seed, spec.workers);
                table.m1.push_back(est.m_t[0]);
                table.m2.push_back(est.m_t[1]);
            } else {
                const auto est = moment_estimator(spec.coeffs, spec.x0, spec.hurst, spec.grid, t,
                                                  n_mc, spec.seed, spec.workers);
                table.m1.push_back(est.m_t);
                table.m2.push_back(0.0);
            }
        }
    }
    return table;
}

namespace {

std::vector<MatrixProcessFrame> wishart_real_impl(const EnsembleSpec& spec, bool centered,
                                                  CenteringTable* centering_out) {
    validate_spec(spec);
    require(spec.variant == EnsembleVariant::wishart_real, "spec variant must be wishart_real");
    const int p = spec.p, n = spec.n;
    const auto& nodes = spec.snapshot_nodes;
    const std::size_t ns = nodes.size();
    const std::int64_t count = static_cast<std::int64_t>(p) * n;
    const std::vector<double> snap =
        scalar_snapshots(spec, rng::StreamKind::wishart, count, 0, nodes);

    CenteringTable table;
    if (centered) table = resolve_wishart_centering(spec);
    if (centering_out) *centering_out = table;

    std::vector<MatrixProcessFrame> frames;
    frames.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        const double m = centered ? table.m1[s] : 0.0;
        Eigen::MatrixXd factor(p, n);
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < n; ++k)
                factor(i, k) = snap[(static_cast<std::size_t>(i) * n + k) * ns + s] - m;
        Eigen::MatrixXd u = (factor * factor.transpose()) / static_cast<double>(n);
        MatrixProcessFrame f = empty_frame(spec.grid.node(nodes[s]), p, false);
        for (int i = 0; i < p; ++i) {
            f.re[static_cast<std::size_t>(i) * p + i] = u(i, i);
            for (int j = i + 1; j < p; ++j) {
                const double v = 0.5 * (u(i, j) + u(j, i));  // symmetrize roundoff
                f.re[static_cast<std::size_t>(i) * p + j] = v;
                f.re[static_cast<std::size_t>(j) * p + i] = v;
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

}  // namespace

std::vector<MatrixProcessFrame> build_wishart_frames(const EnsembleSpec& spec,
                                                     CenteringTable* centering) {
    return wishart_real_impl(spec, true, centering);
}

std::vector<MatrixProcessFrame> uncentered_wishart_frames(const EnsembleSpec& spec) {
    return wishart_real_impl(spec, false, nullptr);
}

std::vector<MatrixProcessFrame> build_wishart_complex_frames(const EnsembleSpec& spec,
                                                             CenteringTable* centering) {
    validate_spec(spec);
    require(spec.variant == EnsembleVariant::wishart_complex,
            "spec variant must be wishart_complex");
    require(static_cast<bool>(spec.coeffs2d.sigma), "2-D coefficients required");
    const int p = spec.p, n = spec.n;
    const auto& nodes = spec.snapshot_nodes;
    const std::size_t ns = nodes.size();
    const std::int64_t count = static_cast<std::int64_t>(p) * n;
    const std::vector<double> snap =
        complex_snapshots(spec, rng::StreamKind::wishart, count, 0, nodes);

    CenteringTable table = resolve_wishart_centering(spec);
    if (centering) *centering = table;

    std::vector<MatrixProcessFrame> frames;
    frames.reserve(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        Eigen::MatrixXcd factor(p, n);
        for (int i = 0; i < p; ++i)
            for (int k = 0; k < n; ++k) {
                const std::size_t e = static_cast<std::size_t>(i) * n + k;
                factor(i, k) = std::complex<double>(snap[(e * ns + s) * 2] - table.m1[s],
                                                    snap[(e * ns + s) * 2 + 1] - table.m2[s]);
            }
        Eigen::MatrixXcd wmat = (factor * factor.adjoint()) / static_cast<double>(n);
        MatrixProcessFrame f = empty_frame(spec.grid.node(nodes[s]), p, true);
        for (int i = 0; i < p; ++i) {
            f.re[static_cast<std::size_t>(i) * p + i] = wmat(i, i).real();
            for (int j = i + 1; j < p; ++j) {
                const std::complex<double> v = 0.5 * (wmat(i, j) + std::conj(wmat(j, i)));
                f.re[static_cast<std::size_t>(i) * p + j] = v.real();
                f.im[static_cast<std::size_t>(i) * p + j] = v.imag();
                f.re[static_cast<std::size_t>(j) * p + i] = v.real();
                f.im[static_cast<std::size_t>(j) * p + i] = -v.imag();
            }
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

std::vector<MatrixProcessFrame> build_frames(const EnsembleSpec& spec, CenteringTable* centering) {
    switch (spec.variant) {
        case EnsembleVariant::wigner_real: return build_wigner_frames(spec);
        case EnsembleVariant::wigner_complex: return build_wigner_complex_frames(spec);
        case EnsembleVariant::dependent: return build_dependent_frames(spec);
        case EnsembleVariant::wishart_real: return build_wishart_frames(spec, centering);
        case EnsembleVariant::wishart_complex:
            return build_wishart_complex_frames(spec, centering);
    }
    throw std::logic_error("unreachable ensemble variant");
}

void write_frames_csv(const std::vector<MatrixProcessFrame>& frames, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    std::fputs("t,i,j,re,im\n", f);
    for (const auto& frame : frames)
        for (int i = 0; i < frame.dim; ++i)
            for (int j = 0; j < frame.dim; ++j)
                std::fprintf(f, "%.17g,%d,%d,%.17g,%.17g\n", frame.t, i, j, frame.real_at(i, j),
                             frame.imag_at(i, j));
    std::fclose(f);
}

void write_frames_binary(const std::vector<MatrixProcessFrame>& frames, const std::string& file) {
    if (frames.empty()) throw std::invalid_argument("no frames to write");
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    char header[32] = {0};
    std::memcpy(header, "MATF", 4);
    const std::uint32_t version = 1;
    const std::uint64_t count = frames.size();
    const std::uint64_t dim = static_cast<std::uint64_t>(frames.front().dim);
    std::memcpy(header + 4, &version, 4);
    std::memcpy(header + 8, &count, 8);
    std::memcpy(header + 16, &dim, 8);
    header[24] = frames.front().complex_entries ? 1 : 0;
    std::fwrite(header, 1, 32, f);
    for (const auto& frame : frames) {
        std::fwrite(&frame.t, sizeof(double), 1, f);
        std::fwrite(frame.re.data(), sizeof(double), frame.re.size(), f);
        if (frame.complex_entries) std::fwrite(frame.im.data(), sizeof(double), frame.im.size(), f);
    }
    std::fclose(f);
}

std::vector<MatrixProcessFrame> read_frames_binary(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open " + file);
    char header[32];
    if (std::fread(header, 1, 32, f) != 32 || std::memcmp(header, "MATF", 4) != 0) {
        std::fclose(f);
        throw std::runtime_error("not a MATF file: " + file);
    }
    std::uint64_t count = 0, dim = 0;
    std::memcpy(&count, header + 8, 8);
    std::memcpy(&dim, header + 16, 8);
    const bool complex_entries = header[24] != 0;
    std::vector<MatrixProcessFrame> frames;
    frames.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        MatrixProcessFrame frame = empty_frame(0.0, static_cast<int>(dim), complex_entries);
        bool ok = std::fread(&frame.t, sizeof(double), 1, f) == 1;
        ok = ok && std::fread(frame.re.data(), sizeof(double), frame.re.size(), f) == frame.re.size();
        if (complex_entries)
            ok = ok &&
                 std::fread(frame.im.data(), sizeof(double), frame.im.size(), f) == frame.im.size();
        if (!ok) {
            std::fclose(f);
            throw std::runtime_error("truncated MATF file: " + file);
        }
        frames.push_back(std::move(frame));
    }
    std::fclose(f);
    return frames;
}

}  // namespace spectralflow
