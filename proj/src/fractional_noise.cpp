#include "spectralflow/fractional_noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "spectralflow/parallel.hpp"
#include "spectralflow/rng.hpp"

namespace spectralflow {

namespace {

std::mutex g_fftw_mutex;  // FFTW plan creation is not thread-safe

// Autocovariance of unit-spacing fGN at lag k, scaled by dt^{2H}:
// r(k) = dt^{2H} ( |k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H} ) / 2.
double fgn_autocov(int k, double two_h, double dt_pow) {
    const double a = std::pow(std::abs(k + 1), two_h);
    const double b = std::pow(std::abs(k), two_h);
    const double c = std::pow(std::abs(k - 1), two_h);
    return 0.5 * dt_pow * (a - 2.0 * b + c);
}

struct Embedding {
    std::vector<double> lambda;  // DFT of the embedded autocovariance, length 2M
    bool usable = false;
};

Embedding build_embedding(const TimeGrid& grid, const HurstParameter& h, double tol_spec) {
    const int m = grid.steps;
    const int len = 2 * m;
    const double two_h = 2.0 * h.value();
    const double dt_pow = std::pow(grid.dt(), two_h);

    std::vector<std::complex<double>> c(len);
    for (int k = 0; k <= m; ++k) c[k] = fgn_autocov(k, two_h, dt_pow);
    for (int k = 1; k < m; ++k) c[len - k] = c[k];

    std::vector<std::complex<double>> out(len);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_plan plan = fftw_plan_dft_1d(len, reinterpret_cast<fftw_complex*>(c.data()),
                                          reinterpret_cast<fftw_complex*>(out.data()),
                                          FFTW_FORWARD, FFTW_ESTIMATE);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }

    Embedding emb;
    emb.lambda.resize(len);
    double max_l = 0.0;
    for (int k = 0; k < len; ++k) max_l = std::max(max_l, out[k].real());
    const double floor = -tol_spec * max_l;
    emb.usable = true;
    for (int k = 0; k < len; ++k) {
        double v = out[k].real();
        if (v < floor) emb.usable = false;
        emb.lambda[k] = std::max(v, 0.0);
    }
    return emb;
}

// One fGN path from its substream via the embedded spectrum. Consumes exactly
// 2M normals in index order k = 0..M (two at the real frequencies 0 and M,
// a (U,V) pair at each 1 <= k < M).
void sample_path_circulant(const std::vector<double>& lambda, rng::GaussianStream& gs,
                           fftw_plan plan, std::complex<double>* w, std::complex<double>* x,
                           double* out, int m) {
    const int len = 2 * m;
    const double inv_len = 1.0 / len;
    w[0] = std::sqrt(lambda[0] * inv_len) * gs.next();
    for (int k = 1; k < m; ++k) {
        const double scale = std::sqrt(0.5 * lambda[k] * inv_len);
        const double u = gs.next();
        const double v = gs.next();
        w[k] = std::complex<double>(scale * u, scale * v);
        w[len - k] = std::conj(w[k]);
    }
    w[m] = std::sqrt(lambda[m] * inv_len) * gs.next();
    gs.next();  // keep consumption at exactly 2M draws (pairs with w[0])

    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(w), reinterpret_cast<fftw_complex*>(x));
    for (int k = 0; k < m; ++k) out[k] = x[k].real();
}

// Hosking / Durbin-Levinson sequential conditional sampler, O(M^2) per path.
void sample_path_hosking(const std::vector<double>& r, rng::GaussianStream& gs, double* out,
                         int m) {
    std::vector<double> phi(m, 0.0), phi_prev(m, 0.0);
    double var = r[0];
    out[0] = std::sqrt(var) * gs.next();
    for (int n = 1; n < m; ++n) {
        double acc = r[n];
        for (int k = 1; k < n; ++k) acc -= phi_prev[k - 1] * r[n - k];
        const double theta = acc / var;
        phi[n - 1] = theta;
        for (int k = 0; k < n - 1; ++k) phi[k] = phi_prev[k] - theta * phi_prev[n - 2 - k];
        var *= (1.0 - theta * theta);
        if (var <= 0.0) throw std::runtime_error("hosking recursion lost positive definiteness");
        double mean = 0.0;
        for (int k = 0; k < n; ++k) mean += phi[k] * out[n - 1 - k];
        out[n] = mean + std::sqrt(var) * gs.next();
        std::swap(phi, phi_prev);
    }
}

}  // namespace

HurstParameter::HurstParameter(double h, bool allow_brownian) : h_(h) {
    const bool ok = (h > 0.5 && h < 1.0) || (allow_brownian && h == 0.5);
    if (!ok) throw std::domain_error("Hurst parameter must satisfy 1/2 < H < 1");
}

TimeGrid::TimeGrid(double t_end_, int steps_) : t_end(t_end_), steps(steps_) {
    if (!(t_end > 0.0) || steps < 1) throw std::domain_error("time grid needs t_end > 0, steps >= 1");
}

double fbm_covariance(double s, double t, const HurstParameter& h) {
    if (s < 0.0 || t < 0.0) throw std::domain_error("fbm_covariance needs nonnegative times");
    const double two_h = 2.0 * h.value();
    return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double fgn_increment_covariance(const TimeGrid& grid, const HurstParameter& h, int k, int l) {
    const double dt = grid.dt();
    const double t0 = k * dt, t1 = (k + 1) * dt;
    const double s0 = l * dt, s1 = (l + 1) * dt;
    return fbm_covariance(t1, s1, h) - fbm_covariance(t1, s0, h) - fbm_covariance(t0, s1, h) +
           fbm_covariance(t0, s0, h);
}

std::vector<double> circulant_spectrum(const TimeGrid& grid, const HurstParameter& h) {
    return build_embedding(grid, h, 0.0).lambda;
}

GaussianPathBatch generate_fgn(const TimeGrid& grid, const HurstParameter& h, std::int64_t count,
                               std::uint64_t seed, const FgnOptions& opts, int workers) {
    if (count < 1) throw std::domain_error("count must be >= 1");
    const int m = grid.steps;
    GaussianPathBatch batch;
    batch.grid = grid;
    batch.hurst = h.value();
    batch.count = count;
    batch.values.assign(static_cast<std::size_t>(count) * grid.nodes(), 0.0);

    bool use_hosking = opts.force_hosking;
    Embedding emb;
    if (!use_hosking) {
        emb = build_embedding(grid, h, opts.tol_spec);
        if (!emb.usable) {
            if (!opts.allow_hosking_fallback)
                throw std::runtime_error("circulant embedding spectrum below -tol_spec and fallback disabled");
            use_hosking = true;
        }
    }

    if (use_hosking) {
        const double two_h = 2.0 * h.value();
        const double dt_pow = std::pow(grid.dt(), two_h);
        std::vector<double> r(m);
        for (int k = 0; k < m; ++k) r[k] = fgn_autocov(k, two_h, dt_pow);
        parallel_for(static_cast<std::size_t>(count), resolve_workers(workers), [&](std::size_t i) {
            rng::GaussianStream gs(seed, rng::stream_id(opts.stream_kind, opts.stream_replica,
                                                        opts.stream_offset + i));
            sample_path_hosking(r, gs, batch.path(static_cast<std::int64_t>(i)) + 1, m);
        });
        return batch;
    }

    const int len = 2 * m;
    fftw_plan plan;
    std::vector<std::complex<double>> proto(len), proto_out(len);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_1d(len, reinterpret_cast<fftw_complex*>(proto.data()),
                                reinterpret_cast<fftw_complex*>(proto_out.data()), FFTW_FORWARD,
                                FFTW_ESTIMATE);
    }
    const int nworkers = resolve_workers(workers);
    std::vector<std::vector<std::complex<double>>> wbuf(nworkers, std::vector<std::complex<double>>(len));
    std::vector<std::vector<std::complex<double>>> xbuf(nworkers, std::vector<std::complex<double>>(len));
    parallel_for_workers(static_cast<std::size_t>(count), nworkers, [&](std::size_t i, int w) {
        rng::GaussianStream gs(seed, rng::stream_id(opts.stream_kind, opts.stream_replica,
                                                    opts.stream_offset + i));
        sample_path_circulant(emb.lambda, gs, plan, wbuf[w].data(), xbuf[w].data(),
                              batch.path(static_cast<std::int64_t>(i)) + 1, m);
    });
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }
    return batch;
}

GaussianPathBatch generate_fbm(const TimeGrid& grid, const HurstParameter& h, std::int64_t count,
                               std::uint64_t seed, const FgnOptions& opts, int workers) {
    GaussianPathBatch batch = generate_fgn(grid, h, count, seed, opts, workers);
    for (std::int64_t i = 0; i < batch.count; ++i) {
        double* p = batch.path(i);
        for (int k = 1; k <= grid.steps; ++k) p[k] += p[k - 1];
    }
    return batch;
}

GaussianPathBatch generate_fgn_cholesky(const TimeGrid& grid, const HurstParameter& h,
                                        std::int64_t count, std::uint64_t seed) {
    const int m = grid.steps;
    if (m > 64) throw std::domain_error("cholesky oracle limited to 64 steps");
    // Dense lower Cholesky of the increment covariance.
    std::vector<double> cov(static_cast<std::size_t>(m) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) cov[i * m + j] = fgn_increment_covariance(grid, h, i, j);
    std::vector<double> chol(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            double acc = cov[i * m + j];
            for (int k = 0; k < j; ++k) acc -= chol[i * m + k] * chol[j * m + k];
            if (i == j) {
                if (acc <= 0.0) throw std::runtime_error("increment covariance not positive definite");
                chol[i * m + i] = std::sqrt(acc);
            } else {
                chol[i * m + j] = acc / chol[j * m + j];
            }
        }
    }
    GaussianPathBatch batch;
    batch.grid = grid;
    batch.hurst = h.value();
    batch.count = count;
    batch.values.assign(static_cast<std::size_t>(count) * grid.nodes(), 0.0);
    std::vector<double> z(m);
    for (std::int64_t i = 0; i < count; ++i) {
        rng::GaussianStream gs(seed, rng::stream_id(rng::StreamKind::fgn, 0, static_cast<std::uint64_t>(i)));
        for (int k = 0; k < m; ++k) z[k] = gs.next();
        double* out = batch.path(i) + 1;
        for (int r = 0; r < m; ++r) {
            double acc = 0.0;
            for (int k = 0; k <= r; ++k) acc += chol[r * m + k] * z[k];
            out[r] = acc;
        }
    }
    return batch;
}

void write_paths_csv(const GaussianPathBatch& batch, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    std::fputs("path_id,t,value\n", f);
    for (std::int64_t i = 0; i < batch.count; ++i) {
        const double* p = batch.path(i);
        for (int k = 0; k < batch.grid.nodes(); ++k)
            std::fprintf(f, "%lld,%.17g,%.17g\n", static_cast<long long>(i), batch.grid.node(k), p[k]);
    }
    std::fclose(f);
}

void write_paths_binary(const GaussianPathBatch& batch, const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + file);
    char header[32] = {0};
    std::memcpy(header, "FBMP", 4);
    const std::uint32_t version = 1;
    const std::uint64_t count = static_cast<std::uint64_t>(batch.count);
    const std::uint64_t nodes = static_cast<std::uint64_t>(batch.grid.nodes());
    std::memcpy(header + 4, &version, 4);
    std::memcpy(header + 8, &count, 8);
    std::memcpy(header + 16, &nodes, 8);
    std::fwrite(header, 1, 32, f);
    std::fwrite(batch.values.data(), sizeof(double), batch.values.size(), f);
    std::fclose(f);
}

}  // namespace spectralflow
