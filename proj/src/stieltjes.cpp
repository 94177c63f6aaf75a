#include "spectralflow/stieltjes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>

#include "spectralflow/parallel.hpp"

namespace spectralflow {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// Herglotz root of a G^2 + b G + c0 = 0 (Im G opposite to Im z).
cplx stieltjes_root(cplx a, cplx b, cplx c0, double im_z) {
    if (std::abs(a) == 0.0) return -c0 / b;
    const cplx disc = std::sqrt(b * b - 4.0 * a * c0);
    const cplx s = std::real(std::conj(b) * disc) >= 0.0 ? disc : -disc;
    const cplx q = -0.5 * (b + s);
    const cplx r1 = q / a;
    const cplx r2 = c0 / q;
    if (im_z > 0.0) return r1.imag() < 0.0 ? r1 : r2;
    return r1.imag() > 0.0 ? r1 : r2;
}

}  // namespace

void validate_grid(const ComplexGrid& grid) {
    if (!(grid.eta >= kEtaMin)) throw std::invalid_argument("eta below eta_min = 0.05");
    if (grid.n_e < 2) throw std::invalid_argument("need at least two energy points");
    if (!(grid.e_max > grid.e_min)) throw std::invalid_argument("empty energy window");
    if (grid.times.empty()) throw std::invalid_argument("grid carries no times");
    for (std::size_t i = 0; i + 1 < grid.times.size(); ++i)
        if (!(grid.times[i] < grid.times[i + 1]))
            throw std::invalid_argument("grid times must increase strictly");
}

StieltjesField make_field(const ComplexGrid& grid, const std::function<cplx(double, cplx)>& g) {
    validate_grid(grid);
    StieltjesField field;
    field.grid = grid;
    field.values.resize(grid.times.size() * grid.n_e);
    for (std::size_t ti = 0; ti < grid.times.size(); ++ti)
        for (int j = 0; j < grid.n_e; ++j)
            field.values[ti * grid.n_e + j] = g(grid.times[ti], grid.z(j));
    return field;
}

StieltjesField empirical_field(const ESDSeries& series, const ComplexGrid& grid) {
    validate_grid(grid);
    StieltjesField field;
    field.grid = grid;
    field.values.reserve(grid.times.size() * grid.n_e);
    for (double t : grid.times) {
        const SpectrumFrame* hit = nullptr;
        for (const auto& frame : series.frames)
            if (std::abs(frame.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) {
                hit = &frame;
                break;
            }
        if (!hit) throw std::invalid_argument("no spectrum frame at a requested grid time");
        for (int j = 0; j < grid.n_e; ++j)
            field.values.push_back(empirical_stieltjes(*hit, grid.z(j)));
    }
    return field;
}

StieltjesField closed_sc_field(const ComplexGrid& grid, const std::vector<double>& d_series) {
    if (d_series.size() != grid.times.size())
        throw std::invalid_argument("d_series length must match grid times");
    validate_grid(grid);
    StieltjesField field;
    field.grid = grid;
    field.values.resize(grid.times.size() * grid.n_e);
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (int j = 0; j < grid.n_e; ++j)
            field.values[i * grid.n_e + j] = gsc_closed(grid.z(j), d_series[i]);
    return field;
}

StieltjesField closed_mp_field(const ComplexGrid& grid, double c,
                               const std::vector<double>& d_series) {
    if (d_series.size() != grid.times.size())
        throw std::invalid_argument("d_series length must match grid times");
    validate_grid(grid);
    StieltjesField field;
    field.grid = grid;
    field.values.resize(grid.times.size() * grid.n_e);
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (int j = 0; j < grid.n_e; ++j)
            field.values[i * grid.n_e + j] = gmp_closed(grid.z(j), c, d_series[i]);
    return field;
}

void validate_field(const StieltjesField& field) {
    const double bound = 1.0 / field.grid.eta + 1e-12;
    for (cplx v : field.values) {
        if (!finite(v)) throw std::runtime_error("non-finite Stieltjes value");
        if (std::abs(v) > bound) throw std::runtime_error("|G| exceeds 1/eta");
        if (v.imag() >= 0.0) throw std::runtime_error("upper-convention G must have Im G < 0");
    }
}

cplx empirical_stieltjes(const SpectrumFrame& frame, cplx z) {
    if (frame.eigenvalues.empty()) throw std::invalid_argument("empty spectrum");
    cplx acc{0.0, 0.0};
    for (double lam : frame.eigenvalues) acc += 1.0 / (z - lam);
    return acc / static_cast<double>(frame.eigenvalues.size());
}

cplx gsc_closed(cplx z, double d) {
    if (z.imag() == 0.0) throw std::invalid_argument("z must be off the real axis");
    if (!(d > 0.0)) throw std::invalid_argument("d must be positive");
    return stieltjes_root(cplx{d * d, 0.0}, -z, cplx{1.0, 0.0}, z.imag());
}

cplx gmp_closed(cplx z, double c, double sigma) {
    if (z.imag() == 0.0) throw std::invalid_argument("z must be off the real axis");
    if (!(c >= 0.0) || !(sigma > 0.0)) throw std::invalid_argument("need c >= 0 and sigma > 0");
    const double s2 = sigma * sigma;
    return stieltjes_root(c * s2 * z, -(z - s2 * (1.0 - c)), cplx{1.0, 0.0}, z.imag());
}

double ResidualField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// shared finite-difference scaffolding for the transport equations
struct FieldStencil {
    const StieltjesField& field;
    std::size_t nt;
    int ne;
    double de;

    explicit FieldStencil(const StieltjesField& f)
        : field(f),
          nt(f.grid.times.size()),
          ne(f.grid.n_e),
          de((f.grid.e_max - f.grid.e_min) / (f.grid.n_e - 1)) {
        if (nt < 3) throw std::domain_error("need at least three time nodes");
        if (ne < 3) throw std::invalid_argument("need at least three energy points");
        if (f.values.size() != nt * static_cast<std::size_t>(ne))
            throw std::invalid_argument("field values do not match its grid");
    }

    cplx g(std::size_t i, int j) const { return field.at(i, j); }
    cplx dz(std::size_t i, int j) const { return (field.at(i, j + 1) - field.at(i, j - 1)) / (2.0 * de); }
    cplx dt(std::size_t i, int j) const {
        return (field.at(i + 1, j) - field.at(i - 1, j)) /
               (field.grid.times[i + 1] - field.grid.times[i - 1]);
    }

    ResidualField shell(const std::string& id) const {
        ResidualField r;
        r.eta = field.grid.eta;
        r.equation_id = id;
        r.times.assign(field.grid.times.begin() + 1, field.grid.times.end() - 1);
        for (int j = 1; j + 1 < ne; ++j) r.energies.push_back(field.grid.energy(j));
        r.values.resize(r.times.size() * r.energies.size());
        return r;
    }
};

ResidualField sc_residual(const StieltjesField& field, const std::string& id,
                          const std::function<double(std::size_t)>& dd2) {
    const FieldStencil st(field);
    ResidualField res = st.shell(id);
    for (std::size_t i = 1; i + 1 < st.nt; ++i)
        for (int j = 1; j + 1 < st.ne; ++j)
            res.values[(i - 1) * res.energies.size() + (j - 1)] =
                std::abs(st.dt(i, j) + dd2(i) * st.g(i, j) * st.dz(i, j));
    return res;
}

}  // namespace

ResidualField pde_residual_sc(const StieltjesField& field, const std::vector<double>& d_series) {
    if (d_series.size() != field.grid.times.size())
        throw std::invalid_argument("d_series length must match field times");
    const auto& ts = field.grid.times;
    return sc_residual(field, "sc", [&](std::size_t i) {
        return (d_series[i + 1] * d_series[i + 1] - d_series[i - 1] * d_series[i - 1]) /
               (ts[i + 1] - ts[i - 1]);
    });
}

ResidualField pde_residual_sc_fbm(const StieltjesField& field, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("hurst outside (0,1)");
    const auto& ts = field.grid.times;
    return sc_residual(field, "sc_fbm", [&](std::size_t i) {
        return 2.0 * hurst * std::pow(ts[i], 2.0 * hurst - 1.0);
    });
}

ResidualField burgers_check(const StieltjesField& field, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("hurst outside (0,1)");
    const FieldStencil st(field);
    ResidualField res = st.shell("burgers");
    std::vector<double> u(st.nt);
    for (std::size_t i = 0; i < st.nt; ++i) u[i] = std::pow(field.grid.times[i], 2.0 * hurst);
    for (std::size_t i = 1; i + 1 < st.nt; ++i) {
        const double du1 = u[i] - u[i - 1], du2 = u[i + 1] - u[i];
        const double denom = du1 * du2 * (du1 + du2);
        for (int j = 1; j + 1 < st.ne; ++j) {
            // three-point derivative on the (possibly nonuniform) u grid
            const cplx dfdu = (st.g(i + 1, j) * (du1 * du1) +
                               st.g(i, j) * (du2 * du2 - du1 * du1) -
                               st.g(i - 1, j) * (du2 * du2)) /
                              denom;
            res.values[(i - 1) * res.energies.size() + (j - 1)] =
                std::abs(dfdu + st.g(i, j) * st.dz(i, j));
        }
    }
    return res;
}

ResidualField pde_residual_mp(const StieltjesField& field, const std::vector<double>& d_series,
                              double c) {
    if (d_series.size() != field.grid.times.size())
        throw std::invalid_argument("d_series length must match field times");
    if (!(c >= 0.0)) throw std::invalid_argument("aspect c must be nonnegative");
    const FieldStencil st(field);
    ResidualField res = st.shell("mp");
    const auto& ts = field.grid.times;
    for (std::size_t i = 1; i + 1 < st.nt; ++i) {
        const double dd2 = (d_series[i + 1] * d_series[i + 1] -
                            d_series[i - 1] * d_series[i - 1]) /
                           (ts[i + 1] - ts[i - 1]);
        for (int j = 1; j + 1 < st.ne; ++j) {
            const cplx g = st.g(i, j), gz = st.dz(i, j);
            const cplx rhs = -dd2 * (c * g * g + 2.0 * c * field.grid.z(j) * g * gz +
                                     (1.0 - c) * gz);
            res.values[(i - 1) * res.energies.size() + (j - 1)] = std::abs(st.dt(i, j) - rhs);
        }
    }
    return res;
}

double DependentKernel::f(double x, double y) const {
    double acc = 0.0;
    for (const auto& [kl, v] : gamma) acc += v * std::cos(kTwoPi * (kl.first * x + kl.second * y));
    return acc;
}

double DependentKernel::symbol(double theta, double psi) const {
    cplx phi{0.0, 0.0};
    for (const auto& term : index_set)
        phi += term.a * std::exp(cplx{0.0, term.r[0] * theta + term.r[1] * psi});
    return d_t * d_t * std::norm(phi);
}

double DependentKernel::gamma_abs_sum() const {
    double acc = 0.0;
    for (const auto& [kl, v] : gamma) acc += std::abs(v);
    return acc;
}

DependentKernel enumerate_gamma(const std::vector<IndexTerm>& index_set, double d_t) {
    if (index_set.empty()) throw std::invalid_argument("empty index set");
    DependentKernel kernel;
    kernel.index_set = index_set;
    kernel.d_t = d_t;

    std::map<std::pair<int, int>, double> raw;
    for (const auto& r : index_set)
        for (const auto& rp : index_set)
            raw[{r.r[0] - rp.r[0], r.r[1] - rp.r[1]}] += d_t * d_t * r.a * rp.a;

    for (const auto& [kl, v] : raw) {
        const std::pair<int, int> lk{kl.second, kl.first};
        const auto it = raw.find(lk);
        const double vt = it == raw.end() ? 0.0 : it->second;
        if (std::abs(v - vt) > 1e-12) {
            kernel.raw_transpose_symmetric = false;
            kernel.max_raw_asymmetry = std::max(kernel.max_raw_asymmetry, std::abs(v - vt));
        }
        // keep the populated lag's value; on a true mismatch the smaller lag wins
        const double use = it == raw.end() ? v : (kl <= lk ? v : vt);
        kernel.gamma[kl] = use;
        kernel.gamma[lk] = use;
    }
    for (const auto& [kl, v] : kernel.gamma) {
        (void)v;
        kernel.window_radius =
            std::max({kernel.window_radius, std::abs(kl.first), std::abs(kl.second)});
    }
    return kernel;
}

std::string sign_name(SignConvention sign) {
    return sign == SignConvention::plus ? "plus" : "selfconsistent_minus";
}

namespace {

void check_fixed_point_inputs(cplx z, const FixedPointConfig& cfg) {
    if (!(z.imag() >= kEtaMin)) throw std::invalid_argument("Im z below eta_min");
    if (cfg.n_q < 2 || cfg.max_iter < 1) throw std::invalid_argument("bad fixed-point config");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw std::invalid_argument("damping outside (0,1]");
}

[[noreturn]] void fail_fixed_point(double residual, int iters) {
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "fixed point did not converge: residual %.3e after %d iterations", residual,
                  iters);
    throw FixedPointError(msg, residual, iters);
}

}  // namespace

FixedPointResult dependent_fixed_point(const DependentKernel& kernel, cplx z,
                                       const FixedPointConfig& cfg) {
    check_fixed_point_inputs(z, cfg);
    const int n = cfg.n_q;
    const double sgn = cfg.sign == SignConvention::plus ? 1.0 : -1.0;

    std::vector<double> fmat(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            fmat[static_cast<std::size_t>(i) * n + j] = kernel.f((i + 0.5) / n, (j + 0.5) / n);

    FixedPointResult out;
    out.h.assign(n, -1.0 / z);
    std::vector<cplx> next(n);
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        double change = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx integral{0.0, 0.0};
            const double* row = &fmat[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) integral += row[j] * out.h[j];
            integral /= static_cast<double>(n);
            const cplx update = 1.0 / (-z + sgn * integral);
            next[i] = (1.0 - cfg.damping) * out.h[i] + cfg.damping * update;
            change = std::max(change, std::abs(next[i] - out.h[i]));
        }
        out.h.swap(next);
        for (cplx v : out.h)
            if (!finite(v)) fail_fixed_point(std::numeric_limits<double>::infinity(), iter);
        if (change < cfg.tol) {
            out.iterations = iter;
            out.converged = true;
            cplx s{0.0, 0.0};
            for (cplx v : out.h) s += v;
            out.s = s / static_cast<double>(n);
            return out;
        }
        if (iter == cfg.max_iter) fail_fixed_point(change, iter);
    }
    fail_fixed_point(std::numeric_limits<double>::quiet_NaN(), cfg.max_iter);
}

FixedPointResult dependent_fixed_point_mirror(const DependentKernel& kernel, cplx z,
                                              const FixedPointConfig& cfg) {
    check_fixed_point_inputs(z, cfg);
    const int nx = std::max(16, cfg.n_q / 4);
    const int nth = std::max(64, 16 * (kernel.window_radius + 1));

    std::vector<double> b(static_cast<std::size_t>(nth) * nth);
    for (int a = 0; a < nth; ++a)
        for (int q = 0; q < nth; ++q)
            b[static_cast<std::size_t>(a) * nth + q] =
                kernel.symbol(kTwoPi * a / nth, kTwoPi * q / nth);

    const std::size_t total = static_cast<std::size_t>(nx) * nth;
    std::vector<cplx> g(total, -1.0 / z), next(total);
    std::vector<cplx> above(static_cast<std::size_t>(nx) * nth), below(above.size());
    const double weight = 1.0 / (static_cast<double>(nx) * nth);

    FixedPointResult out;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        // prefix sums in x for every psi column; the cell at y = x splits in half
        for (int q = 0; q < nth; ++q) {
            cplx run{0.0, 0.0};
            for (int i = 0; i < nx; ++i) {
                below[static_cast<std::size_t>(i) * nth + q] =
                    run + 0.5 * g[static_cast<std::size_t>(i) * nth + q];
                run += g[static_cast<std::size_t>(i) * nth + q];
            }
            cplx tail{0.0, 0.0};
            for (int i = nx - 1; i >= 0; --i) {
                above[static_cast<std::size_t>(i) * nth + q] =
                    tail + 0.5 * g[static_cast<std::size_t>(i) * nth + q];
                tail += g[static_cast<std::size_t>(i) * nth + q];
            }
        }
        double change = 0.0;
        for (int i = 0; i < nx; ++i)
            for (int a = 0; a < nth; ++a) {
                cplx sig{0.0, 0.0};
                for (int q = 0; q < nth; ++q)
                    sig += b[static_cast<std::size_t>(a) * nth + q] *
                               above[static_cast<std::size_t>(i) * nth + q] +
                           b[static_cast<std::size_t>(q) * nth + a] *
                               below[static_cast<std::size_t>(i) * nth + q];
                sig *= weight;
                const std::size_t idx = static_cast<std::size_t>(i) * nth + a;
                const cplx update = 1.0 / (-z - sig);
                next[idx] = (1.0 - cfg.damping) * g[idx] + cfg.damping * update;
                change = std::max(change, std::abs(next[idx] - g[idx]));
            }
        g.swap(next);
        for (cplx v : g)
            if (!finite(v)) fail_fixed_point(std::numeric_limits<double>::infinity(), iter);
        if (change < cfg.tol) {
            out.iterations = iter;
            out.converged = true;
            cplx s{0.0, 0.0};
            for (cplx v : g) s += v;
            out.s = s * weight;
            out.h.resize(nx);
            for (int i = 0; i < nx; ++i) {
                cplx m{0.0, 0.0};
                for (int a = 0; a < nth; ++a) m += g[static_cast<std::size_t>(i) * nth + a];
                out.h[i] = m / static_cast<double>(nth);
            }
            return out;
        }
        if (iter == cfg.max_iter) fail_fixed_point(change, iter);
    }
    fail_fixed_point(std::numeric_limits<double>::quiet_NaN(), cfg.max_iter);
}

std::vector<FixedPointResult> fixed_point_grid(const DependentKernel& kernel,
                                               const std::vector<cplx>& zs,
                                               const FixedPointConfig& cfg, bool mirror,
                                               unsigned workers) {
    std::vector<FixedPointResult> results(zs.size());
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::mutex err_mutex;
    parallel_for(zs.size(), resolve_workers(static_cast<int>(workers)), [&](std::size_t i) {
        if (failed.load()) return;
        try {
            results[i] = mirror ? dependent_fixed_point_mirror(kernel, zs[i], cfg)
                                : dependent_fixed_point(kernel, zs[i], cfg);
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!failed.exchange(true)) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

void write_field_csv(const StieltjesField& field, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "t,re_z,im_z,re_G,im_G,convention\n");
    for (std::size_t ti = 0; ti < field.grid.times.size(); ++ti)
        for (int j = 0; j < field.grid.n_e; ++j) {
            const cplx v = field.at(ti, j);
            std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", field.grid.times[ti],
                         field.grid.energy(j), field.grid.eta, v.real(), v.imag(),
                         field.convention.c_str());
        }
    std::fclose(f);
}

void write_residual_csv(const ResidualField& residual, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "t,re_z,residual,equation_id\n");
    for (std::size_t ti = 0; ti < residual.times.size(); ++ti)
        for (std::size_t j = 0; j < residual.energies.size(); ++j)
            std::fprintf(f, "%.17g,%.17g,%.17g,%s\n", residual.times[ti], residual.energies[j],
                         residual.at(ti, j), residual.equation_id.c_str());
    std::fclose(f);
}

}  // namespace spectralflow
