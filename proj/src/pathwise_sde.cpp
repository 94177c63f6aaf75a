#include "spectralflow/pathwise_sde.hpp"

#include <cmath>
#include <stdexcept>

#include "spectralflow/parallel.hpp"

namespace spectralflow {

namespace {

[[noreturn]] void bad_step(const char* what, int k) {
    throw std::runtime_error(std::string("integration failure: ") + what + " non-finite at step " +
                             std::to_string(k));
}

void check_derivatives(const CoefficientSet& c, double x, int k) {
    if (c.sigma_prime && !std::isfinite(c.sigma_prime(x))) bad_step("sigma'", k);
    if (c.b_prime && !std::isfinite(c.b_prime(x))) bad_step("b'", k);
}

}  // namespace

double X0Sampler::draw(rng::GaussianStream& gs) const {
    switch (kind) {
        case Kind::point:
            return a;
        case Kind::normal:
            return a + sd * gs.next();
    }
    return a;
}

std::string X0Sampler::describe() const {
    char buf[64];
    if (kind == Kind::point) {
        std::snprintf(buf, sizeof(buf), "point(%g)", a);
    } else {
        std::snprintf(buf, sizeof(buf), "normal(%g,%g)", a, sd);
    }
    return buf;
}

SamplePath integrate(const CoefficientSet& coeffs, const TimeGrid& grid, const double* driver,
                     double x0) {
    if (!coeffs.sigma || !coeffs.b) throw std::invalid_argument("coefficients sigma, b required");
    SamplePath path;
    path.grid = grid;
    path.x0 = x0;
    path.values.resize(grid.nodes());
    path.values[0] = x0;
    const double dt = grid.dt();
    double x = x0;
    for (int k = 0; k < grid.steps; ++k) {
        const double db = driver[k + 1] - driver[k];
        const double s0 = coeffs.sigma(x);
        const double b0 = coeffs.b(x);
        const double pred = x + s0 * db + b0 * dt;
        if (!std::isfinite(pred)) bad_step("predictor", k);
        x += 0.5 * (s0 + coeffs.sigma(pred)) * db + 0.5 * (b0 + coeffs.b(pred)) * dt;
        if (!std::isfinite(x)) bad_step("state", k);
        check_derivatives(coeffs, x, k);
        path.values[k + 1] = x;
    }
    return path;
}

SamplePath integrate(const CoefficientSet& coeffs, const GaussianPathBatch& drivers,
                     std::int64_t path_index, double x0) {
    if (path_index < 0 || path_index >= drivers.count)
        throw std::out_of_range("driver path index out of range");
    return integrate(coeffs, drivers.grid, drivers.path(path_index), x0);
}

SamplePath2D integrate_2d(const CoefficientSet2D& coeffs, const TimeGrid& grid,
                          const double* driver1, const double* driver2,
                          std::array<double, 2> z0) {
    if (!coeffs.sigma || !coeffs.b) throw std::invalid_argument("coefficients sigma, b required");
    SamplePath2D path;
    path.grid = grid;
    path.z0 = z0;
    path.v1.resize(grid.nodes());
    path.v2.resize(grid.nodes());
    path.v1[0] = z0[0];
    path.v2[0] = z0[1];
    const double dt = grid.dt();
    double z1 = z0[0], z2 = z0[1];
    for (int k = 0; k < grid.steps; ++k) {
        const double db1 = driver1[k + 1] - driver1[k];
        const double db2 = driver2[k + 1] - driver2[k];
        const auto s0 = coeffs.sigma(z1, z2);
        const auto b0 = coeffs.b(z1, z2);
        const double p1 = z1 + s0[0] * db1 + s0[1] * db2 + b0[0] * dt;
        const double p2 = z2 + s0[2] * db1 + s0[3] * db2 + b0[1] * dt;
        if (!std::isfinite(p1) || !std::isfinite(p2)) bad_step("predictor", k);
        const auto s1 = coeffs.sigma(p1, p2);
        const auto b1 = coeffs.b(p1, p2);
        z1 += 0.5 * ((s0[0] + s1[0]) * db1 + (s0[1] + s1[1]) * db2 + (b0[0] + b1[0]) * dt);
        z2 += 0.5 * ((s0[2] + s1[2]) * db1 + (s0[3] + s1[3]) * db2 + (b0[1] + b1[1]) * dt);
        if (!std::isfinite(z1) || !std::isfinite(z2)) bad_step("state", k);
        if (coeffs.sigma_jacobian) {
            for (double v : coeffs.sigma_jacobian(z1, z2))
                if (!std::isfinite(v)) bad_step("sigma~ jacobian", k);
        }
        if (coeffs.b_jacobian) {
            for (double v : coeffs.b_jacobian(z1, z2))
                if (!std::isfinite(v)) bad_step("b~ jacobian", k);
        }
        path.v1[k + 1] = z1;
        path.v2[k + 1] = z2;
    }
    return path;
}

HolderEstimate holder_norm_estimate(const SamplePath& path, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must lie in (0,1)");
    const int m = path.grid.steps;
    const double dt = path.grid.dt();
    HolderEstimate est;
    est.beta = beta;

    auto consider = [&](int i, int j) {
        const double q = std::abs(path.values[j] - path.values[i]) /
                         std::pow((j - i) * dt, beta);
        if (q > est.quotient) {
            est.quotient = q;
            est.argmax_pair = {path.grid.node(i), path.grid.node(j)};
        }
    };

    if (m <= 2048) {
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j <= m; ++j) consider(i, j);
    } else {
        for (int sep = 1; sep <= m; sep *= 2)
            for (int i = 0; i + sep <= m; ++i) consider(i, i + sep);
    }
    return est;
}

MomentEstimate moment_estimator(const CoefficientSet& coeffs, const X0Sampler& x0,
                                const HurstParameter& h, const TimeGrid& grid, double t,
                                std::int64_t n_mc, std::uint64_t seed, int workers) {
    if (n_mc < 2) throw std::domain_error("moment_estimator needs n_mc >= 2");
    const double node_f = t / grid.dt();
    const int node = static_cast<int>(std::lround(node_f));
    if (node < 0 || node > grid.steps || std::abs(node_f - node) * grid.dt() > 1e-9 * grid.t_end)
        throw std::domain_error("t must be a grid node");

    FgnOptions opts;
    opts.stream_kind = rng::StreamKind::moment;
    GaussianPathBatch drivers = generate_fbm(grid, h, n_mc, seed, opts, workers);

    std::vector<double> xt(n_mc);
    parallel_for(static_cast<std::size_t>(n_mc), resolve_workers(workers), [&](std::size_t i) {
        rng::GaussianStream gs(seed, rng::stream_id(rng::StreamKind::moment_initial, 0, i));
        const SamplePath p = integrate(coeffs, drivers, static_cast<std::int64_t>(i), x0.draw(gs));
        xt[i] = p.values[node];
    });

    double mean = 0.0;
    for (double v : xt) mean += v;
    mean /= n_mc;
    double ss = 0.0;
    for (double v : xt) ss += (v - mean) * (v - mean);
    const double var = ss / (n_mc - 1);

    MomentEstimate est;
    est.t = grid.node(node);
    est.m_t = mean;
    est.d_t = std::sqrt(std::max(var, 0.0));
    est.mc_stderr = est.d_t / std::sqrt(static_cast<double>(n_mc));
    est.n_mc = n_mc;
    return est;
}

MomentEstimate2D moment_estimator_2d(const CoefficientSet2D& coeffs, const X0Sampler& x0,
                                     const HurstParameter& h, const TimeGrid& grid, double t,
                                     std::int64_t n_mc, std::uint64_t seed, int workers) {
    if (n_mc < 2) throw std::domain_error("moment_estimator needs n_mc >= 2");
    const double node_f = t / grid.dt();
    const int node = static_cast<int>(std::lround(node_f));
    if (node < 0 || node > grid.steps || std::abs(node_f - node) * grid.dt() > 1e-9 * grid.t_end)
        throw std::domain_error("t must be a grid node");

    // Two independent drivers per replica: path 2i drives component 1.
    FgnOptions opts;
    opts.stream_kind = rng::StreamKind::moment;
    GaussianPathBatch drivers = generate_fbm(grid, h, 2 * n_mc, seed, opts, workers);

    std::vector<double> z1(n_mc), z2(n_mc);
    parallel_for(static_cast<std::size_t>(n_mc), resolve_workers(workers), [&](std::size_t i) {
        rng::GaussianStream gs(seed, rng::stream_id(rng::StreamKind::moment_initial, 0, i));
        const std::array<double, 2> start{x0.draw(gs), x0.draw(gs)};
        const SamplePath2D p = integrate_2d(coeffs, grid, drivers.path(2 * i),
                                            drivers.path(2 * i + 1), start);
        z1[i] = p.v1[node];
        z2[i] = p.v2[node];
    });

    MomentEstimate2D est;
    est.t = grid.node(node);
    est.n_mc = n_mc;
    double m1 = 0.0, m2 = 0.0;
    for (std::int64_t i = 0; i < n_mc; ++i) {
        m1 += z1[i];
        m2 += z2[i];
    }
    m1 /= n_mc;
    m2 /= n_mc;
    est.m_t = {m1, m2};
    double ss = 0.0;
    for (std::int64_t i = 0; i < n_mc; ++i)
        ss += (z1[i] - m1) * (z1[i] - m1) + (z2[i] - m2) * (z2[i] - m2);
    est.d_t = std::sqrt(std::max(ss / (n_mc - 1), 0.0));
    est.mc_stderr = est.d_t / std::sqrt(static_cast<double>(n_mc));
    return est;
}

CoefficientSet coefficient_preset(const std::string& name, const PresetParams& params) {
    CoefficientSet c;
    c.name = name;
    if (name == "fbm") {
        c.sigma = [](double) { return 1.0; };
        c.b = [](double) { return 0.0; };
        c.sigma_prime = [](double) { return 0.0; };
        c.b_prime = [](double) { return 0.0; };
        c.sigma_bounded = true;
        c.b_bounded = true;
    } else if (name == "ou") {
        const double s0 = params.sigma0, th = params.theta;
        c.sigma = [s0](double) { return s0; };
        c.b = [th](double x) { return -th * x; };
        c.sigma_prime = [](double) { return 0.0; };
        c.b_prime = [th](double) { return -th; };
        c.sigma_bounded = true;
        c.b_bounded = false;
    } else if (name == "sin_drift") {
        c.sigma = [](double) { return 1.0; };
        c.b = [](double x) { return std::sin(x); };
        c.sigma_prime = [](double) { return 0.0; };
        c.b_prime = [](double x) { return std::cos(x); };
        c.sigma_bounded = true;
        c.b_bounded = true;
    } else if (name == "bounded_smooth") {
        c.sigma = [](double x) { return 1.0 / (1.0 + x * x); };
        c.b = [](double x) { return std::cos(x); };
        c.sigma_prime = [](double x) {
            const double d = 1.0 + x * x;
            return -2.0 * x / (d * d);
        };
        c.b_prime = [](double x) { return -std::sin(x); };
        c.sigma_bounded = true;
        c.b_bounded = true;
    } else {
        throw std::invalid_argument("unknown coefficient preset: " + name);
    }
    return c;
}

CoefficientSet2D diagonal_coefficients_2d(const CoefficientSet& scalar) {
    CoefficientSet2D c;
    c.name = scalar.name + "_diag2d";
    c.sigma_bounded = scalar.sigma_bounded;
    c.b_bounded = scalar.b_bounded;
    auto s = scalar.sigma;
    auto b = scalar.b;
    c.sigma = [s](double z1, double z2) {
        return std::array<double, 4>{s(z1), 0.0, 0.0, s(z2)};
    };
    c.b = [b](double z1, double z2) { return std::array<double, 2>{b(z1), b(z2)}; };
    if (scalar.sigma_prime) {
        auto sp = scalar.sigma_prime;
        c.sigma_jacobian = [sp](double z1, double z2) {
            return std::array<double, 8>{sp(z1), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, sp(z2)};
        };
    }
    if (scalar.b_prime) {
        auto bp = scalar.b_prime;
        c.b_jacobian = [bp](double z1, double z2) {
            return std::array<double, 4>{bp(z1), 0.0, 0.0, bp(z2)};
        };
    }
    return c;
}

bool preset_exact_mean(const std::string& name, const PresetParams& params, const X0Sampler& x0,
                       double t, double* out) {
    if (name == "fbm") {
        // dX = dB^H: E X_t = E X_0 for both sampler kinds.
        *out = x0.a;
        return true;
    }
    if (name == "ou") {
        // dX = sigma0 dB^H - theta X dt: E X_t = E X_0 e^{-theta t}.
        *out = x0.a * std::exp(-params.theta * t);
        return true;
    }
    return false;
}

}  // namespace spectralflow
