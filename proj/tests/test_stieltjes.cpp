#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "spectralflow/rng.hpp"
#include "spectralflow/stieltjes.hpp"

using namespace spectralflow;

namespace {

ComplexGrid window(double e0, double e1, double delta, double t0, double t1, double eta = 0.5) {
    ComplexGrid grid;
    grid.e_min = e0;
    grid.e_max = e1;
    grid.n_e = static_cast<int>(std::lround((e1 - e0) / delta)) + 1;
    grid.eta = eta;
    const int nt = static_cast<int>(std::lround((t1 - t0) / delta));
    for (int i = 0; i <= nt; ++i) grid.times.push_back(t0 + delta * i);
    return grid;
}

std::vector<double> fbm_d(const std::vector<double>& times, double h) {
    std::vector<double> d(times.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::pow(times[i], h);
    return d;
}

std::vector<IndexTerm> spec_index_set() { return {{{0, 0}, 1.0}, {{0, 1}, 1.0}}; }

// composite Simpson for the MP quadrature oracle (smooth after x = 4 sin^2 phi)
cplx mp_transform_quadrature(cplx z) {
    const int n = 4096;
    const double h = 0.5 * M_PI / n;
    auto f = [&](double phi) {
        const double s = std::sin(phi), c = std::cos(phi);
        return 4.0 * c * c / (M_PI * (z - 4.0 * s * s));
    };
    cplx acc = f(0.0) + f(0.5 * M_PI);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(h * i);
    return acc * (h / 3.0);
}

}  // namespace

TEST_CASE("empirical stieltjes hand examples") {
    SpectrumFrame one{0.0, {0.0}};
    const cplx z{0.0, 1.0};
    CHECK(std::abs(empirical_stieltjes(one, z) - cplx{0.0, -1.0}) <= 1e-15);

    SpectrumFrame pair{0.0, {-1.0, 1.0}};
    CHECK(std::abs(empirical_stieltjes(pair, z) - cplx{0.0, -0.5}) <= 1e-15);

    // exact bound |G| <= 1/Im z and conjugation symmetry
    SpectrumFrame some{0.0, {-2.1, -0.3, 0.4, 1.7, 3.0}};
    for (double e : {-1.0, 0.2, 2.5}) {
        const cplx w{e, 0.35};
        CHECK(std::abs(empirical_stieltjes(some, w)) <= 1.0 / 0.35 * (1.0 + 1e-15));
        CHECK(std::abs(empirical_stieltjes(some, std::conj(w)) -
                       std::conj(empirical_stieltjes(some, w))) <= 1e-15);
        CHECK(empirical_stieltjes(some, w).imag() < 0.0);
    }
}

TEST_CASE("closed semicircle transform") {
    const cplx g = gsc_closed(cplx{0.0, 2.0}, 1.0);
    CHECK(std::abs(g - cplx{0.0, 1.0 - std::sqrt(2.0)}) <= 1e-14);

    rng::GaussianStream gs(7, rng::stream_id(rng::StreamKind::probe, 0, 70));
    for (int k = 0; k < 1000; ++k) {
        const cplx z{2.5 * gs.next(), 0.05 + std::abs(gs.next())};
        const double d = 0.2 + std::abs(gs.next());
        const cplx root = gsc_closed(z, d);
        CHECK(std::abs(d * d * root * root - z * root + 1.0) <= 1e-12);
        CHECK(root.imag() < 0.0);
        CHECK(std::abs(gsc_closed(std::conj(z), d) - std::conj(root)) <= 1e-13);
    }

    for (const cplx far : {cplx{0.0, 1000.0}, cplx{800.0, 600.0}})
        CHECK(std::abs(gsc_closed(far, 1.0) - 1.0 / far) <= 3e-9);

    CHECK_THROWS_AS(gsc_closed(cplx{1.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("closed marchenko-pastur transform") {
    rng::GaussianStream gs(7, rng::stream_id(rng::StreamKind::probe, 0, 71));
    for (int k = 0; k < 1000; ++k) {
        const cplx z{3.0 * gs.next(), 0.05 + std::abs(gs.next())};
        const double c = 0.1 + std::abs(gs.next());
        const double sigma = 0.3 + std::abs(gs.next());
        const cplx root = gmp_closed(z, c, sigma);
        const double s2 = sigma * sigma;
        CHECK(std::abs(c * z * s2 * root * root - root * (z - s2 * (1.0 - c)) + 1.0) <= 1e-12);
        CHECK(root.imag() < 0.0);
        CHECK(std::abs(gmp_closed(std::conj(z), c, sigma) - std::conj(root)) <= 1e-13);
    }

    const cplx z{2.0, 1.0};
    CHECK(std::abs(gmp_closed(z, 1.0, 1.0) - mp_transform_quadrature(z)) <= 1e-6);

    // zG - 1 decays like mean/z = sigma^2/z
    const cplx far{0.0, 4000.0};
    CHECK(std::abs(far * gmp_closed(far, 0.7, 1.3) - 1.0) <= 2.0 * 1.69 / std::abs(far));
    const cplx very_far{0.0, 4.0e6};
    CHECK(std::abs(very_far * gmp_closed(very_far, 0.7, 1.3) - 1.0) <= 1e-6);
}

TEST_CASE("empirical transform approaches the closed form") {
    EnsembleSpec spec;
    spec.variant = EnsembleVariant::wigner_real;
    spec.n = 512;
    spec.coeffs = coefficient_preset("fbm");
    spec.coeffs_name = "fbm";
    spec.grid = TimeGrid(1.0, 8);
    spec.hurst = HurstParameter(0.75);
    spec.seed = 2025;
    spec.snapshot_nodes = {8};
    const auto series = esd_series(build_wigner_frames(spec));
    for (int j = 0; j <= 12; ++j) {
        const cplx z{-3.0 + 0.5 * j, 0.1};
        CHECK(std::abs(empirical_stieltjes(series.frames[0], z) - gsc_closed(z, 1.0)) <= 0.05);
    }
}

TEST_CASE("field construction and validation") {
    auto grid = window(-2.0, 2.0, 0.25, 0.5, 1.0);
    const auto field = closed_sc_field(grid, fbm_d(grid.times, 0.75));
    validate_field(field);
    CHECK(field.convention == "upper");
    CHECK(field.values.size() == grid.times.size() * static_cast<std::size_t>(grid.n_e));

    auto bad = field;
    bad.values[3] = std::conj(bad.values[3]);
    CHECK_THROWS_AS(validate_field(bad), std::runtime_error);

    ComplexGrid shallow = grid;
    shallow.eta = 0.01;
    CHECK_THROWS_AS(validate_grid(shallow), std::invalid_argument);
    ComplexGrid unsorted = grid;
    std::swap(unsorted.times[0], unsorted.times[1]);
    CHECK_THROWS_AS(validate_grid(unsorted), std::invalid_argument);
}

TEST_CASE("semicircle pde residual and refinement") {
    const double h = 0.75;
    auto coarse = window(-3.0, 3.0, 1.0 / 64, 0.5, 1.5);
    const auto res64 = pde_residual_sc(closed_sc_field(coarse, fbm_d(coarse.times, h)),
                                       fbm_d(coarse.times, h));
    CHECK(res64.max_abs() <= 1e-2);
    CHECK(res64.equation_id == "sc");

    auto fine = window(-3.0, 3.0, 1.0 / 128, 0.5, 1.5);
    const auto res128 = pde_residual_sc(closed_sc_field(fine, fbm_d(fine.times, h)),
                                        fbm_d(fine.times, h));
    const double ratio = res64.max_abs() / res128.max_abs();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);

    // constant d_t: both sides vanish identically
    auto grid = window(-2.0, 2.0, 0.125, 0.5, 1.0);
    const std::vector<double> dconst(grid.times.size(), 0.8);
    CHECK(pde_residual_sc(closed_sc_field(grid, dconst), dconst).max_abs() == 0.0);

    ComplexGrid two = grid;
    two.times.resize(2);
    CHECK_THROWS_AS(pde_residual_sc(closed_sc_field(two, std::vector<double>(2, 1.0)),
                                    std::vector<double>(2, 1.0)),
                    std::domain_error);
}

TEST_CASE("fbm form of the semicircle pde") {
    const double h = 0.75;
    auto coarse = window(-3.0, 3.0, 1.0 / 64, 0.5, 1.5);
    const auto res64 = pde_residual_sc_fbm(closed_sc_field(coarse, fbm_d(coarse.times, h)), h);
    CHECK(res64.max_abs() <= 1e-2);
    CHECK(res64.equation_id == "sc_fbm");

    auto fine = window(-3.0, 3.0, 1.0 / 128, 0.5, 1.5);
    const auto res128 = pde_residual_sc_fbm(closed_sc_field(fine, fbm_d(fine.times, h)), h);
    const double ratio = res64.max_abs() / res128.max_abs();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("burgers time change") {
    const double h = 0.75;
    // evaluate the field at t = u^(1/2H) so the u-grid is uniform
    auto make = [&](double delta) {
        ComplexGrid grid;
        grid.e_min = -3.0;
        grid.e_max = 3.0;
        grid.n_e = static_cast<int>(std::lround(6.0 / delta)) + 1;
        grid.eta = 0.5;
        const int nt = static_cast<int>(std::lround(1.0 / delta));
        for (int i = 0; i <= nt; ++i)
            grid.times.push_back(std::pow(0.5 + delta * i, 1.0 / (2.0 * h)));
        return closed_sc_field(grid, fbm_d(grid.times, h));
    };
    const auto res64 = burgers_check(make(1.0 / 64), h);
    CHECK(res64.max_abs() <= 1e-2);
    CHECK(res64.equation_id == "burgers");
    const auto res128 = burgers_check(make(1.0 / 128), h);
    const double ratio = res64.max_abs() / res128.max_abs();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);
}

TEST_CASE("burgers reduces to the sc equation at H = 1/2") {
    auto grid = window(-2.5, 2.5, 1.0 / 64, 0.5, 1.25);
    const auto field = closed_sc_field(grid, fbm_d(grid.times, 0.5));
    const auto sc = pde_residual_sc(field, fbm_d(grid.times, 0.5));
    const auto bu = burgers_check(field, 0.5);
    REQUIRE(sc.values.size() == bu.values.size());
    for (std::size_t i = 0; i < sc.values.size(); ++i)
        CHECK(std::abs(sc.values[i] - bu.values[i]) <= 1e-10);
}

TEST_CASE("burgers residual direction on a frozen field") {
    auto grid = window(-2.0, 2.0, 0.25, 0.5, 1.0);
    const auto field = make_field(grid, [](double, cplx z) { return gsc_closed(z, 1.0); });
    const auto res = burgers_check(field, 0.75);
    // time derivative vanishes, so the residual is |F dF/dz| exactly
    const double de = 0.25;
    const std::size_t ti = 1;
    const int j = 4;
    const cplx fz = (field.at(ti, j + 1) - field.at(ti, j - 1)) / (2.0 * de);
    CHECK(res.at(ti - 1, j - 1) == doctest::Approx(std::abs(field.at(ti, j) * fz)).epsilon(1e-12));
    CHECK(res.max_abs() > 1e-3);
}

TEST_CASE("marchenko-pastur pde residual") {
    const double h = 0.75, c = 0.5;
    auto coarse = window(0.0625, 4.0, 1.0 / 64, 0.5, 1.5);
    const auto res64 = pde_residual_mp(closed_mp_field(coarse, c, fbm_d(coarse.times, h)),
                                       fbm_d(coarse.times, h), c);
    CHECK(res64.max_abs() <= 2e-2);
    CHECK(res64.equation_id == "mp");

    auto fine = window(0.0625, 4.0, 1.0 / 128, 0.5, 1.5);
    const auto res128 = pde_residual_mp(closed_mp_field(fine, c, fbm_d(fine.times, h)),
                                        fbm_d(fine.times, h), c);
    const double ratio = res64.max_abs() / res128.max_abs();
    CHECK(ratio >= 3.0);
    CHECK(ratio <= 5.0);

    auto grid = window(0.25, 3.0, 0.125, 0.5, 1.0);
    const std::vector<double> dconst(grid.times.size(), 0.9);
    CHECK(pde_residual_mp(closed_mp_field(grid, c, dconst), dconst, c).max_abs() == 0.0);
}

TEST_CASE("mp equation degenerates consistently as c -> 0") {
    const double c = 1e-3, h = 0.75;
    auto grid = window(3.0, 4.0, 1.0 / 64, 0.5, 1.5);
    const auto d = fbm_d(grid.times, h);
    // c = 0 limit of the MP field: a point mass at d_t^2
    std::size_t row = 0;
    StieltjesField field;
    field.grid = grid;
    field.values.resize(grid.times.size() * grid.n_e);
    for (std::size_t i = 0; i < grid.times.size(); ++i)
        for (int j = 0; j < grid.n_e; ++j, ++row)
            field.values[row] = 1.0 / (grid.z(j) - d[i] * d[i]);
    CHECK(pde_residual_mp(field, d, c).max_abs() <= 10.0 * c);
}

TEST_CASE("gamma enumeration for the two-point kernel") {
    const auto kernel = enumerate_gamma(spec_index_set(), 1.0);
    CHECK(kernel.gamma.at({0, 0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(kernel.gamma.at({0, 1}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel.gamma.at({0, -1}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel.gamma.at({1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel.gamma.at({-1, 0}) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_FALSE(kernel.raw_transpose_symmetric);
    CHECK(kernel.max_raw_asymmetry == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(kernel.window_radius == 1);

    // scaling d_t^2 and the hand-enumerated example values
    const auto scaled = enumerate_gamma(spec_index_set(), std::pow(0.7, 0.75));
    const double d2 = std::pow(0.7, 1.5);
    CHECK(scaled.gamma.at({0, 0}) == doctest::Approx(2.0 * d2).epsilon(1e-14));
    CHECK(scaled.gamma.at({0, 1}) == doctest::Approx(d2).epsilon(1e-14));

    const auto diag = enumerate_gamma({{{0, 0}, 1.0}, {{1, 1}, 0.8}}, 1.0);
    CHECK(diag.raw_transpose_symmetric);
    CHECK(diag.max_raw_asymmetry == 0.0);
    CHECK(diag.gamma.at({1, 1}) == doctest::Approx(0.8).epsilon(1e-14));

    // f is real and matches the symbol for transpose-symmetric kernels
    for (double x : {0.1, 0.37})
        for (double y : {0.0, 0.63}) {
            const double direct = diag.f(x, y);
            CHECK(std::isfinite(direct));
            CHECK(direct ==
                  doctest::Approx(diag.symbol(-2.0 * M_PI * x, -2.0 * M_PI * y)).epsilon(1e-12));
        }
}

TEST_CASE("fixed point with zero kernel") {
    const auto kernel = enumerate_gamma({{{0, 0}, 0.0}}, 1.0);
    const cplx z{0.4, 0.9};
    const auto res = dependent_fixed_point(kernel, z);
    CHECK(res.converged);
    CHECK(res.iterations <= 2);
    CHECK(std::abs(res.s - (-1.0 / z)) <= 1e-14);
    for (cplx h : res.h) CHECK(std::abs(h - (-1.0 / z)) <= 1e-14);
}

TEST_CASE("constant kernel reduces to the semicircle quadratic") {
    const auto kernel = enumerate_gamma({{{0, 0}, 1.0}}, 1.0);
    const cplx z{0.0, 2.0};
    const auto res = dependent_fixed_point(kernel, z);
    CHECK(res.converged);
    CHECK(res.iterations <= 500);
    CHECK(std::abs(res.s - cplx{0.0, std::sqrt(2.0) - 1.0}) <= 1e-8);
    CHECK(res.s.imag() > 0.0);
    // documented convention map G = -S lands on the closed semicircle root
    CHECK(std::abs(-res.s - gsc_closed(z, 1.0)) <= 1e-8);

    const auto mirror = dependent_fixed_point_mirror(kernel, z);
    CHECK(std::abs(mirror.s - res.s) <= 1e-8);
}

TEST_CASE("plus sign solves a different quadratic") {
    const auto kernel = enumerate_gamma({{{0, 0}, 1.0}}, 1.0);
    FixedPointConfig cfg;
    cfg.sign = SignConvention::plus;
    const cplx z{0.0, 3.0};
    const auto res = dependent_fixed_point(kernel, z, cfg);
    CHECK(res.converged);
    // S^2 - zS - 1 = 0 root i(3 - sqrt 5)/2, not a semicircle transform image
    CHECK(std::abs(res.s - cplx{0.0, 0.5 * (3.0 - std::sqrt(5.0))}) <= 1e-8);
    CHECK(std::abs(-res.s - gsc_closed(z, 1.0)) > 0.05);
    CHECK(std::abs(res.s - gsc_closed(z, 1.0)) > 0.05);
}

TEST_CASE("plus sign stalls where the damped map turns marginal") {
    const auto kernel = enumerate_gamma({{{0, 0}, 1.0}}, 1.0);
    FixedPointConfig cfg;
    cfg.sign = SignConvention::plus;
    cfg.max_iter = 300;
    try {
        dependent_fixed_point(kernel, cplx{0.0, 2.0}, cfg);
        FAIL("expected FixedPointError");
    } catch (const FixedPointError& err) {
        CHECK(err.iterations == 300);
        CHECK(err.last_residual > cfg.tol);
        CHECK(std::string(err.what()).find("did not converge") != std::string::npos);
    }
}

TEST_CASE("stability contract for damped self-consistent iteration") {
    rng::GaussianStream gs(5, rng::stream_id(rng::StreamKind::probe, 0, 72));
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<IndexTerm> terms;
        for (int r1 = -1; r1 <= 1; ++r1)
            for (int r2 = -1; r2 <= 1; ++r2)
                if (std::abs(gs.next()) > 0.8) terms.push_back({{r1, r2}, gs.next()});
        if (terms.empty()) terms.push_back({{0, 0}, gs.next()});
        auto kernel = enumerate_gamma(terms, 1.0);
        const double total = kernel.gamma_abs_sum();
        if (total > 4.0) {
            for (auto& term : terms) term.a *= std::sqrt(4.0 / total);
            kernel = enumerate_gamma(terms, 1.0);
        }
        CHECK(kernel.gamma_abs_sum() <= 4.0 + 1e-9);
        for (const cplx z : {cplx{0.0, 0.5}, cplx{1.0, 0.5}, cplx{-2.0, 0.7}}) {
            // the mirror form is built from the raw |phi|^2 symbol, so it is
            // well-posed for every index set
            const auto mres = dependent_fixed_point_mirror(kernel, z);
            CHECK(mres.converged);
            CHECK(mres.iterations <= 500);
            CHECK(mres.s.imag() > 0.0);
            CHECK(std::abs(mres.s) <= 1.0 / z.imag() + 1e-9);

            // the scalar equation is only guaranteed when symmetrizing the
            // lags kept the kernel positive definite; elsewhere a failure
            // must be reported, never silent
            if (kernel.raw_transpose_symmetric) {
                const auto res = dependent_fixed_point(kernel, z);
                CHECK(res.converged);
                CHECK(res.iterations <= 500);
                CHECK(res.s.imag() > 0.0);
                CHECK(std::abs(res.s) <= 1.0 / z.imag() + 1e-9);
            } else {
                try {
                    const auto res = dependent_fixed_point(kernel, z);
                    CHECK(res.converged);
                    CHECK(std::abs(res.s) <= 1.0 / z.imag() + 1e-9);
                } catch (const FixedPointError& err) {
                    CHECK(err.last_residual > 0.0);
                }
            }
        }
    }
}

TEST_CASE("mirror solver matches the scalar one on transpose-symmetric kernels") {
    const auto kernel = enumerate_gamma({{{0, 0}, 1.0}, {{1, 1}, 0.8}}, 0.9);
    for (const cplx z : {cplx{0.0, 0.6}, cplx{1.3, 0.5}, cplx{-0.7, 1.1}}) {
        const auto scalar = dependent_fixed_point(kernel, z);
        const auto mirror = dependent_fixed_point_mirror(kernel, z);
        CHECK(std::abs(scalar.s - mirror.s) <= 1e-8);
        CHECK(mirror.iterations <= 500);
    }
}

TEST_CASE("mirror fixed point tracks the dependent ensemble") {
    EnsembleSpec spec;
    spec.variant = EnsembleVariant::dependent;
    spec.n = 256;
    spec.index_set = spec_index_set();
    spec.coeffs = coefficient_preset("fbm");
    spec.coeffs_name = "fbm";
    spec.grid = TimeGrid(1.0, 8);
    spec.hurst = HurstParameter(0.75);
    spec.seed = 414;
    spec.snapshot_nodes = {8};
    const auto series = esd_series(build_dependent_frames(spec));
    const auto kernel = enumerate_gamma(spec.index_set, 1.0);

    std::vector<cplx> zs;
    for (int j = 0; j <= 16; ++j) zs.push_back({-4.0 + 0.5 * j, 0.5});
    const auto solved = fixed_point_grid(kernel, zs, {}, true);

    double gap_mirror = 0.0, gap_scalar = 0.0;
    bool scalar_ok = true;
    std::vector<FixedPointResult> scalar;
    try {
        scalar = fixed_point_grid(kernel, zs, {}, false);
    } catch (const FixedPointError&) {
        scalar_ok = false;
    }
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const cplx emp = -empirical_stieltjes(series.frames[0], zs[i]);
        CHECK(solved[i].converged);
        CHECK(solved[i].iterations <= 500);
        CHECK(solved[i].s.imag() > 0.0);
        gap_mirror = std::max(gap_mirror, std::abs(solved[i].s - emp));
        if (scalar_ok) gap_scalar = std::max(gap_scalar, std::abs(scalar[i].s - emp));
    }
    CHECK(gap_mirror <= 0.05);
    // the literal scalar equation misses the mirrored covariance structure
    if (scalar_ok) CHECK(gap_scalar > gap_mirror);

    const auto rerun = fixed_point_grid(kernel, zs, {}, true, 1);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        CHECK(rerun[i].s.real() == solved[i].s.real());
        CHECK(rerun[i].s.imag() == solved[i].s.imag());
    }
}

TEST_CASE("grid solve propagates the diagnostic error") {
    const auto kernel = enumerate_gamma({{{0, 0}, 1.0}}, 1.0);
    FixedPointConfig cfg;
    cfg.sign = SignConvention::plus;
    cfg.max_iter = 50;
    const std::vector<cplx> zs{{0.0, 2.0}, {0.5, 2.0}};
    CHECK_THROWS_AS(fixed_point_grid(kernel, zs, cfg, false, 2), FixedPointError);
}

TEST_CASE("fixed point rejects bad inputs") {
    const auto kernel = enumerate_gamma(spec_index_set(), 1.0);
    CHECK_THROWS_AS(dependent_fixed_point(kernel, cplx{0.0, 0.01}), std::invalid_argument);
    FixedPointConfig bad;
    bad.damping = 0.0;
    CHECK_THROWS_AS(dependent_fixed_point(kernel, cplx{0.0, 1.0}, bad), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_gamma({}, 1.0), std::invalid_argument);
}

TEST_CASE("csv writers emit the declared schemas") {
    ComplexGrid grid;
    grid.e_min = 0.0;
    grid.e_max = 1.0;
    grid.n_e = 2;
    grid.eta = 0.5;
    grid.times = {1.0};
    const auto field = closed_sc_field(grid, {1.0});
    write_field_csv(field, "/tmp/sf_field_test.csv");
    std::FILE* f = std::fopen("/tmp/sf_field_test.csv", "rb");
    REQUIRE(f);
    char line[160];
    REQUIRE(std::fgets(line, sizeof(line), f));
    CHECK(std::string(line) == "t,re_z,im_z,re_G,im_G,convention\n");
    REQUIRE(std::fgets(line, sizeof(line), f));
    std::string row(line);
    CHECK(row.find("1,0,0.5,") == 0);
    CHECK(row.find(",upper\n") != std::string::npos);
    std::fclose(f);
    std::remove("/tmp/sf_field_test.csv");

    ResidualField res;
    res.times = {0.5};
    res.energies = {-1.0, 1.0};
    res.eta = 0.5;
    res.values = {0.25, 0.125};
    res.equation_id = "sc";
    write_residual_csv(res, "/tmp/sf_residual_test.csv");
    f = std::fopen("/tmp/sf_residual_test.csv", "rb");
    REQUIRE(f);
    REQUIRE(std::fgets(line, sizeof(line), f));
    CHECK(std::string(line) == "t,re_z,residual,equation_id\n");
    REQUIRE(std::fgets(line, sizeof(line), f));
    CHECK(std::string(line) == "0.5,-1,0.25,sc\n");
    std::fclose(f);
    std::remove("/tmp/sf_residual_test.csv");
}
