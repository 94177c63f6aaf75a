#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "spectralflow/fractional_noise.hpp"

using namespace spectralflow;

namespace {

// Sample covariance of increments (k,l) over a batch, plus its MC std error.
struct CovEst {
    double cov;
    double stderr_;
};

CovEst increment_cov(const GaussianPathBatch& batch, int k, int l) {
    const std::int64_t n = batch.count;
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double* p = batch.path(i);
        const double prod = p[k + 1] * p[l + 1];
        s1 += prod;
        s2 += prod * prod;
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    return {mean, std::sqrt(var / n)};
}

}  // namespace

TEST_CASE("fbm covariance closed form") {
    HurstParameter h07(0.7), h05(0.5, true), h075(0.75);
    CHECK(fbm_covariance(1.0, 1.0, h07) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fbm_covariance(1.0, 2.0, h05) == doctest::Approx(1.0).epsilon(1e-14));
    // H=0.75: (1 + 2^1.5 - 1)/2 = sqrt(2)
    CHECK(fbm_covariance(1.0, 2.0, h075) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(fbm_covariance(2.0, 1.0, h075) == fbm_covariance(1.0, 2.0, h075));
    CHECK_THROWS_AS(fbm_covariance(-1.0, 1.0, h075), std::domain_error);
}

TEST_CASE("hurst parameter domain") {
    CHECK_THROWS_AS(HurstParameter(0.5), std::domain_error);
    CHECK_THROWS_AS(HurstParameter(1.0), std::domain_error);
    CHECK_THROWS_AS(HurstParameter(0.3), std::domain_error);
    CHECK_NOTHROW(HurstParameter(0.5, true));
    CHECK_NOTHROW(HurstParameter(0.75));
}

TEST_CASE("brownian increments are white") {
    TimeGrid grid(1.0, 8);
    HurstParameter h(0.5, true);
    auto batch = generate_fgn(grid, h, 100000, 11);
    const double dt = grid.dt();
    for (int k = 0; k < 8; ++k) {
        for (int l = 0; l <= k; ++l) {
            const auto est = increment_cov(batch, k, l);
            const double target = (k == l) ? dt : 0.0;
            CHECK(std::abs(est.cov - target) < 4.0 * est.stderr_);
        }
    }
}

TEST_CASE("fgn increment covariance matches the analytic kernel") {
    TimeGrid grid(1.0, 8);
    HurstParameter h(0.75);
    auto batch = generate_fgn(grid, h, 100000, 5);
    for (int k = 0; k < 8; ++k) {
        for (int l = 0; l <= k; ++l) {
            const auto est = increment_cov(batch, k, l);
            const double target = fgn_increment_covariance(grid, h, k, l);
            CHECK(std::abs(est.cov - target) < 4.0 * est.stderr_);
        }
    }
}

TEST_CASE("worker count never changes output") {
    TimeGrid grid(1.0, 16);
    HurstParameter h(0.6);
    auto one = generate_fgn(grid, h, 64, 99, {}, 1);
    auto eight = generate_fgn(grid, h, 64, 99, {}, 8);
    REQUIRE(one.values.size() == eight.values.size());
    for (std::size_t i = 0; i < one.values.size(); ++i) CHECK(one.values[i] == eight.values[i]);
}

TEST_CASE("fbm paths start at zero and hit the right variance") {
    TimeGrid grid(2.0, 256);
    HurstParameter h(0.75);
    auto batch = generate_fbm(grid, h, 100000, 3);
    double v1 = 0.0, c12 = 0.0;
    const int k1 = 128, k2 = 256;  // t = 1 and t = 2
    for (std::int64_t i = 0; i < batch.count; ++i) {
        const double* p = batch.path(i);
        REQUIRE(p[0] == 0.0);
        v1 += p[k1] * p[k1];
        c12 += p[k1] * p[k2];
    }
    v1 /= batch.count;
    c12 /= batch.count;
    // Var B_1 = 1, Cov(B_1, B_2) = sqrt(2); 4-sigma MC bands (var of products ~ 2, ~3.8)
    CHECK(std::abs(v1 - 1.0) < 4.0 * std::sqrt(2.0 / batch.count));
    CHECK(std::abs(c12 - std::sqrt(2.0)) < 4.0 * std::sqrt(4.0 / batch.count));
}

TEST_CASE("cholesky oracle agrees with circulant embedding in law") {
    TimeGrid grid(1.0, 16);
    HurstParameter h(0.8);
    const std::int64_t n = 40000;
    auto a = generate_fgn(grid, h, n, 17);
    auto b = generate_fgn_cholesky(grid, h, n, 31);
    for (int k = 0; k < 16; k += 3) {
        for (int l = 0; l <= k; l += 3) {
            const auto ea = increment_cov(a, k, l);
            const auto eb = increment_cov(b, k, l);
            const double pooled = std::sqrt(ea.stderr_ * ea.stderr_ + eb.stderr_ * eb.stderr_);
            CHECK(std::abs(ea.cov - eb.cov) < 4.0 * pooled);
        }
    }
}

TEST_CASE("hosking fallback samples the same law") {
    TimeGrid grid(1.0, 12);
    HurstParameter h(0.7);
    FgnOptions hosking;
    hosking.force_hosking = true;
    auto a = generate_fgn(grid, h, 40000, 23, hosking);
    for (int k = 0; k < 12; k += 2) {
        for (int l = 0; l <= k; l += 4) {
            const auto est = increment_cov(a, k, l);
            const double target = fgn_increment_covariance(grid, h, k, l);
            CHECK(std::abs(est.cov - target) < 4.0 * est.stderr_);
        }
    }
}

TEST_CASE("embedded spectrum is nonnegative for H in (1/2,1)") {
    for (double hv : {0.55, 0.65, 0.75, 0.85, 0.95}) {
        HurstParameter h(hv);
        auto lambda = circulant_spectrum(TimeGrid(1.0, 128), h);
        double max_l = 0.0;
        for (double v : lambda) max_l = std::max(max_l, v);
        for (double v : lambda) CHECK(v >= -1e-10 * max_l);
    }
}

TEST_CASE("holder quotient is grid-stable (Fernique proxy)") {
    HurstParameter h(0.75);
    const double beta = h.value() - 0.05;
    auto p99 = [&](int steps) {
        TimeGrid grid(1.0, steps);
        auto batch = generate_fbm(grid, h, 400, 77);
        std::vector<double> quot(static_cast<std::size_t>(batch.count));
        for (std::int64_t i = 0; i < batch.count; ++i) {
            const double* p = batch.path(i);
            double q = 0.0;
            // dyadic separations keep this O(M log M)
            for (int sep = 1; sep <= steps; sep *= 2) {
                const double denom = std::pow(sep * grid.dt(), beta);
                for (int k = 0; k + sep <= steps; ++k)
                    q = std::max(q, std::abs(p[k + sep] - p[k]) / denom);
            }
            quot[static_cast<std::size_t>(i)] = q;
        }
        std::sort(quot.begin(), quot.end());
        return quot[static_cast<std::size_t>(0.99 * quot.size())];
    };
    const double a = p99(512), b = p99(1024);
    CHECK(std::abs(b - a) / a < 0.25);
}

TEST_CASE("path dumps round-trip") {
    TimeGrid grid(1.0, 4);
    HurstParameter h(0.75);
    auto batch = generate_fbm(grid, h, 3, 1);
    const auto dir = std::filesystem::temp_directory_path();
    const auto csv = (dir / "sf_paths_test.csv").string();
    const auto bin = (dir / "sf_paths_test.fbmp").string();
    write_paths_csv(batch, csv);
    write_paths_binary(batch, bin);

    // binary: header magic/version/count/nodes then 3*5 doubles
    std::FILE* f = std::fopen(bin.c_str(), "rb");
    REQUIRE(f != nullptr);
    char header[32];
    REQUIRE(std::fread(header, 1, 32, f) == 32);
    CHECK(std::string(header, 4) == "FBMP");
    std::uint64_t count = 0, nodes = 0;
    std::memcpy(&count, header + 8, 8);
    std::memcpy(&nodes, header + 16, 8);
    CHECK(count == 3);
    CHECK(nodes == 5);
    std::vector<double> vals(15);
    REQUIRE(std::fread(vals.data(), sizeof(double), 15, f) == 15);
    std::fclose(f);
    for (std::size_t i = 0; i < vals.size(); ++i) CHECK(vals[i] == batch.values[i]);
    std::filesystem::remove(csv);
    std::filesystem::remove(bin);
}
