#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "asnm/numeric.hpp"
#include "asnm/rng.hpp"
#include "oracles.hpp"

using namespace asnm;

namespace {

std::vector<double> random_sizes(Rng& rng, std::size_t n) {
    std::vector<double> s(n);
    for (auto& v : s) v = 40.0 + static_cast<double>(rng.below(1461));
    return s;
}

}  // namespace

TEST_CASE("fft_gonio on known spectra") {
    const std::vector<double> constant = {5, 5, 5, 5};
    CHECK(fft_gonio(constant, 1).module == 0.0);
    CHECK(fft_gonio(constant, 0).module == doctest::Approx(20));
    const std::vector<double> impulse = {1, 0, 0, 0};
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(fft_gonio(impulse, k).module == doctest::Approx(1));
        CHECK(fft_gonio(impulse, k).angle == 0.0);
    }
    CHECK(fft_gonio(std::vector<double>{1, 2}, 5).module == 0.0);
    // x_j = cos(2 pi j / 8) has X_1 = N / 2 at angle 0.
    std::vector<double> wave(8);
    for (std::size_t j = 0; j < 8; ++j) wave[j] = std::cos(2 * std::numbers::pi * j / 8.0);
    CHECK(fft_gonio(wave, 1).module == doctest::Approx(4));
    CHECK(std::abs(fft_gonio(wave, 1).angle) < 1e-9);
}

TEST_CASE("fft_gonio matches the direct DFT") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_sizes(rng, 16);
        for (std::size_t k : {0u, 1u, 9u}) {
            const auto got = fft_gonio(s, k);
            const auto want = oracle::dft(s, k);
            CHECK(oracle::close(got.module, want.module, 1e-9L));
            CHECK(oracle::close_angle(got.angle, want.angle, 1e-9L * std::numbers::pi));
        }
    }
}

TEST_CASE("poly_fit_index recovers exact polynomials") {
    std::vector<double> line(20);
    for (std::size_t j = 0; j < line.size(); ++j) line[j] = 2.0 + 3.0 * static_cast<double>(j);
    CHECK(poly_fit_index(line, 3, 0) == doctest::Approx(2).epsilon(1e-6));
    CHECK(poly_fit_index(line, 3, 1) == doctest::Approx(3).epsilon(1e-6));
    CHECK(std::abs(poly_fit_index(line, 3, 2)) < 1e-6);
    CHECK(std::abs(poly_fit_index(line, 3, 3)) < 1e-6);

    const std::vector<double> flat(12, 7.5);
    for (int order : {3, 13}) {
        CHECK(poly_fit_index(flat, order, 0) == doctest::Approx(7.5).epsilon(1e-6));
        CHECK(std::abs(poly_fit_index(flat, order, order)) < 1e-6);
    }
    CHECK(poly_fit_index(std::vector<double>{}, 3, 3) == 0.0);
    CHECK_THROWS(poly_fit_index(flat, 3, 4));
}

TEST_CASE("two independent least squares solvers agree with each other") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_sizes(rng, 40);
        const auto a = oracle::poly_fit_orthogonal(s, 13);
        const auto b = oracle::poly_fit_normal(s, 13);
        CHECK(oracle::close(a[13], b[13], 1e-6L));
    }
}

TEST_CASE("poly_fit_index matches the reference solvers") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto s = random_sizes(rng, 40);
        const auto ortho3 = oracle::poly_fit_orthogonal(s, 3);
        const auto normal3 = oracle::poly_fit_normal(s, 3);
        for (int k = 0; k <= 3; ++k) {
            const double got = poly_fit_index(s, 3, k);
            CHECK(oracle::close(got, ortho3[k], 1e-4L));
            CHECK(oracle::close(got, normal3[k], 1e-4L));
        }
        const auto ortho13 = oracle::poly_fit_orthogonal(s, 13);
        const auto normal13 = oracle::poly_fit_normal(s, 13);
        const double got = poly_fit_index(s, 13, 13);
        CHECK(oracle::close(got, ortho13[13], 1e-4L));
        CHECK(oracle::close(got, normal13[13], 1e-4L));
    }
}

TEST_CASE("underdetermined fits use the damped minimum-norm solution") {
    Rng rng(8);
    for (std::size_t n = 1; n <= 13; ++n) {
        const auto s = random_sizes(rng, n);
        const auto ref = oracle::poly_fit_orthogonal(s, 13);
        const double got = poly_fit_index(s, 13, 13);
        CHECK(std::isfinite(got));
        CHECK(oracle::close(got, ref[13], 1e-6L, 1e-15L));
    }
}

TEST_CASE("gauss_products_8") {
    CHECK(gauss_products_8(std::vector<double>{}) == std::array<double, 8>{});
    // With eight packets each slice holds one packet evaluated at its centre.
    const auto single = gauss_products_8(std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6});
    for (double v : single) CHECK(v == doctest::Approx(1.0));
    const auto flat = gauss_products_8(std::vector<double>(32, 100.0));
    for (double v : flat) CHECK(v == doctest::Approx(flat[0]).epsilon(1e-9));
    // Fewer packets than slices leave some slices empty.
    const auto sparse = gauss_products_8(std::vector<double>{10, 20, 30});
    int empty = 0;
    for (double v : sparse) empty += v == 0.0;
    CHECK(empty == 5);
}
