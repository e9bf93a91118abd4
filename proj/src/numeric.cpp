#include "asnm/numeric.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "asnm/error.hpp"

namespace asnm {

Gonio fft_gonio(std::span<const double> series, std::size_t k) {
    const std::size_t n = series.size();
    if (n < k + 1) return {};
    double re = 0.0;
    double im = 0.0;
    double l1 = 0.0;
    const double step = 2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        // Reduce j*k mod N in integers so the twiddle argument stays small.
        const double theta = step * static_cast<double>((j * k) % n);
        re += series[j] * std::cos(theta);
        im -= series[j] * std::sin(theta);
        l1 += std::abs(series[j]);
    }
    const double module = std::hypot(re, im);
    if (module <= 1e-9 * l1) return {};
    return {module, std::atan2(im, re)};
}

double poly_fit_index(std::span<const double> series, int order, int coefficient_index) {
    if (order < 0 || coefficient_index < 0 || coefficient_index > order) {
        throw Error(Errc::InvalidConfig, "polynomial coefficient index out of range");
    }
    const auto n = static_cast<Eigen::Index>(series.size());
    if (n == 0) return 0.0;
    const Eigen::Index cols = order + 1;
    const double mid = static_cast<double>(n - 1) / 2.0;
    const double h = std::max(1.0, mid);

    Eigen::MatrixXd a(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double t = (static_cast<double>(j) - mid) / h;
        double p = 1.0;
        for (Eigen::Index m = 0; m < cols; ++m) {
            a(j, m) = p;
            p *= t;
        }
        y(j) = series[static_cast<std::size_t>(j)];
    }

    Eigen::VectorXd coef;
    if (n > order) {
        coef = a.colPivHouseholderQr().solve(y);
    } else {
        Eigen::MatrixXd gram = a * a.transpose();
        gram.diagonal().array() += kPolyRidge;
        coef = a.transpose() * gram.ldlt().solve(y);
    }

    // c_k = sum_{m>=k} a_m h^-m C(m,k) (-mid)^(m-k)
    const int k = coefficient_index;
    double result = 0.0;
    double binom = 1.0;  // C(m, k), starting at m = k
    for (int m = k; m <= order; ++m) {
        if (m > k) binom = binom * m / (m - k);
        result += coef(m) * std::pow(h, -m) * binom * std::pow(-mid, m - k);
    }
    return result;
}

std::array<double, 8> gauss_products_8(std::span<const double> series) {
    std::array<double, 8> out{};
    const std::size_t n = series.size();
    for (std::size_t s = 0; s < 8; ++s) {
        const std::size_t lo = s * n / 8;
        const std::size_t hi = (s + 1) * n / 8;
        if (hi <= lo) continue;
        const double center = (static_cast<double>(lo) + static_cast<double>(hi) - 1.0) / 2.0;
        const double sigma = std::max(1.0, static_cast<double>(hi - lo) / 4.0);
        double weighted = 0.0;
        double total = 0.0;
        for (std::size_t j = lo; j < hi; ++j) {
            const double d = (static_cast<double>(j) - center) / sigma;
            weighted += series[j] * std::exp(-0.5 * d * d);
            total += series[j];
        }
        out[s] = total == 0.0 ? 0.0 : weighted / total;
    }
    return out;
}

}  // namespace asnm
