#pragma once

#include <array>
#include <span>

namespace asnm {

struct Gonio {
    double module = 0.0;
    double angle = 0.0;
};

/// Coefficient `k` of the DFT X_k = sum_j s_j exp(-2 pi i j k / N) in polar
/// form. Series shorter than k + 1 give (0, 0); coefficients whose module is
/// below 1e-9 of the series' L1 norm are snapped to (0, 0) so that the angle
/// of a vanishing coefficient is not rounding noise.
Gonio fft_gonio(std::span<const double> series, std::size_t k);

/// Least-squares polynomial fit y_j ~ sum_m c_m j^m over j = 0..N-1, returning
/// c_{coefficient_index}. The fit is solved in the centred variable
/// t = (j - mid) / h, mid = (N-1)/2, h = max(1, mid), and mapped back to the
/// index domain. When N <= order the system is solved with ridge damping
/// lambda = 1e-8 in the centred variable. An empty series gives 0.
double poly_fit_index(std::span<const double> series, int order, int coefficient_index);

inline constexpr double kPolyRidge = 1e-8;

/// Eight size-normalised Gaussian slice products. Slice s covers indices
/// [floor(s N / 8), floor((s+1) N / 8)); its unit-height Gaussian is centred
/// at the slice midpoint with sigma = max(1, width / 4). Empty or zero-sum
/// slices give 0.
std::array<double, 8> gauss_products_8(std::span<const double> series);

}  // namespace asnm
