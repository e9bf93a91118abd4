#include <algorithm>
#include <cmath>

#include "asnm/classifiers.hpp"

namespace asnm {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

int class_index(Label l) { return l == Label::Intrusion ? 0 : 1; }

void fit_priors(bool laplace, const Samples& data, double (&log_prior)[2]) {
    const double n = static_cast<double>(data.size());
    for (int c = 0; c < 2; ++c) {
        const double nc = static_cast<double>(data.count(c == 0 ? Label::Intrusion : Label::Legitimate));
        log_prior[c] = laplace ? std::log((nc + 1.0) / (n + 2.0)) : std::log(nc / n);
    }
}

std::vector<std::vector<double>> standardised(const Standardizer& z, const Samples& data) {
    std::vector<std::vector<double>> out;
    out.reserve(data.size());
    for (const auto& row : data.x) out.push_back(z.apply(row));
    return out;
}

double log_sum_exp(const std::vector<double>& v) {
    double m = -INFINITY;
    for (double x : v) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

GaussianNbModel train_gaussian_nb(const HyperParams& p, const Samples& data) {
    GaussianNbModel m;
    m.scaler = Standardizer::fit(data);
    fit_priors(p.laplace, data, m.log_prior);
    const auto z = standardised(m.scaler, data);
    const std::size_t d = data.dims();

    // Global variance of each standardised feature, for the floor.
    std::vector<double> gmean(d, 0.0), gvar(d, 0.0);
    for (const auto& row : z) {
        for (std::size_t f = 0; f < d; ++f) gmean[f] += row[f];
    }
    for (auto& g : gmean) g /= static_cast<double>(z.size());
    for (const auto& row : z) {
        for (std::size_t f = 0; f < d; ++f) gvar[f] += (row[f] - gmean[f]) * (row[f] - gmean[f]);
    }
    for (auto& g : gvar) g /= static_cast<double>(z.size());

    for (int c = 0; c < 2; ++c) {
        m.mean[c].assign(d, 0.0);
        m.var[c].assign(d, 0.0);
        double nc = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (class_index(data.y[i]) != c) continue;
            nc += 1.0;
            for (std::size_t f = 0; f < d; ++f) m.mean[c][f] += z[i][f];
        }
        for (auto& v : m.mean[c]) v /= nc;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (class_index(data.y[i]) != c) continue;
            for (std::size_t f = 0; f < d; ++f) {
                const double t = z[i][f] - m.mean[c][f];
                m.var[c][f] += t * t;
            }
        }
        for (std::size_t f = 0; f < d; ++f) {
            m.var[c][f] = std::max(m.var[c][f] / nc, 1e-9 * gvar[f] + 1e-12);
        }
    }
    return m;
}

std::array<double, 2> nb_log_joint(const GaussianNbModel& m, std::span<const double> x) {
    const auto z = m.scaler.apply(x);
    std::array<double, 2> lj{m.log_prior[0], m.log_prior[1]};
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < z.size(); ++f) {
            const double t = z[f] - m.mean[c][f];
            lj[c] += -0.5 * t * t / m.var[c][f] - 0.5 * std::log(m.var[c][f]) - kLogSqrt2Pi;
        }
    }
    return lj;
}

KdeNbModel train_kde_nb(const HyperParams& p, const Samples& data) {
    KdeNbModel m;
    m.scaler = Standardizer::fit(data);
    fit_priors(p.laplace, data, m.log_prior);
    m.bandwidth = p.bandwidth;
    const auto z = standardised(m.scaler, data);
    const std::size_t d = data.dims();
    for (int c = 0; c < 2; ++c) {
        m.points[c].assign(d, {});
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (class_index(data.y[i]) != c) continue;
            for (std::size_t f = 0; f < d; ++f) m.points[c][f].push_back(z[i][f]);
        }
        for (auto& pts : m.points[c]) std::sort(pts.begin(), pts.end());
    }
    return m;
}

namespace {

// log of mean_i N(x; p_i, h^2). Kernels more than 12h beyond the nearest
// point contribute < e^-72 relative to it and are skipped.
double kde_log_density(const std::vector<double>& pts, double h, double x) {
    const auto near = std::lower_bound(pts.begin(), pts.end(), x);
    double dmin = INFINITY;
    if (near != pts.end()) dmin = *near - x;
    if (near != pts.begin()) dmin = std::min(dmin, x - *(near - 1));
    const double reach = dmin + 12.0 * h;
    auto lo = std::lower_bound(pts.begin(), pts.end(), x - reach);
    auto hi = std::upper_bound(pts.begin(), pts.end(), x + reach);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(hi - lo));
    for (auto it = lo; it != hi; ++it) {
        const double t = (x - *it) / h;
        terms.push_back(-0.5 * t * t);
    }
    return log_sum_exp(terms) - std::log(static_cast<double>(pts.size())) - std::log(h) -
           kLogSqrt2Pi;
}

}  // namespace

std::array<double, 2> nb_log_joint(const KdeNbModel& m, std::span<const double> x) {
    const auto z = m.scaler.apply(x);
    std::array<double, 2> lj{m.log_prior[0], m.log_prior[1]};
    for (int c = 0; c < 2; ++c) {
        for (std::size_t f = 0; f < z.size(); ++f) {
            lj[c] += kde_log_density(m.points[c][f], m.bandwidth, z[f]);
        }
    }
    return lj;
}

}  // namespace asnm
