#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <unordered_map>

#include "asnm/classifiers.hpp"

namespace asnm {

namespace {

constexpr double kEps = 1e-3;
constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double s = 0.0;
    for (std::size_t f = 0; f < a.size(); ++f) {
        const double t = a[f] - b[f];
        s += t * t;
    }
    return std::exp(-gamma * s);
}

// Kernel rows computed on demand, least recently used evicted first.
class KernelCache {
public:
    KernelCache(const std::vector<std::vector<double>>& z, double gamma)
        : z_(z), gamma_(gamma),
          capacity_(std::max<std::size_t>(2, kCacheBytes / (sizeof(double) * std::max<std::size_t>(1, z.size())))) {}

    const std::vector<double>& row(std::size_t i) {
        auto it = rows_.find(i);
        if (it != rows_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
        if (rows_.size() >= capacity_) {
            rows_.erase(lru_.back());
            lru_.pop_back();
        }
        std::vector<double> r(z_.size());
        for (std::size_t j = 0; j < z_.size(); ++j) r[j] = rbf(z_[i], z_[j], gamma_);
        lru_.push_front(i);
        auto [pos, ok] = rows_.emplace(i, std::make_pair(std::move(r), lru_.begin()));
        return pos->second.first;
    }

private:
    const std::vector<std::vector<double>>& z_;
    double gamma_;
    std::size_t capacity_;
    std::list<std::size_t> lru_;
    std::unordered_map<std::size_t, std::pair<std::vector<double>, std::list<std::size_t>::iterator>> rows_;
};

}  // namespace

// Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
// Working-set selection uses second-order information.
SvmModel train_svm(const HyperParams& p, const Samples& data) {
    SvmModel m;
    m.scaler = Standardizer::fit(data);
    m.gamma = p.gamma;
    m.c = p.c;
    const std::size_t n = data.size();
    std::vector<std::vector<double>> z;
    z.reserve(n);
    for (const auto& row : data.x) z.push_back(m.scaler.apply(row));
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.y[i] == Label::Intrusion ? 1.0 : -1.0;

    const double c = p.c;
    std::vector<double> alpha(n, 0.0), grad(n, -1.0);
    KernelCache cache(z, p.gamma);
    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
    constexpr double kInf = std::numeric_limits<double>::infinity();

    const std::size_t max_iter = std::max<std::size_t>(10'000'000, 100 * n);
    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        double gmax = -kInf;
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
            } else {
                if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
            }
        }
        if (i == n) break;
        const std::vector<double> ki = cache.row(i);
        double gmax2 = -kInf;
        double best = kInf;
        std::size_t j = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] > 0) {
                if (lower(t)) continue;
                const double diff = gmax + grad[t];
                gmax2 = std::max(gmax2, grad[t]);
                if (diff > 0) {
                    double quad = 2.0 - 2.0 * y[i] * y[i] * y[t] * ki[t];
                    if (quad <= 0) quad = kTau;
                    const double obj = -diff * diff / quad;
                    if (obj <= best) { best = obj; j = t; }
                }
            } else {
                if (upper(t)) continue;
                const double diff = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (diff > 0) {
                    double quad = 2.0 + 2.0 * y[i] * y[i] * y[t] * ki[t];
                    if (quad <= 0) quad = kTau;
                    const double obj = -diff * diff / quad;
                    if (obj <= best) { best = obj; j = t; }
                }
            }
        }
        if (gmax + gmax2 < kEps || j == n) break;
        const std::vector<double>& kj = cache.row(j);

        const double kij = ki[j];
        const double ai_old = alpha[i], aj_old = alpha[j];
        if (y[i] != y[j]) {
            double quad = 2.0 + 2.0 * (-kij);  // K_ii + K_jj + 2 Q_ij with Q_ij = -K_ij
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
            }
            if (diff > 0) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
            } else {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
            }
        } else {
            double quad = 2.0 - 2.0 * kij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
            } else {
                if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
            }
            if (sum > c) {
                if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
            } else {
                if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
            }
        }
        const double dai = alpha[i] - ai_old;
        const double daj = alpha[j] - aj_old;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * ki[t] * dai + y[j] * kj[t] * daj);
        }
    }
    m.iterations = iter;

    double ub = kInf, lb = -kInf, sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    m.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;

    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            m.support.push_back(z[t]);
            m.alpha.push_back(alpha[t]);
            m.y.push_back(y[t]);
        }
    }
    return m;
}

double svm_decision(const SvmModel& m, std::span<const double> x) {
    const auto z = m.scaler.apply(x);
    double s = -m.rho;
    for (std::size_t k = 0; k < m.support.size(); ++k) {
        s += m.alpha[k] * m.y[k] * rbf(m.support[k], z, m.gamma);
    }
    return s;
}

}  // namespace asnm
