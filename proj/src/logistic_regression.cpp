#include <cmath>

#include <Eigen/Dense>

#include "asnm/classifiers.hpp"

namespace asnm {

namespace {

constexpr int kMaxIterations = 5000;
constexpr double kGradTol = 1e-6;

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) { return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

struct Problem {
    Eigen::MatrixXd z;  // n x (d+1), last column is 1
    Eigen::VectorXd y;  // +1 / -1
    double lambda;

    double objective(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd s = z * theta;
        double loss = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) loss += softplus_neg(y[i] * s[i]);
        const auto d = theta.size() - 1;
        return loss / static_cast<double>(s.size()) + lambda * theta.head(d).squaredNorm();
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd s = z * theta;
        Eigen::VectorXd r(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) r[i] = -y[i] * sigmoid(-y[i] * s[i]);
        Eigen::VectorXd g = z.transpose() * r / static_cast<double>(s.size());
        const auto d = theta.size() - 1;
        g.head(d) += 2.0 * lambda * theta.head(d);
        return g;
    }

    Eigen::MatrixXd hessian(const Eigen::VectorXd& theta) const {
        const Eigen::VectorXd s = z * theta;
        Eigen::VectorXd wgt(s.size());
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            const double p = sigmoid(s[i]);
            wgt[i] = p * (1.0 - p);
        }
        Eigen::MatrixXd h = z.transpose() * wgt.asDiagonal() * z / static_cast<double>(s.size());
        const auto d = theta.size() - 1;
        h.diagonal().head(d).array() += 2.0 * lambda;
        return h;
    }
};

Problem make_problem(const Standardizer& scaler, const Samples& data, double lambda) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto d = static_cast<Eigen::Index>(data.dims());
    Problem p{Eigen::MatrixXd(n, d + 1), Eigen::VectorXd(n), lambda};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto zi = scaler.apply(data.x[static_cast<std::size_t>(i)]);
        for (Eigen::Index f = 0; f < d; ++f) p.z(i, f) = zi[static_cast<std::size_t>(f)];
        p.z(i, d) = 1.0;
        p.y[i] = data.y[static_cast<std::size_t>(i)] == Label::Intrusion ? 1.0 : -1.0;
    }
    return p;
}

Eigen::VectorXd pack(const LogRegModel& m) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(m.w.size()) + 1);
    for (std::size_t f = 0; f < m.w.size(); ++f) theta[static_cast<Eigen::Index>(f)] = m.w[f];
    theta[theta.size() - 1] = m.b;
    return theta;
}

}  // namespace

LogRegModel train_logreg(const HyperParams& params, const Samples& data) {
    LogRegModel m;
    m.scaler = Standardizer::fit(data);
    const Problem prob = make_problem(m.scaler, data, params.lambda);
    const auto dim = prob.z.cols();
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    double f = prob.objective(theta);
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        const Eigen::VectorXd g = prob.gradient(theta);
        if (g.norm() < kGradTol) break;
        Eigen::MatrixXd h = prob.hessian(theta);
        h.diagonal().array() += 1e-10;
        Eigen::VectorXd step = h.ldlt().solve(-g);
        double slope = g.dot(step);
        if (!step.allFinite() || slope >= 0) {
            step = -g;
            slope = -g.squaredNorm();
        }
        double t = 1.0;
        double f_new = prob.objective(theta + step);
        while (f_new > f + 1e-4 * t * slope && t > 1e-12) {
            t *= 0.5;
            f_new = prob.objective(theta + t * step);
        }
        if (!(f_new <= f)) break;  // no descent possible at machine precision
        theta += t * step;
        f = f_new;
    }
    m.iterations = static_cast<std::size_t>(it);
    m.w.resize(static_cast<std::size_t>(dim - 1));
    for (Eigen::Index i = 0; i + 1 < dim; ++i) m.w[static_cast<std::size_t>(i)] = theta[i];
    m.b = theta[dim - 1];
    return m;
}

double logreg_decision(const LogRegModel& m, std::span<const double> x) {
    double s = m.b;
    for (std::size_t f = 0; f < x.size(); ++f) s += m.w[f] * (x[f] - m.scaler.mean[f]) / m.scaler.scale[f];
    return s;
}

double logreg_objective(const LogRegModel& m, const Samples& data, double lambda) {
    return make_problem(m.scaler, data, lambda).objective(pack(m));
}

std::vector<double> logreg_gradient(const LogRegModel& m, const Samples& data, double lambda) {
    const Eigen::VectorXd g = make_problem(m.scaler, data, lambda).gradient(pack(m));
    return {g.data(), g.data() + g.size()};
}

}  // namespace asnm
