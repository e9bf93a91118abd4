#include "asnm/classifiers.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "asnm/error.hpp"

namespace asnm {

std::string_view to_string(ClassifierKind kind) noexcept {
    switch (kind) {
        case ClassifierKind::NaiveBayes:         return "nb";
        case ClassifierKind::NaiveBayesKde:      return "nbk";
        case ClassifierKind::LogisticRegression: return "logreg";
        case ClassifierKind::DecisionTree:       return "dtree";
        case ClassifierKind::Svm:                return "svm";
    }
    return "?";
}

std::string_view display_name(ClassifierKind kind) noexcept {
    switch (kind) {
        case ClassifierKind::NaiveBayes:         return "Naive Bayes";
        case ClassifierKind::NaiveBayesKde:      return "Naive Bayes (kernels)";
        case ClassifierKind::LogisticRegression: return "Logistic regression";
        case ClassifierKind::DecisionTree:       return "Decision tree";
        case ClassifierKind::Svm:                return "SVM (RBF)";
    }
    return "?";
}

ClassifierKind parse_classifier(std::string_view name) {
    for (auto k : all_classifiers()) {
        if (to_string(k) == name) return k;
    }
    throw Error(Errc::InvalidConfig, "unknown classifier '" + std::string(name) + "'");
}

const std::vector<ClassifierKind>& all_classifiers() {
    static const std::vector<ClassifierKind> kinds = {
        ClassifierKind::NaiveBayes, ClassifierKind::NaiveBayesKde,
        ClassifierKind::LogisticRegression, ClassifierKind::DecisionTree, ClassifierKind::Svm};
    return kinds;
}

HyperParams HyperParams::defaults(ClassifierKind kind) {
    HyperParams p;
    p.kind = kind;
    return p;
}

void HyperParams::validate() const {
    auto bad = [](const std::string& what) { throw Error(Errc::InvalidConfig, what); };
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) bad("bandwidth must be > 0");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) bad("lambda must be >= 0");
    if (max_depth < 0 || max_depth > 10) bad("max_depth must be in [0, 10]");
    if (!(min_gain >= 0.0)) bad("min_gain must be >= 0");
    if (!(c > 0.0) || !std::isfinite(c)) bad("C must be > 0");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) bad("gamma must be > 0");
}

std::string HyperParams::describe() const {
    std::string s;
    switch (kind) {
        case ClassifierKind::NaiveBayes:
            s = std::string("laplace=") + (laplace ? "on" : "off");
            break;
        case ClassifierKind::NaiveBayesKde:
            s = std::string("laplace=") + (laplace ? "on" : "off") +
                " bandwidth=" + format_real(bandwidth);
            break;
        case ClassifierKind::LogisticRegression:
            s = "lambda=" + format_real(lambda);
            break;
        case ClassifierKind::DecisionTree:
            s = "max_depth=" + std::to_string(max_depth) + " min_gain=" + format_real(min_gain);
            break;
        case ClassifierKind::Svm:
            s = "C=" + format_real(c) + " gamma=" + format_real(gamma);
            break;
    }
    return s;
}

Standardizer Standardizer::fit(const Samples& s) {
    Standardizer z;
    const std::size_t d = s.dims();
    z.mean.assign(d, 0.0);
    z.scale.assign(d, 1.0);
    if (s.size() == 0) return z;
    const double n = static_cast<double>(s.size());
    for (const auto& row : s.x) {
        for (std::size_t f = 0; f < d; ++f) z.mean[f] += row[f];
    }
    for (auto& m : z.mean) m /= n;
    std::vector<double> var(d, 0.0);
    for (const auto& row : s.x) {
        for (std::size_t f = 0; f < d; ++f) {
            const double t = row[f] - z.mean[f];
            var[f] += t * t;
        }
    }
    for (std::size_t f = 0; f < d; ++f) {
        const double sd = std::sqrt(var[f] / n);
        z.scale[f] = sd > 0.0 ? sd : 1.0;
    }
    return z;
}

std::vector<double> Standardizer::apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) out[f] = (x[f] - mean[f]) / scale[f];
    return out;
}

namespace {

void check_trainable(const Samples& data) {
    if (data.count(Label::Intrusion) == 0 || data.count(Label::Legitimate) == 0) {
        throw Error(Errc::DegenerateData, "training data must contain both classes");
    }
    const std::size_t d = data.dims();
    for (const auto& row : data.x) {
        if (row.size() != d) throw Error(Errc::DimensionMismatch, "ragged training matrix");
    }
}

Label from_log_odds(double score) { return score >= 0.0 ? Label::Intrusion : Label::Legitimate; }

}  // namespace

TrainedModel train(const HyperParams& params, const Samples& data) {
    params.validate();
    check_trainable(data);
    const std::size_t d = data.dims();
    switch (params.kind) {
        case ClassifierKind::NaiveBayes:
            return TrainedModel(params, d, train_gaussian_nb(params, data));
        case ClassifierKind::NaiveBayesKde:
            return TrainedModel(params, d, train_kde_nb(params, data));
        case ClassifierKind::LogisticRegression:
            return TrainedModel(params, d, train_logreg(params, data));
        case ClassifierKind::DecisionTree:
            return TrainedModel(params, d, train_decision_tree(params, data));
        case ClassifierKind::Svm:
            return TrainedModel(params, d, train_svm(params, data));
    }
    throw Error(Errc::InvalidConfig, "unknown classifier kind");
}

Prediction predict(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.dims()) {
        throw Error(Errc::DimensionMismatch, "expected " + std::to_string(model.dims()) +
                                                 " features, got " + std::to_string(x.size()));
    }
    return std::visit(
        [&](const auto& m) -> Prediction {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianNbModel> || std::is_same_v<M, KdeNbModel>) {
                const auto lj = nb_log_joint(m, x);
                const double s = lj[0] - lj[1];
                return {from_log_odds(s), s};
            } else if constexpr (std::is_same_v<M, LogRegModel>) {
                const double s = logreg_decision(m, x);
                return {from_log_odds(s), s};
            } else if constexpr (std::is_same_v<M, DecisionTreeModel>) {
                const auto& leaf = tree_leaf(m, x);
                return {leaf.label, leaf.intrusion_fraction};
            } else {
                const double s = svm_decision(m, x);
                return {from_log_odds(s), s};
            }
        },
        model.impl());
}

std::pair<double, double> nb_posterior(const TrainedModel& model, std::span<const double> x) {
    if (x.size() != model.dims()) throw Error(Errc::DimensionMismatch, "feature count mismatch");
    std::array<double, 2> lj{};
    if (const auto* g = std::get_if<GaussianNbModel>(&model.impl())) {
        lj = nb_log_joint(*g, x);
    } else if (const auto* k = std::get_if<KdeNbModel>(&model.impl())) {
        lj = nb_log_joint(*k, x);
    } else {
        throw Error(Errc::InvalidConfig, "posterior is defined for naive Bayes models only");
    }
    // Softmax over two classes written to stay finite for extreme log-odds.
    const double d = lj[1] - lj[0];
    const double p_intr = d > 0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
    return {p_intr, 1.0 - p_intr};
}

std::vector<HyperParams> default_grid(ClassifierKind kind) {
    std::vector<HyperParams> grid;
    HyperParams base = HyperParams::defaults(kind);
    switch (kind) {
        case ClassifierKind::NaiveBayes:
            grid.push_back(base);
            break;
        case ClassifierKind::NaiveBayesKde:
            for (double h : {0.01, 0.1, 1.0, 10.0}) {
                base.bandwidth = h;
                grid.push_back(base);
            }
            break;
        case ClassifierKind::LogisticRegression:
            for (double l : {0.0, 1e-3, 1e-2, 1e-1, 1.0}) {
                base.lambda = l;
                grid.push_back(base);
            }
            break;
        case ClassifierKind::DecisionTree:
            for (double g : {0.01, 0.05, 0.1}) {
                base.min_gain = g;
                grid.push_back(base);
            }
            break;
        case ClassifierKind::Svm:
            for (double c : {0.1, 1.0, 10.0, 100.0}) {
                for (double g : {1e-3, 1e-2, 1e-1, 1.0}) {
                    base.c = c;
                    base.gamma = g;
                    grid.push_back(base);
                }
            }
            break;
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Text model format:
//   asnmlab-model v1
//   kind <name>
//   params <laplace> <bandwidth> <lambda> <max_depth> <min_gain> <C> <gamma>
//   dims <d>
//   features <n> <name>...
//   then kind-specific lines, then "end".

namespace {

constexpr std::string_view kModelHeader = "asnmlab-model v1";

void put_vec(std::ostringstream& os, std::string_view tag, const std::vector<double>& v) {
    os << tag << ' ' << v.size();
    for (double x : v) os << ' ' << format_real(x);
    os << '\n';
}

void put_scaler(std::ostringstream& os, const Standardizer& z) {
    put_vec(os, "scaler_mean", z.mean);
    put_vec(os, "scaler_scale", z.scale);
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    std::vector<std::string_view> line(std::string_view expect_tag) {
        while (pos_ < text_.size()) {
            auto end = text_.find('\n', pos_);
            if (end == std::string_view::npos) end = text_.size();
            std::string_view l = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
            if (l.empty()) continue;
            std::vector<std::string_view> tok;
            std::size_t s = 0;
            while (s < l.size()) {
                while (s < l.size() && l[s] == ' ') ++s;
                auto e = l.find(' ', s);
                if (e == std::string_view::npos) e = l.size();
                if (e > s) tok.push_back(l.substr(s, e - s));
                s = e;
            }
            if (tok.empty() || (!expect_tag.empty() && tok[0] != expect_tag)) {
                fail("expected '" + std::string(expect_tag) + "'");
            }
            return tok;
        }
        fail("unexpected end of model");
    }

    std::string_view header() {
        while (pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r')) ++pos_;
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        std::string_view l = text_.substr(pos_, end - pos_);
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        pos_ = end + 1;
        return l;
    }

    std::vector<double> vec(std::string_view tag) {
        auto tok = line(tag);
        const std::size_t n = count(tok, 1);
        if (tok.size() != n + 2) fail("bad length for '" + std::string(tag) + "'");
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = parse_real(tok[i + 2]);
        return v;
    }

    Standardizer scaler(std::size_t dims) {
        Standardizer z;
        z.mean = vec("scaler_mean");
        z.scale = vec("scaler_scale");
        if (z.mean.size() != dims || z.scale.size() != dims) fail("scaler width");
        return z;
    }

    static std::size_t count(const std::vector<std::string_view>& tok, std::size_t at) {
        if (tok.size() <= at) fail("missing count");
        return static_cast<std::size_t>(parse_real(tok[at]));
    }

    [[noreturn]] static void fail(const std::string& what) {
        throw Error(Errc::SchemaViolation, "model: " + what);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string save_model(const TrainedModel& model) {
    std::ostringstream os;
    const auto& p = model.params();
    os << kModelHeader << '\n';
    os << "kind " << to_string(model.kind()) << '\n';
    os << "params " << (p.laplace ? 1 : 0) << ' ' << format_real(p.bandwidth) << ' '
       << format_real(p.lambda) << ' ' << p.max_depth << ' ' << format_real(p.min_gain) << ' '
       << format_real(p.c) << ' ' << format_real(p.gamma) << '\n';
    os << "dims " << model.dims() << '\n';
    os << "features " << model.feature_names.size();
    for (const auto& n : model.feature_names) os << ' ' << n;
    os << '\n';
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, GaussianNbModel>) {
                put_scaler(os, m.scaler);
                os << "priors " << format_real(m.log_prior[0]) << ' ' << format_real(m.log_prior[1])
                   << '\n';
                for (int c = 0; c < 2; ++c) {
                    put_vec(os, "mean", m.mean[c]);
                    put_vec(os, "var", m.var[c]);
                }
            } else if constexpr (std::is_same_v<M, KdeNbModel>) {
                put_scaler(os, m.scaler);
                os << "priors " << format_real(m.log_prior[0]) << ' ' << format_real(m.log_prior[1])
                   << '\n';
                os << "bandwidth " << format_real(m.bandwidth) << '\n';
                for (int c = 0; c < 2; ++c) {
                    for (const auto& pts : m.points[c]) put_vec(os, "points", pts);
                }
            } else if constexpr (std::is_same_v<M, LogRegModel>) {
                put_scaler(os, m.scaler);
                put_vec(os, "weights", m.w);
                os << "bias " << format_real(m.b) << '\n';
            } else if constexpr (std::is_same_v<M, DecisionTreeModel>) {
                os << "nodes " << m.nodes.size() << '\n';
                for (const auto& n : m.nodes) {
                    os << "node " << n.feature << ' ' << format_real(n.threshold) << ' ' << n.left
                       << ' ' << n.right << ' ' << format_real(n.intrusion_fraction) << ' '
                       << to_string(n.label) << '\n';
                }
            } else {
                put_scaler(os, m.scaler);
                os << "svm " << format_real(m.rho) << ' ' << format_real(m.gamma) << ' '
                   << format_real(m.c) << ' ' << m.support.size() << '\n';
                for (std::size_t i = 0; i < m.support.size(); ++i) {
                    os << "sv " << format_real(m.alpha[i]) << ' ' << format_real(m.y[i]);
                    for (double v : m.support[i]) os << ' ' << format_real(v);
                    os << '\n';
                }
            }
        },
        model.impl());
    os << "end\n";
    return os.str();
}

TrainedModel load_model(std::string_view text) {
    Reader r(text);
    if (r.header() != kModelHeader) Reader::fail("missing header");
    HyperParams p;
    p.kind = parse_classifier(r.line("kind").at(1));
    {
        auto t = r.line("params");
        if (t.size() != 8) Reader::fail("params");
        p.laplace = t[1] == "1";
        p.bandwidth = parse_real(t[2]);
        p.lambda = parse_real(t[3]);
        p.max_depth = static_cast<int>(parse_real(t[4]));
        p.min_gain = parse_real(t[5]);
        p.c = parse_real(t[6]);
        p.gamma = parse_real(t[7]);
    }
    const std::size_t d = Reader::count(r.line("dims"), 1);
    std::vector<std::string> names;
    {
        auto t = r.line("features");
        const std::size_t n = Reader::count(t, 1);
        if (t.size() != n + 2) Reader::fail("features");
        for (std::size_t i = 0; i < n; ++i) names.emplace_back(t[i + 2]);
    }

    auto priors = [&](double (&lp)[2]) {
        auto t = r.line("priors");
        if (t.size() != 3) Reader::fail("priors");
        lp[0] = parse_real(t[1]);
        lp[1] = parse_real(t[2]);
    };

    TrainedModel::Impl impl;
    switch (p.kind) {
        case ClassifierKind::NaiveBayes: {
            GaussianNbModel m;
            m.scaler = r.scaler(d);
            priors(m.log_prior);
            for (int c = 0; c < 2; ++c) {
                m.mean[c] = r.vec("mean");
                m.var[c] = r.vec("var");
                if (m.mean[c].size() != d || m.var[c].size() != d) Reader::fail("nb width");
            }
            impl = std::move(m);
            break;
        }
        case ClassifierKind::NaiveBayesKde: {
            KdeNbModel m;
            m.scaler = r.scaler(d);
            priors(m.log_prior);
            m.bandwidth = parse_real(r.line("bandwidth").at(1));
            for (int c = 0; c < 2; ++c) {
                for (std::size_t f = 0; f < d; ++f) m.points[c].push_back(r.vec("points"));
            }
            impl = std::move(m);
            break;
        }
        case ClassifierKind::LogisticRegression: {
            LogRegModel m;
            m.scaler = r.scaler(d);
            m.w = r.vec("weights");
            if (m.w.size() != d) Reader::fail("weights width");
            m.b = parse_real(r.line("bias").at(1));
            impl = std::move(m);
            break;
        }
        case ClassifierKind::DecisionTree: {
            DecisionTreeModel m;
            const std::size_t n = Reader::count(r.line("nodes"), 1);
            for (std::size_t i = 0; i < n; ++i) {
                auto t = r.line("node");
                if (t.size() != 7) Reader::fail("node");
                TreeNode node;
                node.feature = static_cast<int>(parse_real(t[1]));
                node.threshold = parse_real(t[2]);
                node.left = static_cast<int>(parse_real(t[3]));
                node.right = static_cast<int>(parse_real(t[4]));
                node.intrusion_fraction = parse_real(t[5]);
                node.label = parse_label(t[6]);
                const auto lim = static_cast<int>(n);
                if (node.feature >= static_cast<int>(d) || node.left >= lim || node.right >= lim) {
                    Reader::fail("node index out of range");
                }
                m.nodes.push_back(node);
            }
            if (m.nodes.empty()) Reader::fail("empty tree");
            impl = std::move(m);
            break;
        }
        case ClassifierKind::Svm: {
            SvmModel m;
            m.scaler = r.scaler(d);
            auto t = r.line("svm");
            if (t.size() != 5) Reader::fail("svm");
            m.rho = parse_real(t[1]);
            m.gamma = parse_real(t[2]);
            m.c = parse_real(t[3]);
            const std::size_t n = Reader::count(t, 4);
            for (std::size_t i = 0; i < n; ++i) {
                auto s = r.line("sv");
                if (s.size() != d + 3) Reader::fail("sv width");
                m.alpha.push_back(parse_real(s[1]));
                m.y.push_back(parse_real(s[2]));
                std::vector<double> v(d);
                for (std::size_t f = 0; f < d; ++f) v[f] = parse_real(s[f + 3]);
                m.support.push_back(std::move(v));
            }
            impl = std::move(m);
            break;
        }
    }
    r.line("end");
    TrainedModel model(p, d, std::move(impl));
    model.feature_names = std::move(names);
    return model;
}

}  // namespace asnm
