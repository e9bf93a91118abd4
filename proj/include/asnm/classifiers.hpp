#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asnm/dataset.hpp"

namespace asnm {

enum class ClassifierKind { NaiveBayes, NaiveBayesKde, LogisticRegression, DecisionTree, Svm };

/// Short CLI names: nb, nbk, logreg, dtree, svm.
std::string_view to_string(ClassifierKind kind) noexcept;
std::string_view display_name(ClassifierKind kind) noexcept;
/// Throws InvalidConfig for unknown names.
ClassifierKind parse_classifier(std::string_view name);
const std::vector<ClassifierKind>& all_classifiers();

struct HyperParams {
    ClassifierKind kind = ClassifierKind::NaiveBayes;
    bool laplace = true;     ///< nb, nbk
    double bandwidth = 1.0;  ///< nbk, in standardised units
    double lambda = 0.0;     ///< logreg
    int max_depth = 10;      ///< dtree
    double min_gain = 0.01;  ///< dtree, minimal gain ratio for a split
    double c = 1.0;          ///< svm
    double gamma = 0.1;      ///< svm

    static HyperParams defaults(ClassifierKind kind);
    void validate() const;
    /// e.g. "C=10 gamma=0.1"
    std::string describe() const;

    friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

/// Per-feature z-scoring fitted on training data; zero spread maps to scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Samples& s);
    std::vector<double> apply(std::span<const double> x) const;
};

struct GaussianNbModel {
    Standardizer scaler;
    double log_prior[2] = {0.0, 0.0};  ///< [Intrusion, Legitimate]
    std::vector<double> mean[2];
    std::vector<double> var[2];
};

struct KdeNbModel {
    Standardizer scaler;
    double log_prior[2] = {0.0, 0.0};
    double bandwidth = 1.0;
    /// points[c][f]: sorted standardised training values of class c, feature f.
    std::vector<std::vector<double>> points[2];
};

struct LogRegModel {
    Standardizer scaler;
    std::vector<double> w;
    double b = 0.0;
    std::size_t iterations = 0;
};

struct TreeNode {
    int feature = -1;  ///< -1 for leaves
    double threshold = 0.0;
    int left = -1;   ///< x[feature] <= threshold
    int right = -1;
    double intrusion_fraction = 0.0;
    Label label = Label::Intrusion;
};

struct DecisionTreeModel {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
    int depth() const;
};

struct SvmModel {
    Standardizer scaler;
    std::vector<std::vector<double>> support;  ///< standardised support vectors
    std::vector<double> alpha;                 ///< 0 < alpha <= C
    std::vector<double> y;                     ///< +1 Intrusion, -1 Legitimate
    double rho = 0.0;
    double gamma = 0.1;
    double c = 1.0;
    std::size_t iterations = 0;
};

class TrainedModel {
public:
    using Impl = std::variant<GaussianNbModel, KdeNbModel, LogRegModel, DecisionTreeModel, SvmModel>;

    TrainedModel(HyperParams params, std::size_t dims, Impl impl)
        : params_(params), dims_(dims), impl_(std::move(impl)) {}

    ClassifierKind kind() const noexcept { return params_.kind; }
    const HyperParams& params() const noexcept { return params_; }
    std::size_t dims() const noexcept { return dims_; }
    const Impl& impl() const noexcept { return impl_; }

    /// Names of the feature columns the model was trained on (bookkeeping).
    std::vector<std::string> feature_names;

private:
    HyperParams params_;
    std::size_t dims_;
    Impl impl_;
};

struct Prediction {
    Label label;
    double score;  ///< log-odds (NB, LogReg), leaf intrusion fraction (tree), decision value (SVM)
};

/// Throws DegenerateData when a class is absent.
TrainedModel train(const HyperParams& params, const Samples& data);
/// Throws DimensionMismatch when x has the wrong width.
Prediction predict(const TrainedModel& model, std::span<const double> x);

/// Posterior (P(Intrusion|x), P(Legitimate|x)) of the naive Bayes families.
std::pair<double, double> nb_posterior(const TrainedModel& model, std::span<const double> x);

// Per-family trainers; train() dispatches to these.
GaussianNbModel train_gaussian_nb(const HyperParams& p, const Samples& data);
KdeNbModel train_kde_nb(const HyperParams& p, const Samples& data);
LogRegModel train_logreg(const HyperParams& p, const Samples& data);
DecisionTreeModel train_decision_tree(const HyperParams& p, const Samples& data);
SvmModel train_svm(const HyperParams& p, const Samples& data);

/// Joint log-likelihoods [Intrusion, Legitimate] for NB families.
std::array<double, 2> nb_log_joint(const GaussianNbModel& m, std::span<const double> x);
std::array<double, 2> nb_log_joint(const KdeNbModel& m, std::span<const double> x);
double logreg_decision(const LogRegModel& m, std::span<const double> x);
const TreeNode& tree_leaf(const DecisionTreeModel& m, std::span<const double> x);
double svm_decision(const SvmModel& m, std::span<const double> x);

/// Mean logistic loss + lambda * |w|^2 at the model's parameters, on raw samples.
double logreg_objective(const LogRegModel& m, const Samples& data, double lambda);
/// Gradient of logreg_objective w.r.t. (w..., b).
std::vector<double> logreg_gradient(const LogRegModel& m, const Samples& data, double lambda);

std::string save_model(const TrainedModel& model);
TrainedModel load_model(std::string_view text);

/// Hyperparameter grid, already expanded to a list of points.
std::vector<HyperParams> default_grid(ClassifierKind kind);

/// Best point by mean average recall over stratified k-fold CV; ties go to
/// the earliest point.
HyperParams grid_search(const std::vector<HyperParams>& grid, const Samples& data, int folds,
                        std::uint64_t seed);

}  // namespace asnm
