#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "asnm/classifiers.hpp"
#include "asnm/dataset.hpp"

namespace asnm {

/// Intrusion is the positive class.
struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

    void add(Label truth, Label predicted);
    std::size_t total() const noexcept { return tp + fp + tn + fn; }
    Confusion& operator+=(const Confusion& o);
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Undefined ratios are 0.
struct Metrics {
    double tpr = 0.0;
    double fpr = 0.0;
    double f1 = 0.0;
    double avg_recall = 0.0;

    static Metrics from(const Confusion& c);
    Metrics operator-(const Metrics& o) const;
    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Row indices per fold. Each class is shuffled with its own seeded stream
/// and dealt round-robin, so per-class fold sizes differ by at most one.
/// Throws TooFewSamples when a class has fewer than k members.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<Label>& labels, int k,
                                                       std::uint64_t seed);

struct CvResult {
    std::vector<Confusion> per_fold;
    Confusion pooled;
    Metrics metrics;
};

/// Pooled confusion over k folds. Folds are evaluated via parallel_for.
CvResult cross_validate(const Samples& data, const HyperParams& params, int k, std::uint64_t seed);

/// One classifier's configuration inside a protocol run.
struct ClassifierSetup {
    HyperParams params;
    std::vector<std::string> features;
};

struct ReportEntry {
    std::string group;  ///< "" for a whole-protocol row
    ClassifierKind kind = ClassifierKind::NaiveBayes;
    Confusion confusion;
    Metrics metrics;
    double ratio = 0.0;  ///< protocol scalar: detection ratio or evasion ratio
    std::optional<Metrics> delta;
    bool summary = false;  ///< mean / std rows of grouped protocols
};

struct ExperimentReport {
    std::string protocol;
    std::string baseline;  ///< protocol the deltas refer to, if any
    std::vector<ReportEntry> entries;

    const ReportEntry* find(ClassifierKind kind, std::string_view group) const;
    /// Sets each entry's delta from the baseline entry of the same classifier
    /// and `baseline_group`.
    void attach_deltas(const ExperimentReport& base, std::string_view baseline_group);
};

// Row selectors by provenance.
bool is_direct_attack(const FeatureVector& r);
bool is_obfuscated_attack(const FeatureVector& r);
std::vector<std::size_t> rows_where(const Dataset& data, bool (*pred)(const FeatureVector&));
/// Direct attacks plus every legitimate row.
std::vector<std::size_t> dl_rows(const Dataset& data);
std::vector<std::size_t> all_rows(const Dataset& data);

/// Cross validation on direct attacks + legitimate traffic.
ExperimentReport protocol_dl_cv(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                int k, std::uint64_t seed);

/// Train on direct + legitimate, predict (a) obfuscated attacks, (b) all attacks.
/// Groups "obfuscated" and "all-attacks"; deltas are against `dl_cv`.
ExperimentReport protocol_evasion(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                  const ExperimentReport& dl_cv);

/// Cross validation over all rows, once per feature source.
/// Groups "ffs-dl" and "ffs-dol"; deltas are against `dl_cv`.
ExperimentReport protocol_dol_cv(const Dataset& data, const std::vector<ClassifierSetup>& dl_setups,
                                 const std::vector<ClassifierSetup>& dol_setups, int k,
                                 std::uint64_t seed, const ExperimentReport& dl_cv);

enum class LooGrouping { PerInstance, PerTechnique };
LooGrouping parse_grouping(std::string_view text);

/// Holds out the attack rows of each obfuscation id (or technique group) in
/// turn; `ratio` is the fraction of held-out rows predicted Intrusion.
/// Appends "mean" and "std" summary rows per classifier.
ExperimentReport protocol_loo_obf(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                  LooGrouping grouping);

/// Train on direct + legitimate; `ratio` per service is the fraction of its
/// obfuscated attack rows predicted Legitimate. Services are sorted by the
/// mean ratio across classifiers, descending.
ExperimentReport protocol_per_service(const Dataset& data,
                                      const std::vector<ClassifierSetup>& setups);

struct DivergenceResult {
    std::vector<std::string> features;
    std::vector<double> ratio;
    double average = 0.0;
    std::size_t obfuscated_rows = 0;
};

constexpr double kDefaultDivergenceEpsilon = 0.01;

/// For each obfuscated attack row and feature: divergent when the distance to
/// the closest direct row with the same exploit exceeds
/// epsilon_rel times the feature's global range.
DivergenceResult divergence_ratio(const Dataset& data, const std::vector<std::string>& features,
                                  double epsilon_rel = kDefaultDivergenceEpsilon);

}  // namespace asnm
