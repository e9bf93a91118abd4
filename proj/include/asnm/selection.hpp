#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asnm/classifiers.hpp"
#include "asnm/dataset.hpp"

namespace asnm {

/// Objective of the empty feature set: chance-level average recall.
inline constexpr double kEmptySetObjective = 0.5;

struct SelectionStep {
    std::string feature;
    double objective;  ///< CV mean average recall after adding `feature`
    bool improved;
};

struct SelectionResult {
    std::vector<std::string> features;  ///< in selection order, rolled back to the best subset
    std::vector<SelectionStep> trace;   ///< one entry per executed iteration
    HyperParams params;
    double best_objective = kEmptySetObjective;
};

/// Forward selection with one non-improving iteration tolerated. Each
/// candidate is scored by stratified k-fold CV average recall; ties go to the
/// earlier column. `names[i]` names column i of `data`.
SelectionResult ffs(const Samples& data, const std::vector<std::string>& names,
                    const HyperParams& params, int folds, std::uint64_t seed);

/// Grid search followed by selection on the given rows of a dataset.
SelectionResult select_features(const Dataset& data, const std::vector<std::size_t>& rows,
                                 ClassifierKind kind, int folds, std::uint64_t seed);

struct DlDolSelection {
    SelectionResult dl;   ///< direct attacks + legitimate rows
    SelectionResult dol;  ///< all rows
};

DlDolSelection make_dl_dol_subsets(const Dataset& data, ClassifierKind kind, int folds,
                                   std::uint64_t seed);

/// One stored selection inside a selection file.
struct SelectionRecord {
    std::string variant;  ///< "dl" or "dol"
    SelectionResult result;
};

/// JSON selection file carrying a schema tag.
std::string write_selections(const std::vector<SelectionRecord>& records,
                             std::string_view schema_version);
std::vector<SelectionRecord> read_selections(std::string_view text);

/// Text listing of features in selection order with objective values.
std::string selection_report(const SelectionRecord& record);

}  // namespace asnm
