#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "asnm/dataset.hpp"
#include "asnm/evaluation.hpp"
#include "asnm/obfuscation.hpp"
#include "asnm/selection.hpp"

namespace asnm {

/// Assembles every trace on its own (context never crosses traces) and
/// extracts one row per connection, in trace order.
Dataset dataset_from_traces(const std::vector<Trace>& traces);

struct ObfuscationRun {
    std::vector<Trace> traces;  ///< inputs first, then obfuscated copies
    std::vector<std::string> failures;
};

/// Obfuscates intrusion traces only. Intrusion trace i receives `per_trace`
/// specs taken round-robin from `specs`, starting at i * per_trace.
ObfuscationRun obfuscate_traces(const std::vector<Trace>& traces,
                                const std::vector<ObfuscationSpec>& specs, std::size_t per_trace,
                                std::uint64_t seed,
                                Directions directions = Directions::ClientToServer);

/// FFS DL / DOL selections for each classifier kind.
using SelectionSet = std::map<ClassifierKind, DlDolSelection>;

SelectionSet select_all(const Dataset& data, const std::vector<ClassifierKind>& kinds, int folds,
                        std::uint64_t seed);

std::vector<ClassifierSetup> setups(const SelectionSet& sel, bool dol);

/// Features selected in any FFS DL run, in schema order.
std::vector<std::string> union_of_dl_features(const Dataset& data, const SelectionSet& sel);

}  // namespace asnm
