#include "asnm/pipeline.hpp"

#include <algorithm>
#include <set>

#include "asnm/error.hpp"
#include "asnm/features.hpp"
#include "asnm/flow.hpp"
#include "asnm/rng.hpp"

namespace asnm {

Dataset dataset_from_traces(const std::vector<Trace>& traces) {
    Dataset data = Dataset::with_standard_schema();
    for (const auto& t : traces) {
        const auto assembly = assemble(t);
        auto rows = extract_dataset(assembly.connections, assembly.context);
        for (auto& r : rows) data.rows.push_back(std::move(r));
    }
    return data;
}

ObfuscationRun obfuscate_traces(const std::vector<Trace>& traces,
                                const std::vector<ObfuscationSpec>& specs, std::size_t per_trace,
                                std::uint64_t seed, Directions directions) {
    if (specs.empty() || per_trace == 0) {
        throw Error(Errc::InvalidConfig, "need at least one spec and per_trace >= 1");
    }
    ObfuscationRun run;
    run.traces = traces;
    std::size_t attack = 0;
    for (std::size_t t = 0; t < traces.size(); ++t) {
        const auto& trace = traces[t];
        if (trace.meta_or(meta_key::label, "legitimate") != "intrusion") continue;
        if (trace.meta_or(meta_key::obfuscation, "direct") != "direct") continue;
        const std::uint64_t trace_seed = derive_seed(seed, t);
        for (std::size_t r = 0; r < per_trace; ++r) {
            const auto& spec = specs[(attack * per_trace + r) % specs.size()];
            try {
                run.traces.push_back(apply(spec, trace, catalog_seed(trace_seed, spec.id), directions));
            } catch (const Error& e) {
                if (e.code() != Errc::InfeasibleSpec) throw;
                run.failures.push_back("trace " + std::to_string(t) + " / " + spec.id + ": " + e.what());
            }
        }
        ++attack;
    }
    return run;
}

SelectionSet select_all(const Dataset& data, const std::vector<ClassifierKind>& kinds, int folds,
                        std::uint64_t seed) {
    SelectionSet out;
    for (auto k : kinds) out[k] = make_dl_dol_subsets(data, k, folds, seed);
    return out;
}

std::vector<ClassifierSetup> setups(const SelectionSet& sel, bool dol) {
    std::vector<ClassifierSetup> out;
    for (auto k : all_classifiers()) {
        auto it = sel.find(k);
        if (it == sel.end()) continue;
        const auto& r = dol ? it->second.dol : it->second.dl;
        out.push_back({r.params, r.features});
    }
    return out;
}

std::vector<std::string> union_of_dl_features(const Dataset& data, const SelectionSet& sel) {
    std::set<std::string> names;
    for (const auto& [k, s] : sel) names.insert(s.dl.features.begin(), s.dl.features.end());
    std::vector<std::string> out;
    for (const auto& f : data.feature_names) {
        if (names.count(f)) out.push_back(f);
    }
    return out;
}

}  // namespace asnm
