#include "asnm/selection.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "asnm/error.hpp"
#include "asnm/evaluation.hpp"
#include "asnm/parallel.hpp"

namespace asnm {

HyperParams grid_search(const std::vector<HyperParams>& grid, const Samples& data, int folds,
                        std::uint64_t seed) {
    if (grid.empty()) throw Error(Errc::InvalidConfig, "empty hyperparameter grid");
    if (grid.size() == 1) return grid.front();
    std::vector<double> score(grid.size());
    parallel_for(grid.size(), [&](std::size_t g) {
        score[g] = cross_validate(data, grid[g], folds, seed).metrics.avg_recall;
    });
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (score[g] > score[best]) best = g;
    }
    return grid[best];
}

SelectionResult ffs(const Samples& data, const std::vector<std::string>& names,
                    const HyperParams& params, int folds, std::uint64_t seed) {
    if (names.size() != data.dims()) {
        throw Error(Errc::DimensionMismatch, "feature names do not match sample width");
    }
    if (data.count(Label::Intrusion) == 0 || data.count(Label::Legitimate) == 0) {
        throw Error(Errc::DegenerateData, "selection data must contain both classes");
    }
    SelectionResult res;
    res.params = params;
    std::vector<std::size_t> chosen;
    std::vector<bool> used(names.size(), false);
    std::size_t best_size = 0;
    int slack = 0;
    while (chosen.size() < names.size()) {
        std::vector<std::size_t> cand;
        for (std::size_t f = 0; f < names.size(); ++f) {
            if (!used[f]) cand.push_back(f);
        }
        std::vector<double> score(cand.size());
        parallel_for(cand.size(), [&](std::size_t c) {
            auto cols = chosen;
            cols.push_back(cand[c]);
            score[c] = cross_validate(select_columns(data, cols), params, folds, seed).metrics.avg_recall;
        });
        std::size_t pick = 0;
        for (std::size_t c = 1; c < cand.size(); ++c) {
            if (score[c] > score[pick]) pick = c;
        }
        chosen.push_back(cand[pick]);
        used[cand[pick]] = true;
        const bool improved = score[pick] > res.best_objective;
        res.trace.push_back({names[cand[pick]], score[pick], improved});
        if (improved) {
            res.best_objective = score[pick];
            best_size = chosen.size();
            slack = 0;
        } else if (++slack >= 2) {
            break;
        }
    }
    for (std::size_t i = 0; i < best_size; ++i) res.features.push_back(names[chosen[i]]);
    return res;
}

SelectionResult select_features(const Dataset& data, const std::vector<std::size_t>& rows,
                                 ClassifierKind kind, int folds, std::uint64_t seed) {
    std::vector<std::size_t> cols(data.feature_names.size());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    const auto samples = make_samples(data, rows, cols);
    const auto params = grid_search(default_grid(kind), samples, folds, seed);
    return ffs(samples, data.feature_names, params, folds, seed);
}

DlDolSelection make_dl_dol_subsets(const Dataset& data, ClassifierKind kind, int folds,
                                   std::uint64_t seed) {
    return {select_features(data, dl_rows(data), kind, folds, seed),
            select_features(data, all_rows(data), kind, folds, seed)};
}

namespace {

using nlohmann::json;

constexpr std::string_view kSelectionSchema = "asnmlab-selection/v1";

json params_json(const HyperParams& p) {
    return {{"classifier", std::string(to_string(p.kind))},
            {"laplace", p.laplace},
            {"bandwidth", p.bandwidth},
            {"lambda", p.lambda},
            {"max_depth", p.max_depth},
            {"min_gain", p.min_gain},
            {"C", p.c},
            {"gamma", p.gamma}};
}

HyperParams params_from(const json& j) {
    HyperParams p;
    p.kind = parse_classifier(j.at("classifier").get<std::string>());
    p.laplace = j.at("laplace").get<bool>();
    p.bandwidth = j.at("bandwidth").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.max_depth = j.at("max_depth").get<int>();
    p.min_gain = j.at("min_gain").get<double>();
    p.c = j.at("C").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.validate();
    return p;
}

}  // namespace

std::string write_selections(const std::vector<SelectionRecord>& records,
                             std::string_view schema_version) {
    json arr = json::array();
    for (const auto& r : records) {
        json trace = json::array();
        for (const auto& s : r.result.trace) {
            trace.push_back({{"feature", s.feature}, {"objective", s.objective}, {"improved", s.improved}});
        }
        arr.push_back({{"variant", r.variant},
                       {"params", params_json(r.result.params)},
                       {"features", r.result.features},
                       {"best_objective", r.result.best_objective},
                       {"trace", trace}});
    }
    json doc = {{"schema", std::string(kSelectionSchema)},
                {"feature_schema", std::string(schema_version)},
                {"selections", arr}};
    return doc.dump(2) + "\n";
}

std::vector<SelectionRecord> read_selections(std::string_view text) {
    try {
        const json doc = json::parse(text);
        if (doc.at("schema").get<std::string>() != kSelectionSchema) {
            throw Error(Errc::SchemaViolation, "not a selection file");
        }
        std::vector<SelectionRecord> out;
        for (const auto& j : doc.at("selections")) {
            SelectionRecord r;
            r.variant = j.at("variant").get<std::string>();
            r.result.params = params_from(j.at("params"));
            r.result.features = j.at("features").get<std::vector<std::string>>();
            r.result.best_objective = j.at("best_objective").get<double>();
            for (const auto& s : j.at("trace")) {
                r.result.trace.push_back({s.at("feature").get<std::string>(),
                                          s.at("objective").get<double>(),
                                          s.at("improved").get<bool>()});
            }
            out.push_back(std::move(r));
        }
        return out;
    } catch (const json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("selection file: ") + e.what());
    }
}

std::string selection_report(const SelectionRecord& record) {
    std::ostringstream os;
    const auto& r = record.result;
    os << "FFS " << (record.variant == "dl" ? "DL" : "DOL") << "  "
       << display_name(r.params.kind) << "  (" << r.params.describe() << ")\n";
    std::size_t width = 8;
    for (const auto& s : r.trace) width = std::max(width, s.feature.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& s = r.trace[i];
        const bool kept = i < r.features.size();
        os << "  " << (i + 1) << ". " << s.feature << std::string(width - s.feature.size() + 2, ' ')
           << format_real(s.objective) << (s.improved ? "" : "  (slack)")
           << (kept ? "" : "  [dropped]") << '\n';
    }
    os << "  selected " << r.features.size() << " feature(s), best avg recall "
       << format_real(r.best_objective) << '\n';
    return os.str();
}

}  // namespace asnm
