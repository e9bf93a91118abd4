#include "asnm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "asnm/error.hpp"
#include "asnm/obfuscation.hpp"
#include "asnm/parallel.hpp"
#include "asnm/rng.hpp"

namespace asnm {

void Confusion::add(Label truth, Label predicted) {
    if (truth == Label::Intrusion) {
        (predicted == Label::Intrusion ? tp : fn) += 1;
    } else {
        (predicted == Label::Intrusion ? fp : tn) += 1;
    }
}

Confusion& Confusion::operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

Metrics Metrics::from(const Confusion& c) {
    auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };
    Metrics m;
    m.tpr = ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn));
    m.fpr = ratio(static_cast<double>(c.fp), static_cast<double>(c.fp + c.tn));
    m.f1 = ratio(2.0 * static_cast<double>(c.tp), static_cast<double>(2 * c.tp + c.fp + c.fn));
    m.avg_recall = (m.tpr + (1.0 - m.fpr)) / 2.0;
    return m;
}

Metrics Metrics::operator-(const Metrics& o) const {
    return {tpr - o.tpr, fpr - o.fpr, f1 - o.f1, avg_recall - o.avg_recall};
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<Label>& labels, int k,
                                                       std::uint64_t seed) {
    if (k < 2) throw Error(Errc::InvalidConfig, "folds must be >= 2");
    std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(k));
    std::size_t offset = 0;
    for (Label cls : {Label::Intrusion, Label::Legitimate}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == cls) members.push_back(i);
        }
        if (members.size() < static_cast<std::size_t>(k)) {
            throw Error(Errc::TooFewSamples, std::string(to_string(cls)) + " class has " +
                                                 std::to_string(members.size()) + " samples, need " +
                                                 std::to_string(k));
        }
        Rng rng(derive_seed(seed, cls == Label::Intrusion ? 11 : 12));
        rng.shuffle(members);
        // Continue dealing where the previous class stopped so total fold
        // sizes stay balanced as well.
        for (std::size_t j = 0; j < members.size(); ++j) {
            folds[(offset + j) % folds.size()].push_back(members[j]);
        }
        offset += members.size();
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

CvResult cross_validate(const Samples& data, const HyperParams& params, int k, std::uint64_t seed) {
    const auto folds = stratified_kfold(data.y, k, seed);
    CvResult out;
    out.per_fold.resize(folds.size());
    parallel_for(folds.size(), [&](std::size_t f) {
        std::vector<std::size_t> train_rows;
        std::vector<char> in_test(data.size(), 0);
        for (auto i : folds[f]) in_test[i] = 1;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!in_test[i]) train_rows.push_back(i);
        }
        const auto model = train(params, subset(data, train_rows));
        Confusion c;
        for (auto i : folds[f]) c.add(data.y[i], predict(model, data.x[i]).label);
        out.per_fold[f] = c;
    });
    for (const auto& c : out.per_fold) out.pooled += c;
    out.metrics = Metrics::from(out.pooled);
    return out;
}

const ReportEntry* ExperimentReport::find(ClassifierKind kind, std::string_view group) const {
    for (const auto& e : entries) {
        if (e.kind == kind && e.group == group && !e.summary) return &e;
    }
    return nullptr;
}

void ExperimentReport::attach_deltas(const ExperimentReport& base, std::string_view baseline_group) {
    baseline = base.protocol;
    for (auto& e : entries) {
        if (e.summary) continue;
        if (const auto* b = base.find(e.kind, baseline_group)) e.delta = e.metrics - b->metrics;
    }
}

bool is_direct_attack(const FeatureVector& r) {
    return r.label == Label::Intrusion && r.obfuscation_id == "direct";
}

bool is_obfuscated_attack(const FeatureVector& r) {
    return r.label == Label::Intrusion && r.obfuscation_id != "direct";
}

std::vector<std::size_t> rows_where(const Dataset& data, bool (*pred)(const FeatureVector&)) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        if (pred(data.rows[i])) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> dl_rows(const Dataset& data) {
    return rows_where(data, [](const FeatureVector& r) {
        return r.label == Label::Legitimate || r.obfuscation_id == "direct";
    });
}

std::vector<std::size_t> all_rows(const Dataset& data) {
    std::vector<std::size_t> out(data.rows.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

namespace {

Confusion evaluate(const TrainedModel& model, const Samples& test) {
    Confusion c;
    for (std::size_t i = 0; i < test.size(); ++i) c.add(test.y[i], predict(model, test.x[i]).label);
    return c;
}

ReportEntry entry(std::string group, ClassifierKind kind, const Confusion& c) {
    ReportEntry e;
    e.group = std::move(group);
    e.kind = kind;
    e.confusion = c;
    e.metrics = Metrics::from(c);
    return e;
}

double fraction(std::size_t num, std::size_t den) {
    return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

ExperimentReport protocol_dl_cv(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                int k, std::uint64_t seed) {
    ExperimentReport rep;
    rep.protocol = "dl-cv";
    const auto rows = dl_rows(data);
    for (const auto& s : setups) {
        const auto samples = make_samples(data, rows, data.feature_indices(s.features));
        const auto cv = cross_validate(samples, s.params, k, seed);
        rep.entries.push_back(entry("", s.params.kind, cv.pooled));
    }
    return rep;
}

ExperimentReport protocol_evasion(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                  const ExperimentReport& dl_cv) {
    ExperimentReport rep;
    rep.protocol = "evasion";
    const auto train_rows = dl_rows(data);
    const auto obf_rows = rows_where(data, is_obfuscated_attack);
    const auto attack_rows = rows_where(data, [](const FeatureVector& r) {
        return r.label == Label::Intrusion;
    });
    for (const auto& s : setups) {
        const auto cols = data.feature_indices(s.features);
        const auto model = train(s.params, make_samples(data, train_rows, cols));
        rep.entries.push_back(entry("obfuscated", s.params.kind,
                                    evaluate(model, make_samples(data, obf_rows, cols))));
        rep.entries.push_back(entry("all-attacks", s.params.kind,
                                    evaluate(model, make_samples(data, attack_rows, cols))));
    }
    rep.attach_deltas(dl_cv, "");
    return rep;
}

ExperimentReport protocol_dol_cv(const Dataset& data, const std::vector<ClassifierSetup>& dl_setups,
                                 const std::vector<ClassifierSetup>& dol_setups, int k,
                                 std::uint64_t seed, const ExperimentReport& dl_cv) {
    ExperimentReport rep;
    rep.protocol = "dol-cv";
    const auto rows = all_rows(data);
    auto run = [&](const std::vector<ClassifierSetup>& setups, const char* group) {
        for (const auto& s : setups) {
            const auto samples = make_samples(data, rows, data.feature_indices(s.features));
            rep.entries.push_back(
                entry(group, s.params.kind, cross_validate(samples, s.params, k, seed).pooled));
        }
    };
    run(dl_setups, "ffs-dl");
    run(dol_setups, "ffs-dol");
    rep.attach_deltas(dl_cv, "");
    return rep;
}

LooGrouping parse_grouping(std::string_view text) {
    if (text == "per-instance" || text == "per_instance") return LooGrouping::PerInstance;
    if (text == "per-technique" || text == "per_technique") return LooGrouping::PerTechnique;
    throw Error(Errc::InvalidConfig, "unknown grouping '" + std::string(text) + "'");
}

ExperimentReport protocol_loo_obf(const Dataset& data, const std::vector<ClassifierSetup>& setups,
                                  LooGrouping grouping) {
    std::set<std::string> ids;
    for (const auto& r : data.rows) {
        if (is_obfuscated_attack(r)) ids.insert(r.obfuscation_id);
    }
    if (ids.empty()) {
        throw Error(Errc::DegenerateData, "no obfuscated attack rows to hold out");
    }

    // Groups in catalog order; ids outside the catalog form their own group.
    std::vector<std::pair<std::string, std::set<std::string>>> groups;
    auto group_of = [&](const std::string& id) -> std::string {
        if (grouping == LooGrouping::PerInstance) return id;
        try {
            return technique_of(id);
        } catch (const Error&) {
            return id;
        }
    };
    std::vector<std::string> order;
    if (grouping == LooGrouping::PerTechnique) {
        for (const auto& g : technique_groups()) order.push_back(g);
    } else {
        for (const auto& s : catalog()) order.push_back(s.id);
    }
    std::map<std::string, std::set<std::string>> members;
    for (const auto& id : ids) members[group_of(id)].insert(id);
    for (const auto& g : order) {
        if (auto it = members.find(g); it != members.end()) {
            groups.emplace_back(g, it->second);
            members.erase(it);
        }
    }
    for (auto& [g, m] : members) groups.emplace_back(g, m);

    ExperimentReport rep;
    rep.protocol = grouping == LooGrouping::PerInstance ? "loo-obf/per-instance" : "loo-obf/per-technique";
    std::vector<ReportEntry> slots(setups.size() * groups.size());
    parallel_for(slots.size(), [&](std::size_t job) {
        const auto& s = setups[job / groups.size()];
        const auto& [name, held] = groups[job % groups.size()];
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < data.rows.size(); ++i) {
            const auto& r = data.rows[i];
            const bool held_out = r.label == Label::Intrusion && held.count(r.obfuscation_id);
            (held_out ? test_rows : train_rows).push_back(i);
        }
        const auto cols = data.feature_indices(s.features);
        const auto model = train(s.params, make_samples(data, train_rows, cols));
        auto e = entry(name, s.params.kind, evaluate(model, make_samples(data, test_rows, cols)));
        e.ratio = fraction(e.confusion.tp, e.confusion.tp + e.confusion.fn);
        slots[job] = std::move(e);
    });

    for (std::size_t c = 0; c < setups.size(); ++c) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& e = slots[c * groups.size() + g];
            rep.entries.push_back(e);
            sum += e.ratio;
        }
        const double n = static_cast<double>(groups.size());
        const double mean = sum / n;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double t = slots[c * groups.size() + g].ratio - mean;
            sq += t * t;
        }
        ReportEntry m;
        m.group = "mean";
        m.kind = setups[c].params.kind;
        m.ratio = mean;
        m.summary = true;
        ReportEntry sd = m;
        sd.group = "std";
        sd.ratio = std::sqrt(sq / n);
        rep.entries.push_back(m);
        rep.entries.push_back(sd);
    }
    return rep;
}

ExperimentReport protocol_per_service(const Dataset& data,
                                      const std::vector<ClassifierSetup>& setups) {
    std::map<std::string, std::vector<std::size_t>> by_service;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        if (is_obfuscated_attack(data.rows[i])) by_service[data.rows[i].service].push_back(i);
    }
    const auto train_rows = dl_rows(data);
    std::map<std::string, std::vector<ReportEntry>> per;
    for (const auto& s : setups) {
        const auto cols = data.feature_indices(s.features);
        const auto model = train(s.params, make_samples(data, train_rows, cols));
        for (const auto& [svc, rows] : by_service) {
            auto e = entry(svc, s.params.kind, evaluate(model, make_samples(data, rows, cols)));
            e.ratio = fraction(e.confusion.fn, e.confusion.tp + e.confusion.fn);
            per[svc].push_back(std::move(e));
        }
    }
    std::vector<std::pair<double, std::string>> order;
    for (const auto& [svc, es] : per) {
        double sum = 0.0;
        for (const auto& e : es) sum += e.ratio;
        order.emplace_back(sum / static_cast<double>(es.size()), svc);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    ExperimentReport rep;
    rep.protocol = "per-service";
    for (const auto& [avg, svc] : order) {
        for (auto& e : per[svc]) rep.entries.push_back(std::move(e));
    }
    return rep;
}

DivergenceResult divergence_ratio(const Dataset& data, const std::vector<std::string>& features,
                                  double epsilon_rel) {
    if (!(epsilon_rel >= 0.0)) throw Error(Errc::InvalidConfig, "epsilon must be >= 0");
    const auto cols = data.feature_indices(features);
    std::map<std::string, std::vector<std::size_t>> direct;
    std::vector<std::size_t> obf;
    for (std::size_t i = 0; i < data.rows.size(); ++i) {
        const auto& r = data.rows[i];
        if (is_direct_attack(r)) direct[r.exploit].push_back(i);
        if (is_obfuscated_attack(r)) obf.push_back(i);
    }
    for (auto i : obf) {
        const auto& r = data.rows[i];
        if (!direct.count(r.exploit)) {
            throw Error(Errc::NoDirectCounterpart,
                        "no direct attack for exploit '" + r.exploit + "'");
        }
    }
    DivergenceResult out;
    out.features = features;
    out.obfuscated_rows = obf.size();
    for (auto c : cols) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& r : data.rows) {
            lo = std::min(lo, r.values[c]);
            hi = std::max(hi, r.values[c]);
        }
        const double eps = data.rows.empty() ? 0.0 : epsilon_rel * (hi - lo);
        std::size_t divergent = 0;
        for (auto i : obf) {
            const auto& r = data.rows[i];
            double best = std::numeric_limits<double>::infinity();
            for (auto j : direct[r.exploit]) {
                best = std::min(best, std::abs(r.values[c] - data.rows[j].values[c]));
            }
            divergent += best > eps;
        }
        out.ratio.push_back(fraction(divergent, obf.size()));
    }
    double sum = 0.0;
    for (double v : out.ratio) sum += v;
    out.average = out.ratio.empty() ? 0.0 : sum / static_cast<double>(out.ratio.size());
    return out;
}

}  // namespace asnm
