#include <doctest.h>

#include <cmath>
#include <numeric>

#include "asnm/classifiers.hpp"
#include "asnm/error.hpp"
#include "asnm/evaluation.hpp"
#include "asnm/pipeline.hpp"
#include "asnm/synthgen.hpp"

using namespace asnm;

namespace {

ScenarioSpec small_scenario(std::uint64_t seed, std::uint32_t legit, std::uint32_t attacks) {
    ScenarioSpec s;
    s.seed = seed;
    s.exploit_jitter = 0.0;
    s.services = {{"web", 80, legit, 0, 1.0, {{"probe", attacks}}}};
    return s;
}

std::vector<std::size_t> all_columns(const Dataset& d) {
    std::vector<std::size_t> cols(d.feature_names.size());
    std::iota(cols.begin(), cols.end(), 0);
    return cols;
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
    const auto spec = ScenarioSpec::standard(5);
    const auto a = generate(spec);
    const auto b = generate(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(write_canonical(a[i]) == write_canonical(b[i]));
    const auto c = generate(ScenarioSpec::standard(6));
    bool differs = c.size() != a.size();
    for (std::size_t i = 0; !differs && i < a.size(); ++i) differs = !(a[i] == c[i]);
    CHECK(differs);
}

TEST_CASE("zero counts give no traces") {
    CHECK(generate(small_scenario(1, 0, 0)).empty());
    ScenarioSpec none;
    CHECK(generate(none).empty());
}

TEST_CASE("generated traces satisfy the trace invariants and carry meta") {
    const auto traces = generate(ScenarioSpec::standard(2));
    std::size_t intrusions = 0;
    for (const auto& t : traces) {
        // Round-tripping through the validating constructor must not throw.
        CHECK_NOTHROW(Trace(t.events(), t.meta()));
        CHECK(read_canonical(write_canonical(t)) == t);
        CHECK_FALSE(t.meta_or("service").empty());
        const auto label = t.meta_or("label");
        CHECK((label == "intrusion" || label == "legitimate"));
        if (label == "intrusion") {
            ++intrusions;
            CHECK_FALSE(t.meta_or("exploit").empty());
        }
    }
    CHECK(intrusions == 16);
    const auto d = dataset_from_traces(traces);
    CHECK(d.count(Label::Intrusion) == 16);
    CHECK(d.size() > 1000);
}

TEST_CASE("dictionary bursts are labelled legitimate") {
    ScenarioSpec s;
    s.seed = 3;
    s.dictionary.session_median = 8;
    s.services = {{"ssh", 22, 0, 4, 1.0, {}}};
    const auto traces = generate(s);
    REQUIRE(traces.size() == 4);
    for (const auto& t : traces) {
        CHECK(t.meta_or("label") == "legitimate");
        CHECK(t.meta_or("exploit") == "dictionary");
    }
    const auto d = dataset_from_traces(traces);
    CHECK(d.count(Label::Intrusion) == 0);
    // Each burst is a session of several short connections.
    CHECK(d.size() > traces.size());
}

TEST_CASE("traffic from identical generators is indistinguishable") {
    // Two services with the same legitimate profile; one is relabelled.
    ScenarioSpec s;
    s.seed = 4;
    s.legitimate.session_median = 1;
    s.services = {{"a", 80, 300, 0, 1.0, {}}, {"b", 81, 300, 0, 1.0, {}}};
    auto d = dataset_from_traces(generate(s));
    for (auto& r : d.rows) {
        if (r.service == "b") r.label = Label::Intrusion;
    }
    REQUIRE(d.count(Label::Intrusion) == 300);
    const auto samples = make_samples(d, all_columns(d));
    for (auto k : {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression}) {
        const auto r = cross_validate(samples, HyperParams::defaults(k), 5, 1);
        CHECK(std::abs(r.metrics.avg_recall - 0.5) <= 0.05);
    }
}

TEST_CASE("well separated class generators are learnable by every classifier") {
    auto s = small_scenario(5, 150, 60);
    s.legitimate.session_median = 1;
    s.legitimate.out_size_mean = 150;
    s.legitimate.out_size_sigma = 40;
    s.legitimate.in_size_mean = 300;
    s.legitimate.in_size_sigma = 80;
    s.attack = s.legitimate;
    // Fourfold sizes outrun both the per-session and the per-exploit scaling.
    s.attack.out_size_mean *= 4;
    s.attack.in_size_mean *= 4;
    const auto d = dataset_from_traces(generate(s));
    const std::vector<std::size_t> cols = {d.feature_index("MeanPktLenIn")};
    const auto samples = make_samples(d, cols);
    for (auto k : all_classifiers()) {
        const auto params = grid_search(default_grid(k), samples, 5, 1);
        const auto r = cross_validate(samples, params, 5, 1);
        CHECK_MESSAGE(r.metrics.avg_recall >= 0.95, to_string(k));
    }
}

TEST_CASE("scenario documents round trip and reject unknown fields") {
    const auto spec = ScenarioSpec::standard(9);
    const auto text = scenario_to_json(spec);
    const auto back = scenario_from_json(text);
    CHECK(scenario_to_json(back) == text);
    CHECK(write_canonical(generate(back).front()) == write_canonical(generate(spec).front()));

    const auto partial = scenario_from_json(R"({"seed": 4, "attack": {"iat_ms_mean": 9}})");
    CHECK(partial.seed == 4);
    CHECK(partial.attack.iat_ms_mean == 9);
    CHECK(partial.attack.out_size_mean == ScenarioSpec::standard(4).attack.out_size_mean);

    CHECK_THROWS_AS(scenario_from_json(R"({"sead": 4})"), Error);
    CHECK_THROWS_AS(scenario_from_json(R"({"attack": {"packets": 3}})"), Error);
    CHECK_THROWS_AS(scenario_from_json(R"({"attack": {"fin_rate": 2}})"), Error);
    CHECK_THROWS_AS(scenario_from_json("[1, 2]"), Error);
}
