#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "asnm/cli.hpp"
#include "asnm/report.hpp"

namespace fs = std::filesystem;
using namespace asnm;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "asnmlab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("asnmlab-" + tag + "-" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

constexpr const char* kScenario = R"({
  "seed": 3,
  "services": [
    {"name": "web", "port": 80, "legitimate": 60, "attacks": [{"exploit": "upload", "count": 6}]},
    {"name": "db", "port": 5432, "legitimate": 40, "attacks": [{"exploit": "udf", "count": 6}]}
  ]
})";

// synth -> obfuscate all -> extract, returns the CSV path.
std::string build_dataset(const TempDir& dir) {
    cli::write_file(dir / "scenario.json", kScenario);
    REQUIRE(run_cli({"synth", "--input", dir / "scenario.json", "--output", dir / "traces"}).code == 0);
    const auto obf = run_cli({"obfuscate", "--input", dir / "traces", "--output", dir / "obf",
                              "--obfuscation", "all", "--seed", "7"});
    REQUIRE(obf.code == 0);
    CHECK(obf.out.find("36 obfuscated") != std::string::npos);
    REQUIRE(run_cli({"extract", "--input", dir / "obf", "--output", dir / "data.csv"}).code == 0);
    return dir / "data.csv";
}

}  // namespace

TEST_CASE("pipeline from scenario to reports") {
    TempDir dir("pipeline");
    const auto csv = build_dataset(dir);
    CHECK(fs::exists(dir / "traces/manifest.json"));
    CHECK(fs::exists(dir / "data.csv.manifest.json"));

    const auto dl = run_cli({"eval", "--input", csv, "--output", dir / "dl", "--protocol", "dl-cv",
                             "--classifier", "nb"});
    REQUIRE(dl.code == 0);
    const auto rep = read_report_csv(cli::read_file(dir / "dl/dl-cv.csv"));
    CHECK(rep.protocol == "dl-cv");
    REQUIRE(rep.entries.size() == 1);
    CHECK(rep.entries[0].kind == ClassifierKind::NaiveBayes);
    CHECK(fs::exists(dir / "dl/dl-cv.txt"));
    CHECK(fs::exists(dir / "dl/manifest.json"));

    const auto loo = run_cli({"eval", "--input", csv, "--output", dir / "loo", "--protocol", "loo-obf",
                              "--group", "per-technique", "--classifier", "nb"});
    REQUIRE(loo.code == 0);
    const auto lrep = read_report_csv(cli::read_file(dir / "loo/loo-obf-per-technique.csv"));
    std::set<std::string> groups;
    for (const auto& e : lrep.entries) {
        if (!e.summary) groups.insert(e.group);
    }
    CHECK(groups.size() == 7);
    CHECK(groups.count("k,l,m,n") == 1);

    const auto shown = run_cli({"report", "--input", dir / "loo"});
    CHECK(shown.code == 0);
    CHECK(shown.out.find("k,l,m,n") != std::string::npos);
}

TEST_CASE("identical invocations give identical artifacts") {
    TempDir a("det-a");
    TempDir b("det-b");
    build_dataset(a);
    build_dataset(b);
    for (const auto* f : {"traces/manifest.json", "obf/manifest.json", "data.csv", "data.csv.manifest.json"}) {
        CHECK_MESSAGE(cli::sha256_hex(cli::read_file(a / f)) == cli::sha256_hex(cli::read_file(b / f)), f);
    }
}

TEST_CASE("errors are reported by category with exit status 2") {
    TempDir dir("errors");
    const auto bad_id = run_cli({"obfuscate", "--input", dir / "none", "--output", dir / "out",
                                 "--obfuscation", "z"});
    CHECK(bad_id.code == 2);
    CHECK(bad_id.err.rfind("error: InvalidObfuscationId: ", 0) == 0);

    const auto missing = run_cli({"extract", "--input", dir / "none", "--output", dir / "x.csv"});
    CHECK(missing.code == 2);
    CHECK(missing.err.rfind("error: IoError: ", 0) == 0);

    const auto protocol = run_cli({"eval", "--input", dir / "none", "--output", dir / "e",
                                   "--protocol", "nope"});
    CHECK(protocol.code == 2);
    CHECK(protocol.err.rfind("error: InvalidConfig: ", 0) == 0);

    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
}

TEST_CASE("seed resolution and version") {
    TempDir dir("seed");
    cli::write_file(dir / "s.json",
                    R"({"services": [{"name": "web", "legitimate": 2, "attacks": [{"exploit": "x"}]}]})");
    REQUIRE(run_cli({"synth", "--input", dir / "s.json", "--output", dir / "traces"}).code == 0);
    const auto seed_of = [&](std::vector<std::string> extra, const std::string& sub) {
        std::vector<std::string> args = {"obfuscate", "--input", dir / "traces", "--output", dir / sub,
                                         "--obfuscation", "a"};
        args.insert(args.end(), extra.begin(), extra.end());
        REQUIRE(run_cli(args).code == 0);
        const auto text = cli::read_file(dir / (sub + "/manifest.json"));
        const auto at = text.find("\"seed\": ");
        return std::stoull(text.substr(at + 8));
    };
    ::unsetenv("ASNMLAB_SEED");
    CHECK(seed_of({}, "default") == 1);
    ::setenv("ASNMLAB_SEED", "42", 1);
    CHECK(seed_of({}, "env") == 42);
    CHECK(seed_of({"--seed", "5"}, "flag") == 5);
    ::setenv("ASNMLAB_SEED", "x", 1);
    CHECK(run_cli({"obfuscate", "--input", dir / "traces", "--output", dir / "bad", "--obfuscation", "a"})
              .code == 2);
    ::unsetenv("ASNMLAB_SEED");

    const auto v = run_cli({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == "asnmlab " + std::string(cli::kVersion) + "\n");
}

TEST_CASE("delay direction is selectable") {
    TempDir dir("directions");
    cli::write_file(dir / "s.json",
                    R"({"services": [{"name": "web", "legitimate": 1, "attacks": [{"exploit": "x"}]}]})");
    REQUIRE(run_cli({"synth", "--input", dir / "s.json", "--output", dir / "traces"}).code == 0);
    REQUIRE(run_cli({"obfuscate", "--input", dir / "traces", "--output", dir / "one", "--obfuscation", "a"})
                .code == 0);
    REQUIRE(run_cli({"obfuscate", "--input", dir / "traces", "--output", dir / "both", "--obfuscation", "a",
                     "--both-directions"})
                .code == 0);
    const auto one = cli::read_trace_dir(dir / "one");
    const auto both = cli::read_trace_dir(dir / "both");
    REQUIRE(one.size() == 3);
    REQUIRE(both.size() == 3);
    // With every event delayed by the same constant, the shape is unchanged.
    const auto& direct = both[1].events();
    const auto& shifted = both[2].events();
    REQUIRE(direct.size() == shifted.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK(shifted[i].timestamp_us - direct[i].timestamp_us == 1'000'000);
    }
    CHECK_FALSE(one[2] == both[2]);
}
