#include "asnm/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "asnm/classifiers.hpp"
#include "asnm/dataset.hpp"
#include "asnm/error.hpp"
#include "asnm/evaluation.hpp"
#include "asnm/obfuscation.hpp"
#include "asnm/parallel.hpp"
#include "asnm/pcap.hpp"
#include "asnm/pipeline.hpp"
#include "asnm/report.hpp"
#include "asnm/selection.hpp"
#include "asnm/synthgen.hpp"

namespace asnm::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::IoError, "sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::IoError, "write failed for " + p.string());
}

void write_trace_dir(const fs::path& dir, const std::vector<Trace>& traces) {
    fs::create_directories(dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".trace") fs::remove(entry.path());
    }
    char name[32];
    for (std::size_t i = 0; i < traces.size(); ++i) {
        std::snprintf(name, sizeof name, "%06zu.trace", i);
        write_file(dir / name, write_canonical(traces[i]));
    }
}

std::vector<Trace> read_trace_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        return {read_canonical(read_file(dir))};
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".trace") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Trace> out;
    for (const auto& f : files) out.push_back(read_canonical(read_file(f)));
    return out;
}

namespace {

struct Options {
    std::string input;
    std::string output;
    std::optional<std::uint64_t> seed;
    int folds = 5;
    std::string classifier = "all";
    std::string obfuscation = "all";
    std::optional<std::size_t> per_trace;
    std::string features;
    std::string selection;
    std::string protocol;
    std::string group = "per-technique";
    unsigned jobs = 1;
    std::vector<std::string> meta;
    bool both_directions = false;
    double epsilon = kDefaultDivergenceEpsilon;
};

std::uint64_t effective_seed(const Options& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("ASNMLAB_SEED"); env && *env) {
        char* end = nullptr;
        const auto v = std::strtoull(env, &end, 10);
        if (*end != '\0') throw Error(Errc::InvalidConfig, "ASNMLAB_SEED is not an integer");
        return v;
    }
    return 1;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw Error(Errc::InvalidConfig, std::string(flag) + " is required");
}

void require_input(const Options& o) {
    require(o.input, "--input");
    if (!fs::exists(o.input)) throw Error(Errc::IoError, "input not found: " + o.input);
}

/// Records inputs, outputs and settings beside the artifacts. No timestamps,
/// so identical runs give identical manifests.
class Manifest {
public:
    Manifest(std::string command, const Options& o, std::uint64_t seed) {
        doc_ = {{"schema", "asnmlab-manifest/v1"},
                {"tool", "asnmlab " + std::string(kVersion)},
                {"feature_schema", FeatureSchema::standard().version()},
                {"command", std::move(command)},
                {"seed", seed},
                {"folds", o.folds},
                {"inputs", json::array()},
                {"outputs", json::array()}};
    }

    void setting(const std::string& key, json value) { doc_["settings"][key] = std::move(value); }

    void input(const fs::path& p) { add("inputs", p); }

    void output(const fs::path& p, std::string_view content) {
        write_file(p, content);
        doc_["outputs"].push_back({{"path", p.filename().string()}, {"sha256", sha256_hex(content)}});
    }

    void output_existing(const fs::path& p) { add("outputs", p); }

    void save(const fs::path& where) const { write_file(where, doc_.dump(2) + "\n"); }

private:
    void add(const char* key, const fs::path& p) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                doc_[key].push_back({{"path", (p.filename() / f.filename()).string()},
                                     {"sha256", sha256_hex(read_file(f))}});
            }
        } else {
            doc_[key].push_back({{"path", p.filename().string()}, {"sha256", sha256_hex(read_file(p))}});
        }
    }

    json doc_;
};

fs::path manifest_path_for(const fs::path& output) {
    if (fs::is_directory(output)) return output / "manifest.json";
    return fs::path(output.string() + ".manifest.json");
}

std::vector<ClassifierKind> kinds_of(const std::string& text) {
    if (text == "all") return all_classifiers();
    std::vector<ClassifierKind> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(parse_classifier(part));
    if (out.empty()) throw Error(Errc::InvalidConfig, "no classifier given");
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const Options& o, std::ostream& out) {
    require_input(o);
    require(o.output, "--output");
    TraceMeta meta;
    for (const auto& kv : o.meta) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(Errc::InvalidConfig, "--meta expects key=value");
        meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!meta.count(std::string(meta_key::source))) meta[std::string(meta_key::source)] = "pcap";
    const auto bytes = read_file(o.input);
    const auto res = ingest_pcap(
        std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), meta);
    Manifest m("ingest", o, effective_seed(o));
    m.input(o.input);
    m.setting("skipped_frames", res.skipped);
    m.output(o.output, write_canonical(res.trace));
    m.save(manifest_path_for(o.output));
    out << "ingested " << res.trace.events().size() << " TCP events (" << res.skipped
        << " frames skipped)\n";
    return 0;
}

int cmd_synth(const Options& o, std::ostream& out) {
    require(o.output, "--output");
    const auto seed = effective_seed(o);
    ScenarioSpec spec = ScenarioSpec::standard(seed);
    if (!o.input.empty()) {
        require_input(o);
        spec = scenario_from_json(read_file(o.input));
        if (o.seed) spec.seed = *o.seed;
    }
    const auto traces = generate(spec);
    write_trace_dir(o.output, traces);
    Manifest m("synth", o, spec.seed);
    if (!o.input.empty()) m.input(o.input);
    m.setting("scenario", json::parse(scenario_to_json(spec)));
    m.output_existing(o.output);
    m.save(fs::path(o.output) / "manifest.json");
    out << "generated " << traces.size() << " traces into " << o.output << '\n';
    return 0;
}

std::vector<ObfuscationSpec> specs_for(const std::string& sel) {
    if (sel == "all") return catalog();
    if (fs::exists(sel) && !fs::is_directory(sel)) return specs_from_json(read_file(sel));
    std::vector<ObfuscationSpec> out;
    for (const auto& id : split_list(sel)) out.push_back(catalog_spec(id));
    if (out.empty()) throw Error(Errc::InvalidObfuscationId, "empty obfuscation selection");
    return out;
}

int cmd_obfuscate(const Options& o, std::ostream& out) {
    require(o.output, "--output");
    const auto specs = specs_for(o.obfuscation);  // validate before touching inputs
    require_input(o);
    const auto seed = effective_seed(o);
    const std::size_t per_trace = o.per_trace.value_or(o.obfuscation == "all" ? 3 : 1);
    auto traces = read_trace_dir(o.input);
    const auto directions = o.both_directions ? Directions::Both : Directions::ClientToServer;
    auto run = obfuscate_traces(traces, specs, per_trace, seed, directions);
    write_trace_dir(o.output, run.traces);
    Manifest m("obfuscate", o, seed);
    m.input(o.input);
    m.setting("obfuscation", o.obfuscation);
    m.setting("per_trace", per_trace);
    m.setting("directions", o.both_directions ? "both" : "client_to_server");
    m.setting("failures", run.failures);
    m.output_existing(o.output);
    m.save(fs::path(o.output) / "manifest.json");
    out << "wrote " << run.traces.size() << " traces (" << run.traces.size() - traces.size()
        << " obfuscated, " << run.failures.size() << " infeasible)\n";
    return 0;
}

int cmd_extract(const Options& o, std::ostream& out) {
    require_input(o);
    require(o.output, "--output");
    const auto data = dataset_from_traces(read_trace_dir(o.input));
    Manifest m("extract", o, effective_seed(o));
    m.input(o.input);
    m.output(o.output, write_csv(data));
    m.save(manifest_path_for(o.output));
    out << "extracted " << data.size() << " connections (" << data.count(Label::Intrusion)
        << " intrusion)\n";
    return 0;
}

Dataset load_dataset(const Options& o) {
    require_input(o);
    auto data = read_csv(read_file(o.input));
    data.validate();
    return data;
}

SelectionSet load_selections(const std::string& path, const std::vector<ClassifierKind>& kinds) {
    const auto records = read_selections(read_file(path));
    SelectionSet out;
    for (const auto& r : records) {
        const auto k = r.result.params.kind;
        if (std::find(kinds.begin(), kinds.end(), k) == kinds.end()) continue;
        (r.variant == "dl" ? out[k].dl : out[k].dol) = r.result;
    }
    for (auto k : kinds) {
        if (!out.count(k)) {
            throw Error(Errc::InvalidConfig, "selection file has no entry for " + std::string(to_string(k)));
        }
    }
    return out;
}

/// Selections from a file, from an explicit feature list (grid-searched
/// parameters), or computed on the spot.
SelectionSet resolve_selections(const Options& o, const Dataset& data,
                                const std::vector<ClassifierKind>& kinds, std::uint64_t seed) {
    if (!o.selection.empty()) return load_selections(o.selection, kinds);
    if (!o.features.empty() && o.features != "ffs-dl" && o.features != "ffs-dol") {
        const auto names = split_list(o.features);
        const auto cols = data.feature_indices(names);
        SelectionSet out;
        for (auto k : kinds) {
            for (bool dol : {false, true}) {
                const auto rows = dol ? all_rows(data) : dl_rows(data);
                SelectionResult r;
                r.params = grid_search(default_grid(k), make_samples(data, rows, cols), o.folds, seed);
                r.features = names;
                (dol ? out[k].dol : out[k].dl) = r;
            }
        }
        return out;
    }
    return select_all(data, kinds, o.folds, seed);
}

int cmd_ffs(const Options& o, std::ostream& out) {
    require(o.output, "--output");
    const auto data = load_dataset(o);
    const auto seed = effective_seed(o);
    const auto kinds = kinds_of(o.classifier);
    const auto sel = select_all(data, kinds, o.folds, seed);
    std::vector<SelectionRecord> records;
    std::string text;
    for (auto k : kinds) {
        records.push_back({"dl", sel.at(k).dl});
        records.push_back({"dol", sel.at(k).dol});
    }
    for (const auto& r : records) text += selection_report(r) + "\n";
    Manifest m("ffs", o, seed);
    m.input(o.input);
    m.output(o.output, write_selections(records, data.schema_version));
    m.output(fs::path(o.output).replace_extension(".txt"), text);
    m.save(manifest_path_for(o.output));
    out << text;
    return 0;
}

int cmd_train(const Options& o, std::ostream& out) {
    require(o.output, "--output");
    const auto data = load_dataset(o);
    const auto seed = effective_seed(o);
    const auto kinds = kinds_of(o.classifier);
    if (kinds.size() != 1) throw Error(Errc::InvalidConfig, "train needs exactly one --classifier");
    const bool dol = o.features == "ffs-dol";
    const auto sel = resolve_selections(o, data, kinds, seed);
    const auto& r = dol ? sel.at(kinds[0]).dol : sel.at(kinds[0]).dl;
    const auto rows = dol ? all_rows(data) : dl_rows(data);
    auto model = train(r.params, make_samples(data, rows, data.feature_indices(r.features)));
    model.feature_names = r.features;
    Manifest m("train", o, seed);
    m.input(o.input);
    if (!o.selection.empty()) m.input(o.selection);
    m.output(o.output, save_model(model));
    m.save(manifest_path_for(o.output));
    out << "trained " << display_name(kinds[0]) << " (" << r.params.describe() << ") on "
        << r.features.size() << " feature(s)\n";
    return 0;
}

void emit_report(Manifest& m, const fs::path& dir, const std::string& stem,
                 const ExperimentReport& rep, std::ostream& out) {
    const auto text = report_text(rep);
    m.output(dir / (stem + ".txt"), text);
    m.output(dir / (stem + ".csv"), report_csv(rep));
    m.output(dir / (stem + ".plot"), report_plot_data(rep));
    out << text << '\n';
}

int cmd_eval(const Options& o, std::ostream& out) {
    require(o.output, "--output");
    require(o.protocol, "--protocol");
    static const std::vector<std::string> protocols = {"dl-cv", "dol-cv", "evasion",
                                                       "loo-obf", "per-service", "divergence"};
    if (std::find(protocols.begin(), protocols.end(), o.protocol) == protocols.end()) {
        throw Error(Errc::InvalidConfig, "unknown protocol '" + o.protocol + "'");
    }
    const auto grouping = parse_grouping(o.group);
    const auto data = load_dataset(o);
    const auto seed = effective_seed(o);
    const auto kinds = kinds_of(o.classifier);
    const auto sel = resolve_selections(o, data, kinds, seed);
    const fs::path dir(o.output);
    fs::create_directories(dir);

    Manifest m("eval", o, seed);
    m.input(o.input);
    if (!o.selection.empty()) m.input(o.selection);
    m.setting("protocol", o.protocol);
    m.setting("classifiers", o.classifier);

    const auto dl = setups(sel, false);
    const auto dol = setups(sel, true);
    if (o.protocol == "dl-cv" || o.protocol == "evasion" || o.protocol == "dol-cv") {
        const auto base = protocol_dl_cv(data, dl, o.folds, seed);
        emit_report(m, dir, "dl-cv", base, out);
        if (o.protocol == "evasion") emit_report(m, dir, "evasion", protocol_evasion(data, dl, base), out);
        if (o.protocol == "dol-cv") {
            emit_report(m, dir, "dol-cv", protocol_dol_cv(data, dl, dol, o.folds, seed, base), out);
        }
    } else if (o.protocol == "loo-obf") {
        m.setting("group", o.group);
        const auto stem = grouping == LooGrouping::PerInstance ? "loo-obf-per-instance" : "loo-obf-per-technique";
        emit_report(m, dir, stem, protocol_loo_obf(data, dol, grouping), out);
    } else if (o.protocol == "per-service") {
        emit_report(m, dir, "per-service", protocol_per_service(data, dl), out);
    } else {
        m.setting("epsilon", o.epsilon);
        const auto names = union_of_dl_features(data, sel);
        const auto res = divergence_ratio(data, names, o.epsilon);
        const auto text = divergence_text(res);
        m.output(dir / "divergence.txt", text);
        m.output(dir / "divergence.csv", divergence_csv(res));
        out << text;
    }
    m.save(dir / "manifest.json");
    return 0;
}

int cmd_report(const Options& o, std::ostream& out) {
    require_input(o);
    std::vector<fs::path> files;
    if (fs::is_directory(o.input)) {
        for (const auto& e : fs::directory_iterator(o.input)) {
            if (e.path().extension() == ".csv" && e.path().stem() != "divergence") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(o.input);
    }
    std::string text;
    for (const auto& f : files) text += report_text(read_report_csv(read_file(f))) + "\n";
    if (o.output.empty()) {
        out << text;
    } else {
        Manifest m("report", o, effective_seed(o));
        m.input(o.input);
        m.output(o.output, text);
        m.save(manifest_path_for(o.output));
    }
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"asnmlab: obfuscation, feature extraction and evasion experiments on TCP traces"};
    app.set_version_flag("--version", "asnmlab " + std::string(kVersion));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--input", o.input, "input file or directory");
        sub->add_option("--output", o.output, "output file or directory");
        sub->add_option("--seed", o.seed, "seed (falls back to ASNMLAB_SEED, then 1)");
        sub->add_option("--jobs", o.jobs, "worker cap, 0 = all cores")->check(CLI::NonNegativeNumber);
    };
    auto ml = [&](CLI::App* sub) {
        sub->add_option("--folds", o.folds, "cross-validation folds")->check(CLI::Range(2, 1000));
        sub->add_option("--classifier", o.classifier, "nb, nbk, logreg, dtree, svm or all");
        sub->add_option("--features", o.features, "ffs-dl, ffs-dol or a comma-separated list");
        sub->add_option("--selection", o.selection, "selection file written by ffs");
    };

    auto* ingest = app.add_subcommand("ingest", "convert a pcap capture to a canonical trace");
    common(ingest);
    ingest->add_option("--meta", o.meta, "trace metadata as key=value (repeatable)");

    auto* synth = app.add_subcommand("synth", "generate synthetic traces (--input takes a scenario)");
    common(synth);

    auto* obf = app.add_subcommand("obfuscate", "apply obfuscation operators to attack traces");
    common(obf);
    obf->add_option("--obfuscation", o.obfuscation, "all, catalog ids (a,b,...) or a spec file");
    obf->add_option("--per-trace", o.per_trace, "operators per attack trace")->check(CLI::PositiveNumber);
    obf->add_flag("--both-directions", o.both_directions, "delay server replies too");

    auto* extract = app.add_subcommand("extract", "extract connection features to CSV");
    common(extract);

    auto* ffs = app.add_subcommand("ffs", "forward feature selection (DL and DOL)");
    common(ffs);
    ml(ffs);

    auto* trn = app.add_subcommand("train", "train one classifier and save the model");
    common(trn);
    ml(trn);

    auto* ev = app.add_subcommand("eval", "run an evaluation protocol");
    common(ev);
    ml(ev);
    ev->add_option("--protocol", o.protocol, "dl-cv, dol-cv, evasion, loo-obf, per-service, divergence");
    ev->add_option("--group", o.group, "per-instance or per-technique (loo-obf)");
    ev->add_option("--epsilon", o.epsilon, "relative divergence threshold");

    auto* rep = app.add_subcommand("report", "render report CSVs as text tables");
    common(rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion& e) {
        out << "asnmlab " << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: InvalidConfig: " << e.what() << '\n';
        return 2;
    }

    try {
        set_max_jobs(o.jobs);
        if (*ingest) return cmd_ingest(o, out);
        if (*synth) return cmd_synth(o, out);
        if (*obf) return cmd_obfuscate(o, out);
        if (*extract) return cmd_extract(o, out);
        if (*ffs) return cmd_ffs(o, out);
        if (*trn) return cmd_train(o, out);
        if (*ev) return cmd_eval(o, out);
        if (*rep) return cmd_report(o, out);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: IoError: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace asnm::cli
