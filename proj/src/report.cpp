#include "asnm/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "asnm/error.hpp"

namespace asnm {

std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", fraction * 100.0);
    return buf;
}

std::string signed_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%+.2f%%", fraction * 100.0);
    return buf;
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size(), 0);
    auto widen = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], r[i].size());
        }
    };
    widen(header);
    for (const auto& r : rows) widen(r);
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < width.size(); ++i) {
            const std::string cell = i < r.size() ? r[i] : "";
            const std::string pad(width[i] - cell.size(), ' ');
            if (i) os << "  ";
            os << (i == 0 ? cell + pad : pad + cell);
        }
        os << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    os << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
    for (const auto& r : rows) line(r);
    return os.str();
}

namespace {

std::string title(const ExperimentReport& r) {
    if (r.protocol == "dl-cv") return "Direct attacks and legitimate traffic cross validation";
    if (r.protocol == "evasion") return "Prediction of obfuscated and all attacks (trained on direct + legitimate)";
    if (r.protocol == "dol-cv") return "Whole dataset cross validation";
    if (r.protocol.rfind("loo-obf", 0) == 0) return "Ratios of correctly detected unknown obfuscated attacks";
    if (r.protocol == "per-service") return "Successfully obfuscated attacks (evasions) per service";
    return r.protocol;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> f;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            f.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    f.push_back(std::move(cur));
    return f;
}

bool grouped_ratio(const ExperimentReport& r) {
    return r.protocol.rfind("loo-obf", 0) == 0 || r.protocol == "per-service";
}

}  // namespace

std::string report_text(const ExperimentReport& report) {
    std::ostringstream os;
    os << title(report) << "  [" << report.protocol << "]\n";
    if (!report.baseline.empty()) os << "deltas relative to " << report.baseline << '\n';
    os << '\n';

    if (grouped_ratio(report)) {
        // Matrix: groups as rows, classifiers as columns, plus an average column.
        std::vector<ClassifierKind> kinds;
        std::vector<std::string> groups;
        std::map<std::pair<std::string, ClassifierKind>, double> cell;
        for (const auto& e : report.entries) {
            if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) kinds.push_back(e.kind);
            if (std::find(groups.begin(), groups.end(), e.group) == groups.end()) groups.push_back(e.group);
            cell[{e.group, e.kind}] = e.ratio;
        }
        std::vector<std::string> header{report.protocol == "per-service" ? "Service" : "Held out"};
        for (auto k : kinds) header.emplace_back(to_string(k));
        header.emplace_back("Average");
        std::vector<std::vector<std::string>> rows;
        for (const auto& g : groups) {
            std::vector<std::string> r{g};
            double sum = 0.0;
            for (auto k : kinds) {
                const double v = cell[{g, k}];
                sum += v;
                r.push_back(percent(v));
            }
            r.push_back(percent(sum / static_cast<double>(kinds.size())));
            rows.push_back(std::move(r));
        }
        os << render_table(header, rows);
        return os.str();
    }

    const bool with_delta = std::any_of(report.entries.begin(), report.entries.end(),
                                        [](const auto& e) { return e.delta.has_value(); });
    std::vector<std::string> header{"Classifier", "Group", "TPR", "FPR", "F1", "Avg. Recall"};
    if (with_delta) {
        header.emplace_back("dTPR");
        header.emplace_back("dFPR");
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : report.entries) {
        std::vector<std::string> r{std::string(display_name(e.kind)), e.group.empty() ? "-" : e.group,
                                   percent(e.metrics.tpr), percent(e.metrics.fpr),
                                   percent(e.metrics.f1), percent(e.metrics.avg_recall)};
        if (with_delta) {
            r.push_back(e.delta ? signed_percent(e.delta->tpr) : "");
            r.push_back(e.delta ? signed_percent(e.delta->fpr) : "");
        }
        rows.push_back(std::move(r));
    }
    os << render_table(header, rows);
    return os.str();
}

std::string report_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os << "# schema=" << kReportSchema << '\n';
    os << "protocol,baseline,group,classifier,summary,tp,fp,tn,fn,tpr,fpr,f1,avg_recall,ratio,"
          "d_tpr,d_fpr,d_f1,d_avg_recall\n";
    for (const auto& e : report.entries) {
        os << report.protocol << ',' << report.baseline << ',' << csv_field(e.group) << ',' << to_string(e.kind)
           << ',' << (e.summary ? 1 : 0) << ',' << e.confusion.tp << ',' << e.confusion.fp << ','
           << e.confusion.tn << ',' << e.confusion.fn << ',' << format_real(e.metrics.tpr) << ','
           << format_real(e.metrics.fpr) << ',' << format_real(e.metrics.f1) << ','
           << format_real(e.metrics.avg_recall) << ',' << format_real(e.ratio);
        if (e.delta) {
            os << ',' << format_real(e.delta->tpr) << ',' << format_real(e.delta->fpr) << ','
               << format_real(e.delta->f1) << ',' << format_real(e.delta->avg_recall);
        } else {
            os << ",,,,";
        }
        os << '\n';
    }
    return os.str();
}

ExperimentReport read_report_csv(std::string_view text) {
    ExperimentReport rep;
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line) || line != "# schema=" + std::string(kReportSchema)) {
        throw Error(Errc::SchemaViolation, "report: missing schema line");
    }
    if (!std::getline(is, line)) throw Error(Errc::SchemaViolation, "report: missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = csv_split(line);
        if (f.size() != 18) throw Error(Errc::SchemaViolation, "report: bad field count");
        rep.protocol = f[0];
        rep.baseline = f[1];
        ReportEntry e;
        e.group = f[2];
        e.kind = parse_classifier(f[3]);
        e.summary = f[4] == "1";
        auto count = [](const std::string& s) { return static_cast<std::size_t>(std::stoull(s)); };
        e.confusion = {count(f[5]), count(f[6]), count(f[7]), count(f[8])};
        e.metrics = {parse_real(f[9]), parse_real(f[10]), parse_real(f[11]), parse_real(f[12])};
        e.ratio = parse_real(f[13]);
        if (!f[14].empty()) {
            e.delta = Metrics{parse_real(f[14]), parse_real(f[15]), parse_real(f[16]), parse_real(f[17])};
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

std::string report_plot_data(const ExperimentReport& report) {
    std::ostringstream os;
    os << "# schema=" << kReportSchema << " plot " << report.protocol << '\n';
    const bool ratio = grouped_ratio(report);
    std::vector<ClassifierKind> kinds;
    for (const auto& e : report.entries) {
        if (std::find(kinds.begin(), kinds.end(), e.kind) == kinds.end()) kinds.push_back(e.kind);
    }
    for (auto k : kinds) {
        os << "\n# " << to_string(k) << " (x y group)\n";
        std::size_t x = 0;
        for (const auto& e : report.entries) {
            if (e.kind != k || e.summary) continue;
            os << x++ << ' ' << format_real(ratio ? e.ratio : e.metrics.tpr) << ' '
               << (e.group.empty() ? "-" : e.group) << '\n';
        }
    }
    return os.str();
}

std::string divergence_text(const DivergenceResult& result) {
    std::ostringstream os;
    os << "Divergent obfuscated attacks per feature (" << result.obfuscated_rows
       << " obfuscated rows)\n\n";
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        rows.push_back({result.features[i], percent(result.ratio[i])});
    }
    rows.push_back({"Average", percent(result.average)});
    os << render_table({"Feature", "Divergent"}, rows);
    return os.str();
}

std::string divergence_csv(const DivergenceResult& result) {
    std::ostringstream os;
    os << "# schema=" << kReportSchema << '\n' << "feature,ratio\n";
    for (std::size_t i = 0; i < result.features.size(); ++i) {
        os << result.features[i] << ',' << format_real(result.ratio[i]) << '\n';
    }
    os << "average," << format_real(result.average) << '\n';
    return os.str();
}

}  // namespace asnm
