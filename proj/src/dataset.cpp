#include "asnm/dataset.hpp"

#include <charconv>
#include <cmath>

#include "asnm/error.hpp"

namespace asnm {

Dataset Dataset::with_standard_schema() {
    Dataset d;
    d.schema_version = FeatureSchema::standard().version();
    d.feature_names = FeatureSchema::standard().names();
    return d;
}

std::size_t Dataset::count(Label label) const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.label == label;
    return n;
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].values.size() != feature_names.size()) {
            throw Error(Errc::SchemaViolation, "row " + std::to_string(i) + " has wrong width");
        }
        for (double v : rows[i].values) {
            if (!std::isfinite(v)) {
                throw Error(Errc::SchemaViolation, "row " + std::to_string(i) + " not finite");
            }
        }
    }
}

std::size_t Dataset::feature_index(std::string_view name) const {
    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        if (feature_names[i] == name) return i;
    }
    throw Error(Errc::SchemaViolation, "unknown feature '" + std::string(name) + "'");
}

std::vector<std::size_t> Dataset::feature_indices(const std::vector<std::string>& names) const {
    std::vector<std::size_t> out;
    out.reserve(names.size());
    for (const auto& n : names) out.push_back(feature_index(n));
    return out;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_real(std::string_view text) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw Error(Errc::SchemaViolation, "bad real '" + std::string(text) + "'");
    }
    return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void check_cell(const std::string& s) {
    if (s.find_first_of(",\n\r") != std::string::npos) {
        throw Error(Errc::SchemaViolation, "value not representable in CSV: '" + s + "'");
    }
}

constexpr std::string_view kProvenance[] = {"label", "service", "exploit", "obfuscation_id"};

}  // namespace

std::string write_csv(const Dataset& data) {
    data.validate();
    std::string out = "# schema=" + data.schema_version + "\n";
    for (const auto& n : data.feature_names) {
        check_cell(n);
        out += n;
        out += ',';
    }
    out += "label,service,exploit,obfuscation_id\n";
    for (const auto& r : data.rows) {
        for (double v : r.values) {
            out += format_real(v);
            out += ',';
        }
        check_cell(r.service);
        check_cell(r.exploit);
        check_cell(r.obfuscation_id);
        out += to_string(r.label);
        out += ',' + r.service + ',' + r.exploit + ',' + r.obfuscation_id + '\n';
    }
    return out;
}

Dataset read_csv(std::string_view text) {
    Dataset d;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        pos = nl + 1;
        ++line_no;
        return true;
    };
    std::string_view line;
    if (!next_line(line)) throw Error(Errc::SchemaViolation, "empty CSV");
    if (line.starts_with("# schema=")) {
        d.schema_version = std::string(line.substr(9));
        if (!next_line(line)) throw Error(Errc::SchemaViolation, "missing CSV header");
    }
    auto header = split(line, ',');
    if (header.size() < 4) throw Error(Errc::SchemaViolation, "CSV header too short");
    for (std::size_t i = 0; i < 4; ++i) {
        if (header[header.size() - 4 + i] != kProvenance[i]) {
            throw Error(Errc::SchemaViolation, "CSV header must end with provenance columns");
        }
    }
    const std::size_t width = header.size() - 4;
    for (std::size_t i = 0; i < width; ++i) d.feature_names.emplace_back(header[i]);

    while (next_line(line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw Error(Errc::SchemaViolation, "line " + std::to_string(line_no) +
                                                   ": expected " + std::to_string(header.size()) +
                                                   " cells");
        }
        FeatureVector fv;
        fv.values.reserve(width);
        for (std::size_t i = 0; i < width; ++i) fv.values.push_back(parse_real(cells[i]));
        fv.label = parse_label(cells[width]);
        fv.service = std::string(cells[width + 1]);
        fv.exploit = std::string(cells[width + 2]);
        fv.obfuscation_id = std::string(cells[width + 3]);
        d.rows.push_back(std::move(fv));
    }
    d.validate();
    return d;
}

std::size_t Samples::count(Label label) const {
    std::size_t n = 0;
    for (auto l : y) n += l == label;
    return n;
}

Samples make_samples(const Dataset& data, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& features) {
    Samples s;
    s.x.reserve(rows.size());
    s.y.reserve(rows.size());
    for (auto r : rows) {
        const auto& fv = data.rows.at(r);
        std::vector<double> x;
        x.reserve(features.size());
        for (auto f : features) x.push_back(fv.values.at(f));
        s.x.push_back(std::move(x));
        s.y.push_back(fv.label);
    }
    return s;
}

Samples make_samples(const Dataset& data, const std::vector<std::size_t>& features) {
    std::vector<std::size_t> rows(data.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    return make_samples(data, rows, features);
}

Samples subset(const Samples& s, const std::vector<std::size_t>& rows) {
    Samples out;
    out.x.reserve(rows.size());
    out.y.reserve(rows.size());
    for (auto r : rows) {
        out.x.push_back(s.x.at(r));
        out.y.push_back(s.y.at(r));
    }
    return out;
}

Samples select_columns(const Samples& s, const std::vector<std::size_t>& columns) {
    Samples out;
    out.y = s.y;
    out.x.reserve(s.x.size());
    for (const auto& row : s.x) {
        std::vector<double> x;
        x.reserve(columns.size());
        for (auto c : columns) x.push_back(row.at(c));
        out.x.push_back(std::move(x));
    }
    return out;
}

}  // namespace asnm
