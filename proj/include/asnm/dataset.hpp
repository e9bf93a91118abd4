#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "asnm/features.hpp"

namespace asnm {

/// Labelled feature vectors sharing one schema, with provenance.
struct Dataset {
    std::string schema_version;
    std::vector<std::string> feature_names;
    std::vector<FeatureVector> rows;

    static Dataset with_standard_schema();

    std::size_t size() const noexcept { return rows.size(); }
    std::size_t count(Label label) const;
    /// Throws SchemaViolation if a row's width differs from the schema or a
    /// value is not finite.
    void validate() const;
    std::size_t feature_index(std::string_view name) const;
    std::vector<std::size_t> feature_indices(const std::vector<std::string>& names) const;
};

/// CSV with a leading `# schema=<version>` line, a header of feature names
/// followed by label,service,exploit,obfuscation_id, and one row per vector.
/// Reals are written in shortest round-trip form.
std::string write_csv(const Dataset& data);
Dataset read_csv(std::string_view text);

/// Design matrix for the classifiers: selected rows and feature columns.
struct Samples {
    std::vector<std::vector<double>> x;
    std::vector<Label> y;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t dims() const noexcept { return x.empty() ? 0 : x.front().size(); }
    std::size_t count(Label label) const;
};

Samples make_samples(const Dataset& data, const std::vector<std::size_t>& rows,
                     const std::vector<std::size_t>& features);
Samples make_samples(const Dataset& data, const std::vector<std::size_t>& features);
Samples subset(const Samples& s, const std::vector<std::size_t>& rows);
Samples select_columns(const Samples& s, const std::vector<std::size_t>& columns);

/// Shortest decimal string that parses back to the same double.
std::string format_real(double v);
double parse_real(std::string_view text);

}  // namespace asnm
