#pragma once

#include <string>
#include <vector>

#include "asnm/evaluation.hpp"

namespace asnm {

/// Percentage with two decimals, e.g. "98.15%"; signed form prefixes '+'.
std::string percent(double fraction);
std::string signed_percent(double fraction);

/// Left-aligned first column, right-aligned remaining columns.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

std::string report_text(const ExperimentReport& report);
/// One line per entry: protocol,group,classifier,tp,fp,tn,fn,tpr,fpr,f1,avg_recall,ratio,
/// then delta columns (empty when absent). Leading `# schema=` line.
std::string report_csv(const ExperimentReport& report);
ExperimentReport read_report_csv(std::string_view text);
/// "x y" series for plotting: group index and TPR (or ratio) per classifier.
std::string report_plot_data(const ExperimentReport& report);

std::string divergence_text(const DivergenceResult& result);
std::string divergence_csv(const DivergenceResult& result);

inline constexpr std::string_view kReportSchema = "asnmlab-report/v1";

}  // namespace asnm
