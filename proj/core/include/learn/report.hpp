#pragma once

#include <string>
#include <vector>

#include "learn/results.hpp"

namespace learn {

enum class ReportFormat { csv, svg };

ReportFormat parse_report_format(std::string_view text);

// "<n>-shot" for seed checkpoints; "<r>N" with r = target / pool size at two
// decimals for label checkpoints (e.g. "0.25N").
std::string checkpoint_label(const ResultsRecord& record);

struct ReportRow {
  std::string algorithm;
  std::string stage;  // "<index>:<kind>"
  std::string checkpoint;
  double accuracy = 0.0;
};

struct ReportTable {
  std::vector<ReportRow> rows;  // one per record, file order
};

ReportTable build_report_table(const std::vector<ResultsRecord>& records);

// Header `algorithm,stage,checkpoint,accuracy`; accuracy with 4 decimals.
std::string render_csv(const ReportTable& table);

// Accuracy-vs-checkpoint line plot, one polyline per stage. Fixed layout and
// number formatting so identical input gives identical bytes.
std::string render_svg(const std::vector<ResultsRecord>& records);

// Throws EmptyResults for an empty record list.
std::string render_report(const std::vector<ResultsRecord>& records, ReportFormat format);

}  // namespace learn
