#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "delaylab/experiment.hpp"

namespace delaylab {

enum class ReportFormat { Csv, Text };

ReportFormat parse_report_format(std::string_view name);

// CSV: header "lambda1,...,lambdaN,d1,...,dN,d_analytic", one line per row.
// The d_i columns hold the DCF simulation (or, failing that, the polling
// oracle) mean delay in ms; absent engines leave their fields empty.
// Delays print with one decimal.
//
// Text: one aligned block per table mirroring the published layout, with
// confidence half-widths and the oracle columns when those engines ran.
void emit_report(const ComparisonTable& table, ReportFormat format, std::ostream& out);
std::string render_report(const ComparisonTable& table, ReportFormat format);

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // empty fields parse as NaN
};

CsvDocument parse_csv(std::string_view text);

}  // namespace delaylab
