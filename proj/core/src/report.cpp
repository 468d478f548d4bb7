#include "delaylab/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "delaylab/errors.hpp"

namespace delaylab {

namespace {

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string with_ci(double mean, double ci) {
  if (std::isnan(ci)) return fixed1(mean);
  return fixed1(mean) + "+-" + fixed1(ci);
}

const std::vector<double>& simulated_column(const ComparisonRow& row) {
  return row.dcf_ms.empty() ? row.rps_ms : row.dcf_ms;
}

void emit_csv(const ComparisonTable& table, std::ostream& out) {
  const std::size_t n = table.nodes;
  for (std::size_t i = 1; i <= n; ++i) out << "lambda" << i << ',';
  for (std::size_t i = 1; i <= n; ++i) out << 'd' << i << ',';
  out << "d_analytic\n";
  for (const auto& row : table.rows) {
    for (const double l : row.lambda) out << general(l) << ',';
    const auto& sim = simulated_column(row);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < sim.size()) out << fixed1(sim[i]);
      out << ',';
    }
    if (!row.analytic_ms.empty()) out << fixed1(row.analytic_summary_ms);
    out << '\n';
  }
}

void pad(std::ostream& out, const std::string& s, std::size_t width) {
  if (s.size() < width) out << std::string(width - s.size(), ' ');
  out << s;
}

void emit_text(const ComparisonTable& table, std::ostream& out) {
  const std::size_t n = table.nodes;
  out << "Table " << table.name << ": " << table.distribution << ", MTU "
      << general(table.mtu_bytes) << " B, regime " << table.regime;
  if (table.moment_mode != "literal") out << ", moments " << table.moment_mode;
  if (table.replications > 0) out << ", " << table.replications << " replications";
  out << '\n';

  std::vector<std::string> header;
  for (std::size_t i = 1; i <= n; ++i) header.push_back("lambda" + std::to_string(i));
  header.push_back("rho");
  header.push_back("C");
  if (table.engines.dcf) {
    for (std::size_t i = 1; i <= n; ++i) header.push_back("d" + std::to_string(i) + "_dcf");
  }
  if (table.engines.rps_oracle) {
    for (std::size_t i = 1; i <= n; ++i) header.push_back("d" + std::to_string(i) + "_rps");
  }
  if (table.engines.analytic) header.push_back("d_avg");

  std::vector<std::vector<std::string>> cells;
  for (const auto& row : table.rows) {
    std::vector<std::string> line;
    for (const double l : row.lambda) line.push_back(fixed1(l));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", row.rho);
    line.emplace_back(buf);
    line.push_back(fixed1(row.capacity_pkts_per_s));
    if (table.engines.dcf) {
      for (std::size_t i = 0; i < n; ++i) line.push_back(with_ci(row.dcf_ms[i], row.dcf_ci_ms[i]));
    }
    if (table.engines.rps_oracle) {
      for (std::size_t i = 0; i < n; ++i) line.push_back(with_ci(row.rps_ms[i], row.rps_ci_ms[i]));
    }
    if (table.engines.analytic) line.push_back(fixed1(row.analytic_summary_ms));
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out << "  ";
    pad(out, header[c], width[c]);
  }
  out << '\n';
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) out << "  ";
      pad(out, line[c], width[c]);
    }
    out << '\n';
  }
  out << "delays in ms";
  if (table.replications > 1) out << "; simulated values are mean+-95% CI half-width";
  out << '\n';
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (const auto& w : table.rows[r].warnings) out << "warning: row " << r << ": " << w << '\n';
  }
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "text") return ReportFormat::Text;
  throw ValidationError("format", "expected 'csv' or 'text'");
}

void emit_report(const ComparisonTable& table, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::Csv) {
    emit_csv(table, out);
  } else {
    emit_text(table, out);
  }
}

std::string render_report(const ComparisonTable& table, ReportFormat format) {
  std::ostringstream os;
  emit_report(table, format, os);
  return os.str();
}

CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split(line);
    if (first) {
      doc.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != doc.header.size()) {
      throw ParseError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(doc.header.size()));
    }
    std::vector<double> values;
    for (const auto& f : fields) {
      if (f.empty()) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* stop = nullptr;
      const double v = std::strtod(f.c_str(), &stop);
      if (*stop != '\0') throw ParseError("csv: not a number: '" + f + "'");
      values.push_back(v);
    }
    doc.rows.push_back(std::move(values));
  }
  return doc;
}

}  // namespace delaylab
