#ifndef GENREL_REPORT_IO_HPP
#define GENREL_REPORT_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include "core/estimators.hpp"
#include "core/simulation.hpp"

namespace genrel {

#define GENREL_VERSION_STRING "0.1.0"

// Ordered key/value report. Serialization is deterministic: keys keep
// insertion order and reals print with 12 significant digits.
using ReportItems = std::vector<std::pair<std::string, std::string>>;

std::string format_real(double value);  // errors on NaN/inf

ReportItems report_items(const EstimateReport& report);
ReportItems report_items(const MonteCarloTable& table);

std::string serialize_report(const ReportItems& items);
void write_report(const ReportItems& items, const std::string& path);
ReportItems parse_report(const std::string& text);
ReportItems read_report(const std::string& path);

// "point +/- z*se [lower, upper]" summary for standard output.
std::string summary_line(const EstimateReport& report);

}  // namespace genrel

#endif
