#pragma once

// Deterministic file emission: CSV fields and tables, key=value summaries.
// Numbers use 12 significant digits and LF line endings.

#include <string>
#include <utility>
#include <vector>

#include "ness/observables.hpp"

namespace ness {

struct DensityField {
  std::vector<Site> sites;
  std::vector<double> values;
};

struct CurrentField {
  std::vector<Bond> bonds;
  std::vector<double> values;
};

/// Columns x1,x2,value, rows sorted by (x1, x2).
void write_field_csv(const DensityField& field, const std::string& path);
/// Columns x1,x2,y1,y2,value, rows sorted by (x1, x2, y1, y2).
void write_field_csv(const CurrentField& field, const std::string& path);

/// Generic table with the given header; rows are written in order.
void write_table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                     const std::string& path);

/// Ordered key=value report.
using Summary = std::vector<std::pair<std::string, std::string>>;
void write_summary(const Summary& summary, const std::string& path);

/// %.12g, with -0 printed as 0.
std::string format_number(double x);

}  // namespace ness
