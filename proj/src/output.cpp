#include "ness/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "ness/errors.hpp"

namespace ness {

namespace {

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

template <class Key>
std::vector<std::size_t> sorted_order(const std::vector<Key>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) x = 0.0;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

void write_field_csv(const DensityField& field, const std::string& path) {
  if (field.sites.size() != field.values.size()) throw DomainError("write_field_csv: size mismatch");
  std::string text = "x1,x2,value\n";
  for (std::size_t i : sorted_order(field.sites)) {
    const Site& s = field.sites[i];
    text += std::to_string(s.x1) + ',' + std::to_string(s.x2) + ',' + format_number(field.values[i]) + '\n';
  }
  write_text(text, path);
}

void write_field_csv(const CurrentField& field, const std::string& path) {
  if (field.bonds.size() != field.values.size()) throw DomainError("write_field_csv: size mismatch");
  std::string text = "x1,x2,y1,y2,value\n";
  for (std::size_t i : sorted_order(field.bonds)) {
    const Bond& b = field.bonds[i];
    text += std::to_string(b.x.x1) + ',' + std::to_string(b.x.x2) + ',' + std::to_string(b.y.x1) + ',' +
            std::to_string(b.y.x2) + ',' + format_number(field.values[i]) + '\n';
  }
  write_text(text, path);
}

void write_table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                     const std::string& path) {
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) text += (c ? "," : "") + header[c];
  text += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw DomainError("write_table_csv: row width differs from header");
    for (std::size_t c = 0; c < row.size(); ++c) text += (c ? "," : "") + format_number(row[c]);
    text += '\n';
  }
  write_text(text, path);
}

void write_summary(const Summary& summary, const std::string& path) {
  std::string text;
  for (const auto& [k, v] : summary) text += k + '=' + v + '\n';
  write_text(text, path);
}

}  // namespace ness
