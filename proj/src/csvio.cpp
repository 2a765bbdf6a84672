#include "rfqv/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rfqv {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string format_long(long x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string>& Table::add_row() {
  rows.emplace_back(columns.size());
  return rows.back();
}

void write_csv(std::ostream& os, const Table& t) {
  for (size_t j = 0; j < t.columns.size(); ++j) {
    if (j) os << ',';
    os << t.columns[j];
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      os << row[j];
    }
    os << '\n';
  }
}

void write_txt(std::ostream& os, const Table& t) {
  std::vector<size_t> width(t.columns.size(), 0);
  for (size_t j = 0; j < t.columns.size(); ++j) width[j] = t.columns[j].size();
  for (const auto& row : t.rows) {
    for (size_t j = 0; j < row.size() && j < width.size(); ++j) {
      width[j] = std::max(width[j], row[j].size());
    }
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (size_t j = 0; j < cells.size(); ++j) {
      if (j) os << "  ";
      os << std::string(width[j] - cells[j].size(), ' ') << cells[j];
    }
    os << '\n';
  };
  emit(t.columns);
  for (const auto& row : t.rows) emit(row);
}

void write_table(const std::string& path, const Table& t, const std::string& format) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
  if (format == "csv") {
    write_csv(os, t);
  } else if (format == "txt") {
    write_txt(os, t);
  } else {
    throw std::runtime_error("unknown output format '" + format + "'");
  }
}

std::string table_to_string(const Table& t, const std::string& format) {
  std::ostringstream os;
  if (format == "csv") {
    write_csv(os, t);
  } else if (format == "txt") {
    write_txt(os, t);
  } else {
    throw std::runtime_error("unknown output format '" + format + "'");
  }
  return os.str();
}

Table read_csv(std::istream& is) {
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && is.eof()) break;
    std::vector<std::string> cells;
    size_t pos = 0;
    while (true) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) {
        cells.push_back(line.substr(pos));
        break;
      }
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (first) {
      t.columns = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open csv file '" + path + "'");
  return read_csv(is);
}

}  // namespace rfqv
