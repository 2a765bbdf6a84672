#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rfqv {

// Shortest decimal string that round-trips to the same double ('.' decimal
// separator, no locale). Used for all numeric CSV output so reruns are
// byte-identical.
std::string format_double(double x);
std::string format_long(long x);

// A rectangular table of already-formatted cells with a fixed column order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::vector<std::string>& add_row();
};

// CSV with a header line. Cells are plain tokens (numbers, identifiers); no
// quoting or escaping is performed.
void write_csv(std::ostream& os, const Table& t);
// Human-readable aligned text (columns right-aligned, two-space separator).
void write_txt(std::ostream& os, const Table& t);
void write_table(const std::string& path, const Table& t, const std::string& format);
std::string table_to_string(const Table& t, const std::string& format);

Table read_csv(std::istream& is);
Table read_csv_file(const std::string& path);

}  // namespace rfqv
