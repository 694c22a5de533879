#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace pterisk {

// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double_roundtrip(double v);

// Fixed precision, then trailing fractional zeros trimmed (at least one
// decimal kept): 61.01 -> "61.01", 0.20 -> "0.2", 23.70 -> "23.7".
std::string format_fixed_trimmed(double v, int max_decimals);

// Minimal RFC-4180 CSV: quoted fields, embedded commas/quotes/newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& content);
std::string render_csv_row(const std::vector<std::string>& fields);

}  // namespace pterisk
