#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sponsorscan {

// file helpers (throw Error(IoError) on failure)
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
// write-temp-then-rename so concurrent readers never see a partial file
void atomic_write_file(const std::string& path, std::string_view content);
void ensure_dir(const std::string& path);
bool file_exists(const std::string& path);
// sorted file names (not paths) in dir matching extension (".json", ...); empty ext = all
std::vector<std::string> list_files(const std::string& dir, const std::string& ext = "");

std::string sha256_hex(std::string_view data);

// string helpers
std::string to_lower(std::string s);
std::string trim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
std::vector<std::string> split_lines(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// seconds -> decimal text with at most 3 fractional digits ("1", "2.5", "0.125")
std::string format_seconds(double s);
// like format_seconds but always keeps a decimal point ("1.0", "2.5")
std::string format_seconds_float(double s);
// fixed-precision decimal for CSV/report output
std::string format_fixed(double v, int digits);

// minimal CSV: quotes a field only when it contains comma/quote/newline
std::string csv_escape(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

}  // namespace sponsorscan
