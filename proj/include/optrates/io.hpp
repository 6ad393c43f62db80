#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace optrates::io {

/// Shortest round-trip text for a double with at most 17 significant
/// digits; infinity is written as `inf`.
std::string format_double(double value);

/// Parses the output of format_double (accepts `inf`).
double parse_double(const std::string& text);

/// Thrown for any file system failure; what() names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

/// Splits a CSV file into rows of fields; the header row is checked and dropped.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               const std::string& expected_header);

}  // namespace optrates::io
