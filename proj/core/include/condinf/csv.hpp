#ifndef CONDINF_CSV_HPP
#define CONDINF_CSV_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace condinf {

using CsvValue = std::variant<double, long long, std::uint64_t, std::string>;

// Format a double as scientific notation with 17 significant digits,
// locale-independent. This is the on-disk contract: rewriting the same value
// always produces the same bytes.
std::string format_double(double v);

// Comma-separated, '.' decimal, header row, LF line endings.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<CsvValue>& values);
  void raw_row(const std::string& line);  // footer rows etc., no formatting
  void close();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

}  // namespace condinf

#endif
