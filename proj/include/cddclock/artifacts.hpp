#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace cddclock {

/// Version string written into artifact headers.
const char* tool_version();

struct ArtifactHeader {
  std::string subcommand;
  std::string config_hash;
  std::vector<std::string> notes;
};

/// "# cddclock <version>", "# subcommand: ...", "# config_hash: ..." and one
/// "# " line per note.
std::string header_text(const ArtifactHeader& h);

/// CSV artifact: comment header, column row, then rows. Numbers use the
/// shortest round-trip representation.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const ArtifactHeader& header, const std::vector<std::string>& columns);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(const char* v) { return cell(std::string(v)); }
  void end_row();
  void close();

 private:
  void sep();
  std::FILE* f_ = nullptr;
  std::string path_;
  std::size_t columns_ = 0;
  std::size_t in_row_ = 0;
};

std::string format_number(double v);

/// Write a whole text file, throwing on failure.
void write_text(const std::string& path, const std::string& text);

/// Numeric CSV reader: skips '#' lines, returns the column names of the
/// first non-comment row and the numeric rows below it.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace cddclock
