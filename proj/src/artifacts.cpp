#include "cddclock/artifacts.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "cddclock/errors.hpp"

#ifndef CDDCLOCK_VERSION
#define CDDCLOCK_VERSION "0.0.0"
#endif

namespace cddclock {

const char* tool_version() { return CDDCLOCK_VERSION; }

std::string header_text(const ArtifactHeader& h) {
  std::string out = std::string("# cddclock ") + tool_version() + "\n";
  out += "# subcommand: " + h.subcommand + "\n";
  out += "# config_hash: " + h.config_hash + "\n";
  for (const std::string& n : h.notes) out += "# " + n + "\n";
  return out;
}

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

CsvWriter::CsvWriter(const std::string& path, const ArtifactHeader& header, const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw std::runtime_error("cannot write '" + path + "'");
  std::string head = header_text(header);
  for (std::size_t i = 0; i < columns.size(); ++i) head += (i ? "," : "") + columns[i];
  head += "\n";
  std::fputs(head.c_str(), f_);
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::sep() {
  if (in_row_ >= columns_) throw std::logic_error("too many cells in a row of '" + path_ + "'");
  if (in_row_++) std::fputc(',', f_);
}

CsvWriter& CsvWriter::cell(double v) {
  sep();
  std::fputs(format_number(v).c_str(), f_);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  sep();
  std::fputs(std::to_string(v).c_str(), f_);
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  sep();
  std::fputs(v.c_str(), f_);
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("short row in '" + path_ + "'");
  std::fputc('\n', f_);
  in_row_ = 0;
}

void CsvWriter::close() {
  if (f_ && std::fclose(f_) != 0) {
    f_ = nullptr;
    throw std::runtime_error("failed to write '" + path_ + "'");
  }
  f_ = nullptr;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed to write '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (t.columns.empty()) {
      t.columns = cells;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw DomainError(path + ": line " + std::to_string(n) + " has " + std::to_string(cells.size()) +
                        " cells, expected " + std::to_string(t.columns.size()));
    }
    std::vector<double> row;
    for (const std::string& s : cells) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw DomainError(path + ": line " + std::to_string(n) + ": not a number '" + s + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw DomainError(path + ": no column row");
  return t;
}

}  // namespace cddclock
