#pragma once

// Minimal CSV / text helpers with line-numbered validation errors.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nvmix/errors.hpp"

namespace nvmix {

// Shortest exact round-trip formatting for doubles (>= 12 significant
// digits as required by the table schemas).
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double_field(const std::string& text, int line_no,
                                 const std::string& column) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line_no) + ", column '" +
                      column + "': not a number: '" + text + "'");
  }
  if (pos != t.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ", column '" +
                      column + "': trailing junk in '" + text + "'");
  }
  return v;
}

inline long long parse_int_field(const std::string& text, int line_no,
                                 const std::string& column) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw SchemaError("line " + std::to_string(line_no) + ", column '" +
                      column + "': not an integer: '" + text + "'");
  }
  if (pos != t.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ", column '" +
                      column + "': trailing junk in '" + text + "'");
  }
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

// FNV-1a, used to stamp output tables with the configuration they came from.
inline std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace nvmix
