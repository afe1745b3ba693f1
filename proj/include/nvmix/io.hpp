#pragma once

// File formats for the two raw data products:
//   decay records:     header `t_s,counts,shots`
//   population traces: header `t_s,population`
// Readers validate aggressively and report line numbers.

#include <sstream>
#include <string>

#include "nvmix/csv.hpp"
#include "nvmix/errors.hpp"
#include "nvmix/inference.hpp"
#include "nvmix/propagation.hpp"

namespace nvmix {

inline std::string serialize_record_csv(const DecayRecord& rec) {
  rec.validate();
  std::ostringstream out;
  out << "t_s,counts,shots\n";
  for (std::size_t i = 0; i < rec.wait_times_s.size(); ++i) {
    out << format_double(rec.wait_times_s[i]) << ',' << rec.counts[i] << ','
        << rec.shots << '\n';
  }
  return out.str();
}

inline DecayRecord parse_record_csv(const std::string& text) {
  DecayRecord rec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  long long shots = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      if (t != "t_s,counts,shots") {
        throw SchemaError("line " + std::to_string(line_no) +
                          ": expected header t_s,counts,shots");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(t);
    if (cells.size() != 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 3 "
                        "columns (t_s,counts,shots), got " +
                        std::to_string(cells.size()));
    }
    rec.wait_times_s.push_back(parse_double_field(cells[0], line_no, "t_s"));
    rec.counts.push_back(parse_int_field(cells[1], line_no, "counts"));
    const long long s = parse_int_field(cells[2], line_no, "shots");
    if (shots >= 0 && s != shots) {
      throw SchemaError("line " + std::to_string(line_no) +
                        ": shots column must be constant within a record");
    }
    shots = s;
  }
  if (!header_seen) throw SchemaError("empty record file");
  rec.shots = shots;
  try {
    rec.validate();
  } catch (const Error& e) {
    throw SchemaError(std::string("record invalid: ") + e.what());
  }
  return rec;
}

inline DecayRecord read_record_csv(const std::string& path) {
  return parse_record_csv(read_file(path));
}

inline void write_record_csv(const DecayRecord& rec, const std::string& path) {
  write_file(path, serialize_record_csv(rec));
}

inline std::string serialize_trace_csv(const PopulationTrace& trace) {
  std::ostringstream out;
  out << "t_s,population\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_double(trace.times[i]) << ','
        << format_double(trace.populations[i]) << '\n';
  }
  return out.str();
}

inline void write_trace_csv(const PopulationTrace& trace,
                            const std::string& path) {
  write_file(path, serialize_trace_csv(trace));
}

}  // namespace nvmix
