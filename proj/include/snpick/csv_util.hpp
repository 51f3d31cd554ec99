#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "snpick/errors.hpp"

namespace snpick {

// Shortest text that parses back to the identical double; keeps repeated
// runs byte-for-byte comparable.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double_field(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw io_error("malformed " + what + ": '" + s + "' is not a number");
  return v;
}

inline long parse_int_field(const std::string& s, const std::string& what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw io_error("malformed " + what + ": '" + s + "' is not an integer");
  return v;
}

}  // namespace snpick
