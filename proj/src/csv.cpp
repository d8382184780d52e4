#include "ktop/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace ktop::csv {

std::string format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format(int v) { return std::to_string(v); }
std::string format(std::size_t v) { return std::to_string(v); }

Writer::Writer(const std::string& path) : out_(path) {
  if (!out_) {
    throw std::runtime_error("cannot open output file: " + path);
  }
}

void Writer::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void Writer::header(const std::vector<std::string>& names) { row(names); }

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ",";
    out_ << fields[i];
  }
  out_ << "\n";
}

}  // namespace ktop::csv
