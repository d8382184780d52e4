#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace ktop::csv {

// Full round-trip precision (17 significant digits).
std::string format(double v);
std::string format(int v);
std::string format(std::size_t v);

class Writer {
 public:
  explicit Writer(const std::string& path);

  // Leading metadata lines, written as "# text".
  void comment(const std::string& text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

 private:
  std::ofstream out_;
};

}  // namespace ktop::csv
