#include "fluctrel/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "fluctrel/errors.hpp"

namespace fluctrel {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void SampleTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) out << ',';
    out << columns[c];
  }
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << ',';
      out << format_double(r[c]);
    }
    out << '\n';
  }
}

std::string EstimateRecord::to_json_line() const {
  nlohmann::json j;
  j["name"] = name;
  j["mean"] = mean;
  j["std_error"] = std_error;
  j["n"] = n;
  j["verdict"] = pass ? "pass" : "fail";
  for (const auto& [k, v] : extra) j[k] = v;
  return j.dump();
}

void write_jsonl(const std::string& path, const std::vector<EstimateRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  for (const auto& r : records) out << r.to_json_line() << '\n';
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << text;
}

}  // namespace fluctrel
