#pragma once

#include <map>
#include <string>
#include <vector>

namespace fluctrel {

// Sample table written as CSV with a header row; values are printed with
// %.17g so identical runs are byte-identical.
struct SampleTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(const std::vector<double>& r) { rows.push_back(r); }
  void write_csv(const std::string& path) const;
};

// One JSON-lines record per verifier estimate.
struct EstimateRecord {
  std::string name;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  bool pass = false;
  std::map<std::string, double> extra;
  std::string to_json_line() const;
};

void write_jsonl(const std::string& path, const std::vector<EstimateRecord>& records);

void write_text_file(const std::string& path, const std::string& text);

std::string format_double(double v);

}  // namespace fluctrel
