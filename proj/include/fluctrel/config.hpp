#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fluctrel {

// JSON experiment configuration (see README for the schema).
struct ExperimentConfig {
  int schema_version = 1;
  std::string process;                    // catalog name
  std::map<std::string, double> process_params;
  std::string scheme = "canonical";       // inversion scheme
  std::string involution;                 // "", "identity", "negate", "momentum_flip"
  std::string check;                      // verifier name
  std::size_t n = 100000;
  double h = 1e-3;
  double T = -1.0;                        // <0: catalog default
  std::vector<double> horizons;
  std::uint64_t seed = 12345;
  int workers = 1;
  std::string out = "out";

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
  void apply_override(const std::string& key_equals_value);
  void validate() const;  // throws ConfigInvalid naming the field
};

}  // namespace fluctrel
