#pragma once

#include <map>
#include <string>
#include <vector>

#include "fluctrel/config.hpp"
#include "fluctrel/io.hpp"
#include "fluctrel/process.hpp"
#include "fluctrel/reversal.hpp"

namespace fluctrel {

struct CheckOutputs {
  std::vector<EstimateRecord> estimates;
  std::map<std::string, SampleTable> tables;
  bool pass = true;
  std::vector<std::string> notes;
};

// name -> one-line description of every CLI-reachable check.
const std::vector<std::pair<std::string, std::string>>& check_registry();

ProcessSpec process_from_config(const ExperimentConfig& cfg);
InversionScheme scheme_from_config(const ExperimentConfig& cfg, const ProcessSpec& spec);

CheckOutputs run_check(const ExperimentConfig& cfg);

// Executes the check, writes sample CSVs / estimates.jsonl / manifest.json
// under cfg.out.  Returns 0 (pass) or 1 (check failure).
int run_experiment(const ExperimentConfig& cfg);

// Human-readable or JSON catalog of processes, schemes, and checks.
std::string catalog_text(bool json_mode);

extern const char* kVersion;

}  // namespace fluctrel
