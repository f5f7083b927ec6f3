#include "fluctrel/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fluctrel/catalog.hpp"
#include "fluctrel/errors.hpp"
#include "fluctrel/reversal.hpp"

namespace fluctrel {

using nlohmann::json;

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigInvalid(std::string("json parse: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.schema_version = j.value("schema_version", 1);
    if (j.contains("process")) {
      if (j["process"].is_string()) {
        c.process = j["process"].get<std::string>();
      } else {
        c.process = j["process"].value("name", "");
        if (j["process"].contains("params"))
          for (auto& [k, v] : j["process"]["params"].items())
            c.process_params[k] = v.get<double>();
      }
    }
    if (j.contains("scheme")) {
      if (j["scheme"].is_string()) {
        c.scheme = j["scheme"].get<std::string>();
      } else {
        c.scheme = j["scheme"].value("kind", "canonical");
        c.involution = j["scheme"].value("involution", "");
      }
    }
    c.check = j.value("check", "");
    c.n = j.value("n", static_cast<std::uint64_t>(100000));
    c.h = j.value("h", 1e-3);
    c.T = j.value("T", -1.0);
    if (j.contains("horizons"))
      for (auto& v : j["horizons"]) c.horizons.push_back(v.get<double>());
    c.seed = j.value("seed", static_cast<std::uint64_t>(12345));
    c.workers = j.value("workers", 1);
    c.out = j.value("out", "out");
  } catch (const ConfigInvalid&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigInvalid(std::string("field types: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["schema_version"] = schema_version;
  j["process"] = {{"name", process}, {"params", process_params}};
  json s;
  s["kind"] = scheme;
  if (!involution.empty()) s["involution"] = involution;
  j["scheme"] = s;
  j["check"] = check;
  j["n"] = n;
  j["h"] = h;
  if (T > 0) j["T"] = T;
  if (!horizons.empty()) j["horizons"] = horizons;
  j["seed"] = seed;
  j["workers"] = workers;
  j["out"] = out;
  return j.dump(2);
}

void ExperimentConfig::apply_override(const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos)
    throw ConfigInvalid("override must be key=value: " + kv);
  std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  auto as_num = [&]() {
    try {
      return std::stod(val);
    } catch (...) {
      throw ConfigInvalid("override value for " + key + " is not numeric");
    }
  };
  if (key == "process")
    process = val;
  else if (key == "scheme")
    scheme = val;
  else if (key == "involution")
    involution = val;
  else if (key == "check")
    check = val;
  else if (key == "n")
    n = static_cast<std::size_t>(as_num());
  else if (key == "h")
    h = as_num();
  else if (key == "T")
    T = as_num();
  else if (key == "seed")
    seed = static_cast<std::uint64_t>(as_num());
  else if (key == "workers")
    workers = static_cast<int>(as_num());
  else if (key == "out")
    out = val;
  else if (key.rfind("params.", 0) == 0)
    process_params[key.substr(7)] = as_num();
  else
    throw ConfigInvalid("unknown override key: " + key);
}

void ExperimentConfig::validate() const {
  if (process.empty()) throw ConfigInvalid("process: missing");
  if (!catalog_has(process)) throw ConfigInvalid("process: unknown name '" + process + "'");
  parse_inversion(scheme);  // throws on bad name
  if (!involution.empty() && involution != "identity" && involution != "negate" &&
      involution != "momentum_flip")
    throw ConfigInvalid("scheme.involution: unknown '" + involution + "'");
  if (n == 0) throw ConfigInvalid("n: must be positive");
  if (h <= 0) throw ConfigInvalid("h: must be positive");
  if (T == 0 || (T < 0 && T != -1.0)) throw ConfigInvalid("T: must be positive");
  if (workers < 1) throw ConfigInvalid("workers: must be >= 1");
  for (double hz : horizons)
    if (hz <= 0) throw ConfigInvalid("horizons: entries must be positive");
}

}  // namespace fluctrel
