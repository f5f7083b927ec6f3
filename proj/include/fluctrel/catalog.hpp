#pragma once

#include <map>
#include <string>
#include <vector>

#include "fluctrel/process.hpp"

namespace fluctrel {

using Params = std::map<std::string, double>;

struct CatalogEntry {
  std::string name;
  std::string summary;
  Params defaults;
  std::vector<std::string> schemes;  // applicable inversion schemes
  ProcessSpec (*make)(const Params&);
};

const std::vector<CatalogEntry>& process_catalog();
bool catalog_has(const std::string& name);
ProcessSpec make_process(const std::string& name, const Params& overrides = {});

double param(const Params& p, const std::string& key, double fallback);

// Direct constructors (used by tests and the registry).
ProcessSpec make_ou(const Params& p);
ProcessSpec make_breathing_ou(const Params& p);
ProcessSpec make_double_well(const Params& p);
ProcessSpec make_langevin_kramers(const Params& p);
ProcessSpec make_linear2d(const Params& p);
ProcessSpec make_kraichnan_tangent(const Params& p);
ProcessSpec make_kraichnan_flow(const Params& p);
ProcessSpec make_flux1d(const Params& p);

// General Langevin builder: dx = -Gamma grad H + Pi grad H + G + noise.
ProcessSpec make_langevin(int dim, const Mat& gamma, const Mat& pi,
                          LangevinData data, double horizon);

}  // namespace fluctrel
