#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlch/experiments.hpp"

namespace nlch {

// Initial or evaluated field for the energy and minimize subcommands.
struct FieldSection {
  double epsilon = 0.1;
  // tanh | interface | random | constant | file
  std::string init = "tanh";
  std::string file;
  Vec2 normal{1.0, 0.0};
  double offset = 0.0;
  double sigma = 0.0;  // interface width; 0 means 4 epsilon
  double value = 0.0;  // constant
  double amplitude = 1.0;  // random
  std::uint64_t seed = 1;
  // free | profile | transitions
  std::string constraint = "free";
  double halfwidth = 0.5;
  int transitions = 1;
  double pin_width = 0.1;
};

struct SliceSection {
  SliceDomain domain = SliceDomain::square;
  SliceIntegrand integrand = SliceIntegrand::constant;
  std::size_t samples = 1000000;
  std::uint64_t seed = 7;
};

struct RunConfig {
  std::string source;
  std::string out_dir = "out";
  KernelSpec kernel;
  Potential potential = Potential::quartic();
  std::optional<GridSpec> grid;
  SolverConfig solver;
  OracleConfig oracle;
  std::vector<LatticeDirection> directions{{1, 0}};
  FieldSection field;
  GammaScanConfig gamma;
  SliceSection slice;
  InterpConfig interp;
  CompactConfig compact;
  LimsupConfig limsup;
  // The effective configuration (file plus overrides) as JSON, for manifests.
  std::string echo_json;
};

// Parses TOML text against the schema. Overrides are "section.key=value" with a TOML
// value. Throws ConfigError listing every problem found.
RunConfig parse_config(const std::string& text, const std::string& source,
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Sections and keys accepted by parse_config.
std::string config_schema();

}  // namespace nlch
